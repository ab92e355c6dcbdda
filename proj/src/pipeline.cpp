#include "lrvq/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <tuple>

#include "lrvq/imageio.hpp"
#include "lrvq/patching.hpp"

namespace lrvq {

std::vector<CorpusImage> loadCorpusDir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::IoError, "not a directory: " + dir);

  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());

  std::vector<CorpusImage> out;
  out.reserve(paths.size());
  for (const std::string& p : paths)
    out.push_back({fs::path(p).filename().string(), loadImageFile(p)});
  return out;
}

std::vector<std::vector<double>> harvestDirections(
    const std::vector<CorpusImage>& corpus, std::size_t patchSize,
    std::size_t rank, std::size_t iterations) {
  std::vector<std::vector<double>> dirs;
  const DecompositionConfig cfg{rank, iterations, CombineMode::Sum,
                                LoopMode::Closed};
  for (const CorpusImage& ci : corpus) {
    const PatchGrid grid = extractPatches(ci.image, patchSize);
    for (std::size_t c = 0; c < grid.channels; ++c) {
      for (const Matrix& patch : grid.patches[c]) {
        const FactorSequence seq = decomposeIterative(patch, cfg);
        for (const RankRFactors& f : seq.perIteration) {
          for (std::size_t j = 0; j < f.gains.size(); ++j) {
            if (std::abs(f.gains[j]) <= 1e-12) continue;
            std::vector<double> left(patchSize), right(patchSize);
            for (std::size_t i = 0; i < patchSize; ++i) left[i] = f.left(i, j);
            const auto row = f.rightT.row(j);
            std::copy(row.begin(), row.end(), right.begin());
            dirs.push_back(std::move(left));
            dirs.push_back(std::move(right));
          }
        }
      }
    }
  }
  return dirs;
}

std::string formatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

const char* combineName(CombineMode m) {
  return m == CombineMode::Sum ? "sum" : "average";
}
const char* loopName(LoopMode m) {
  return m == LoopMode::Closed ? "closed" : "open";
}

struct ConfigKey {
  std::size_t p, r, i, k;
  auto operator<=>(const ConfigKey&) const = default;
};

}  // namespace

SweepResult runSweep(const SweepSpec& spec) {
  if (spec.patchSizes.empty() || spec.ranks.empty() ||
      spec.iterationCounts.empty() || spec.codebookSizes.empty())
    throw Error(ErrorCode::InvalidConfig, "sweep axes must be non-empty");
  if (spec.evalImagePaths.empty())
    throw Error(ErrorCode::InvalidConfig, "sweep needs eval images");
  if (spec.convReference.empty())
    throw Error(ErrorCode::InvalidConfig,
                "sweep needs a reference conv decoder spec");

  SweepResult result;
  result.convReferenceMacs = convDecoderMacs(spec.convReference);

  const std::vector<CorpusImage> corpus = loadCorpusDir(spec.corpusDir);
  if (corpus.empty())
    throw Error(ErrorCode::InsufficientData, "corpus has no images");

  std::vector<CorpusImage> evalImages;
  evalImages.reserve(spec.evalImagePaths.size());
  for (const std::string& p : spec.evalImagePaths)
    evalImages.push_back({std::filesystem::path(p).filename().string(),
                          loadImageFile(p)});

  std::vector<ConfigKey> configs;
  for (std::size_t p : spec.patchSizes) {
    for (std::size_t r : spec.ranks) {
      if (r > p) {
        ++result.skippedConfigs;
        result.skipLog.push_back("skipped: rank " + std::to_string(r) +
                                 " exceeds patch size " + std::to_string(p));
        continue;
      }
      for (std::size_t i : spec.iterationCounts)
        for (std::size_t k : spec.codebookSizes) configs.push_back({p, r, i, k});
    }
  }

  // Harvests depend only on (P, R, I) and are shared across codebook sizes.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> harvestKeys;
  for (const ConfigKey& c : configs) {
    const auto key = std::make_tuple(c.p, c.r, c.i);
    if (std::find(harvestKeys.begin(), harvestKeys.end(), key) ==
        harvestKeys.end())
      harvestKeys.push_back(key);
  }
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>,
           std::vector<std::vector<double>>>
      harvests;
  for (const auto& key : harvestKeys) harvests[key] = {};
#pragma omp parallel for schedule(dynamic)
  for (long hi = 0; hi < static_cast<long>(harvestKeys.size()); ++hi) {
    const auto& key = harvestKeys[hi];
    harvests[key] = harvestDirections(corpus, std::get<0>(key),
                                      std::get<1>(key), std::get<2>(key));
  }

  const std::size_t evalCount = evalImages.size();
  std::vector<RateDistortionPoint> slots(configs.size() * evalCount);
  std::vector<std::string> errors(configs.size());

#pragma omp parallel for schedule(dynamic)
  for (long ci = 0; ci < static_cast<long>(configs.size()); ++ci) {
    const ConfigKey& key = configs[ci];
    try {
      const auto& harvest = harvests.at(std::make_tuple(key.p, key.r, key.i));
      const Codebook cb = trainCodebook(harvest, key.k, spec.seed);
      CodecConfig cfg;
      cfg.patchSize = key.p;
      cfg.rank = key.r;
      cfg.iterations = key.i;
      cfg.codebookSize = key.k;
      cfg.combine = spec.combine;
      cfg.loop = spec.loop;
      for (std::size_t ei = 0; ei < evalCount; ++ei) {
        const ImageTensor& img = evalImages[ei].image;
        const EncodedStream stream =
            encode(img, cfg, cb, ExecutionPolicy::Serial);
        const std::vector<std::uint8_t> bytes = serialize(stream);
        DecodeStats stats;
        const ImageTensor decoded =
            decode(stream, cb, &stats, ExecutionPolicy::Serial);

        RateDistortionPoint& row = slots[ci * evalCount + ei];
        row.patchSize = key.p;
        row.rank = key.r;
        row.iterations = key.i;
        row.codebookSize = key.k;
        row.combine = spec.combine;
        row.loop = spec.loop;
        row.image = evalImages[ei].name;
        row.bpp = computeBpp(bytes.size(), img.height, img.width);
        row.mse = mse(img, decoded);
        row.psnr = psnr(img, decoded);
        row.pnorm2 = pnormError(img, decoded, 2.0);
        row.decoderMacs = stats.multiplies;
      }
    } catch (const Error& e) {
      errors[ci] = "config P=" + std::to_string(key.p) +
                   " R=" + std::to_string(key.r) +
                   " I=" + std::to_string(key.i) +
                   " K=" + std::to_string(key.k) + " failed: " + e.what();
      for (std::size_t ei = 0; ei < evalCount; ++ei)
        slots[ci * evalCount + ei].image.clear();
    }
  }

  for (const std::string& e : errors) {
    if (!e.empty()) {
      ++result.failures;
      result.failureLog.push_back(e);
    }
  }
  for (RateDistortionPoint& row : slots)
    if (!row.image.empty()) result.rows.push_back(std::move(row));

  std::sort(result.rows.begin(), result.rows.end(),
            [](const RateDistortionPoint& a, const RateDistortionPoint& b) {
              return std::tie(a.patchSize, a.rank, a.iterations, a.codebookSize,
                              a.image) < std::tie(b.patchSize, b.rank,
                                                  b.iterations, b.codebookSize,
                                                  b.image);
            });
  return result;
}

std::string csvHeaderRow() {
  return "schemaVersion,patchSize,rank,iterations,codebookSize,combineMode,"
         "loopMode,image,bpp,mse,psnr,pnorm2,decoderMacs";
}

std::string formatCsvRow(const RateDistortionPoint& row) {
  std::string s = std::to_string(kCsvSchemaVersion);
  s += ',' + std::to_string(row.patchSize);
  s += ',' + std::to_string(row.rank);
  s += ',' + std::to_string(row.iterations);
  s += ',' + std::to_string(row.codebookSize);
  s += ',';
  s += combineName(row.combine);
  s += ',';
  s += loopName(row.loop);
  s += ',' + row.image;
  s += ',' + formatDouble(row.bpp);
  s += ',' + formatDouble(row.mse);
  s += ',' + formatDouble(row.psnr);
  s += ',' + formatDouble(row.pnorm2);
  s += ',' + std::to_string(row.decoderMacs);
  return s;
}

void writeSweepCsv(std::ostream& out, const SweepResult& result) {
  out << csvHeaderRow() << '\n';
  for (const RateDistortionPoint& row : result.rows)
    out << formatCsvRow(row) << '\n';
  out << kCsvSchemaVersion << ",0,0,0,0,-,-,conv_reference,0,0,0,0,"
      << result.convReferenceMacs << '\n';
  if (result.failures > 0)
    out << kCsvSchemaVersion << ",0,0,0,0,-,-,error_summary,0,0,0,0,"
        << result.failures << '\n';
}

}  // namespace lrvq
