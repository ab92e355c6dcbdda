#include "lrvq/vq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace lrvq {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Deterministic 64-bit generator with a portable double mapping; used for
// k-means++ so training is bit-reproducible.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    state += kGolden;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double u01() { return (next() >> 11) * (1.0 / 9007199254740992.0); }
};

void pushBe32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(v >> 24);
  out.push_back((v >> 16) & 0xFF);
  out.push_back((v >> 8) & 0xFF);
  out.push_back(v & 0xFF);
}

std::uint32_t floatBits(float f) {
  std::uint32_t b;
  std::memcpy(&b, &f, 4);
  return b;
}

float bitsToFloat(std::uint32_t b) {
  float f;
  std::memcpy(&f, &b, 4);
  return f;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// First nonzero element made positive.
void canonicalizeSign(std::vector<double>& v) {
  for (double x : v) {
    if (x != 0.0) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

}  // namespace

std::uint32_t fnv1a32(std::span<const std::uint8_t> bytes) {
  std::uint32_t h = 2166136261u;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 16777619u;
  }
  return h;
}

Codebook::Codebook(std::size_t dimension, std::size_t size,
                   std::uint64_t trainingSeed, std::vector<float> wireWords)
    : dimension_(dimension),
      size_(size),
      trainingSeed_(trainingSeed),
      wireWords_(std::move(wireWords)) {
  if (dimension_ == 0 || size_ < 2)
    throw Error(ErrorCode::InvalidInput, "codebook needs P >= 1 and K >= 2");
  if (wireWords_.size() != dimension_ * size_)
    throw Error(ErrorCode::InvalidInput, "codebook word count mismatch");

  codewords_.resize(wireWords_.size());
  for (std::size_t j = 0; j < size_; ++j) {
    double n = 0.0;
    for (std::size_t d = 0; d < dimension_; ++d) {
      const double x = wireWords_[j * dimension_ + d];
      if (!std::isfinite(x))
        throw Error(ErrorCode::InvalidInput, "non-finite codeword");
      n += x * x;
    }
    n = std::sqrt(n);
    if (std::abs(n - 1.0) > 1e-3)
      throw Error(ErrorCode::InvalidInput, "codeword is not unit norm");
    for (std::size_t d = 0; d < dimension_; ++d)
      codewords_[j * dimension_ + d] = wireWords_[j * dimension_ + d] / n;
  }

  std::vector<std::uint8_t> bytes;
  bytes.reserve(wireWords_.size() * 4);
  for (float w : wireWords_) pushBe32(bytes, floatBits(w));
  contentHash_ = fnv1a32(bytes);
}

Codebook Codebook::fromDirections(std::size_t dimension,
                                  std::uint64_t trainingSeed,
                                  const std::vector<std::vector<double>>& dirs) {
  std::vector<float> wire;
  wire.reserve(dirs.size() * dimension);
  for (const auto& d : dirs) {
    if (d.size() != dimension)
      throw Error(ErrorCode::InvalidInput, "direction dimension mismatch");
    const double n = norm(d);
    if (n < 1e-12)
      throw Error(ErrorCode::InvalidInput, "zero direction vector");
    for (double x : d) wire.push_back(static_cast<float>(x / n));
  }
  return Codebook(dimension, dirs.size(), trainingSeed, std::move(wire));
}

Codebook trainCodebook(const std::vector<std::vector<double>>& vectors,
                       std::size_t k, std::uint64_t seed,
                       TrainingStats* stats) {
  if (k < 2)
    throw Error(ErrorCode::InvalidInput, "codebook size must be >= 2");
  if (vectors.empty())
    throw Error(ErrorCode::InsufficientData, "no training vectors");
  const std::size_t dim = vectors.front().size();

  std::vector<std::vector<double>> inputs;
  inputs.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.size() != dim)
      throw Error(ErrorCode::InvalidInput, "training vector dimension mismatch");
    const double n = norm(v);
    if (n < 1e-9) continue;  // near-zero carries no direction
    std::vector<double> u(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] / n;
    canonicalizeSign(u);
    inputs.push_back(std::move(u));
  }
  if (inputs.size() < k)
    throw Error(ErrorCode::InsufficientData,
                "fewer usable training vectors than codewords");

  const std::size_t count = inputs.size();
  SplitMix64 rng{seed};

  // k-means++ seeding on distance 1 - |cos|.
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  centers.push_back(inputs[std::min<std::size_t>(
      count - 1, static_cast<std::size_t>(rng.u01() * count))]);
  std::vector<double> dist(count);
  for (std::size_t i = 0; i < count; ++i)
    dist[i] = std::max(0.0, 1.0 - std::abs(dot(inputs[i], centers[0])));
  for (std::size_t t = 1; t < k; ++t) {
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    if (total <= 0.0) {
      centers.push_back(inputs[t % count]);
      continue;
    }
    const double r = rng.u01() * total;
    double acc = 0.0;
    std::size_t pick = count - 1;
    for (std::size_t i = 0; i < count; ++i) {
      acc += dist[i];
      if (acc > r) {
        pick = i;
        break;
      }
    }
    centers.push_back(inputs[pick]);
    for (std::size_t i = 0; i < count; ++i)
      dist[i] =
          std::min(dist[i], std::max(0.0, 1.0 - std::abs(dot(inputs[i], centers[t]))));
  }

  std::vector<std::size_t> assign(count, k);  // k = "unassigned"
  std::vector<double> objectiveTrace;
  std::size_t iterations = 0;
  double objective = 0.0;

  for (std::size_t it = 0; it < 100; ++it) {
    ++iterations;
    std::size_t changed = 0;
    double simSum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t best = 0;
      double bestSim = std::abs(dot(inputs[i], centers[0]));
      for (std::size_t j = 1; j < k; ++j) {
        const double s = std::abs(dot(inputs[i], centers[j]));
        if (s > bestSim) {
          bestSim = s;
          best = j;
        }
      }
      if (assign[i] != best) ++changed;
      assign[i] = best;
      simSum += bestSim;
    }
    objective = 1.0 - simSum / static_cast<double>(count);
    objectiveTrace.push_back(objective);

    if (it > 0 &&
        static_cast<double>(changed) < 1e-3 * static_cast<double>(count))
      break;

    // Sign-aligned centroid update, renormalized each step.
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = assign[i];
      const double s = dot(centers[j], inputs[i]) < 0.0 ? -1.0 : 1.0;
      for (std::size_t d = 0; d < dim; ++d) sums[j][d] += s * inputs[i][d];
      ++counts[j];
    }

    // Empty clusters re-seed to the inputs farthest from their centroids.
    std::vector<std::size_t> reseedOrder;
    bool haveEmpty = false;
    for (std::size_t j = 0; j < k; ++j) haveEmpty |= counts[j] == 0;
    if (haveEmpty) {
      reseedOrder.resize(count);
      std::iota(reseedOrder.begin(), reseedOrder.end(), 0);
      std::vector<double> d(count);
      for (std::size_t i = 0; i < count; ++i)
        d[i] = 1.0 - std::abs(dot(inputs[i], centers[assign[i]]));
      std::stable_sort(reseedOrder.begin(), reseedOrder.end(),
                       [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    }
    std::size_t reseedAt = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) {
        centers[j] = inputs[reseedOrder[reseedAt++ % count]];
        continue;
      }
      const double n = norm(sums[j]);
      if (n < 1e-12) continue;  // total cancellation: keep previous center
      for (std::size_t d = 0; d < dim; ++d) centers[j][d] = sums[j][d] / n;
      canonicalizeSign(centers[j]);
    }
  }

  if (stats) {
    stats->usableVectors = count;
    stats->lloydIterations = iterations;
    stats->finalObjective = objective;
    stats->objectiveTrace = std::move(objectiveTrace);
  }
  return Codebook::fromDirections(dim, seed, centers);
}

std::pair<std::uint16_t, double> quantizeDirection(std::span<const double> v,
                                                   const Codebook& cb) {
  if (v.size() != cb.dimension())
    throw Error(ErrorCode::InvalidInput, "direction dimension mismatch");
  if (norm(v) == 0.0)
    throw Error(ErrorCode::DegenerateInput, "cannot quantize a zero vector");
  std::size_t best = 0;
  double bestAbs = -1.0;
  double bestProj = 0.0;
  for (std::size_t j = 0; j < cb.size(); ++j) {
    const double p = dot(cb.codeword(j), v);
    if (std::abs(p) > bestAbs) {
      bestAbs = std::abs(p);
      bestProj = p;
      best = j;
    }
  }
  return {static_cast<std::uint16_t>(best), bestProj};
}

std::uint8_t quantizeGain(double gain, const GainRange& range) {
  if (!std::isfinite(gain))
    throw Error(ErrorCode::InvalidInput, "non-finite gain");
  if (!(range.minAbsGain > 0.0) || range.minAbsGain > range.maxAbsGain)
    throw Error(ErrorCode::InvalidInput, "invalid gain range");
  if (gain == 0.0) return 0;

  const double mag =
      std::clamp(std::abs(gain), range.minAbsGain, range.maxAbsGain);
  const double l0 = std::log2(range.minAbsGain);
  const double l1 = std::log2(range.maxAbsGain);
  long level = 1;
  if (l1 > l0)
    level = 1 + std::lround((std::log2(mag) - l0) / (l1 - l0) * 126.0);
  level = std::clamp(level, 1L, 127L);
  return static_cast<std::uint8_t>(level | (gain < 0.0 ? 0x80 : 0x00));
}

double dequantizeGain(std::uint8_t code, const GainRange& range) {
  if (!(range.minAbsGain > 0.0) || range.minAbsGain > range.maxAbsGain)
    throw Error(ErrorCode::InvalidInput, "invalid gain range");
  const int level = code & 0x7F;
  if (level == 0) return 0.0;
  const double l0 = std::log2(range.minAbsGain);
  const double l1 = std::log2(range.maxAbsGain);
  const double step = l1 > l0 ? (l1 - l0) / 126.0 : 0.0;
  const double mag = std::exp2(l0 + (level - 1) * step);
  return (code & 0x80) ? -mag : mag;
}

std::uint16_t CodebookQuantizer::quantizeDirection(std::span<const double> v,
                                                   std::span<double> out) const {
  const auto [index, proj] = lrvq::quantizeDirection(v, cb_);
  const auto cw = cb_.codeword(index);
  std::copy(cw.begin(), cw.end(), out.begin());
  (void)proj;
  return index;
}

std::uint8_t CodebookQuantizer::quantizeGain(double gain,
                                             double& dequantized) const {
  if (!range_) {
    dequantized = gain;
    return 0;
  }
  const std::uint8_t code = lrvq::quantizeGain(gain, *range_);
  dequantized = lrvq::dequantizeGain(code, *range_);
  return code;
}

namespace {
constexpr char kCodebookMagic[4] = {'L', 'R', 'C', 'B'};
constexpr std::uint8_t kCodebookVersion = 1;
}  // namespace

std::vector<std::uint8_t> saveCodebook(const Codebook& cb) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + cb.wireWords().size() * 4);
  out.insert(out.end(), kCodebookMagic, kCodebookMagic + 4);
  out.push_back(kCodebookVersion);
  out.push_back(static_cast<std::uint8_t>(cb.dimension()));
  out.push_back(static_cast<std::uint8_t>(cb.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(cb.size() & 0xFF));
  const std::uint64_t seed = cb.trainingSeed();
  for (int i = 7; i >= 0; --i)
    out.push_back(static_cast<std::uint8_t>((seed >> (8 * i)) & 0xFF));
  for (float w : cb.wireWords()) pushBe32(out, floatBits(w));
  pushBe32(out, cb.contentHash());
  return out;
}

Codebook loadCodebook(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCodebookMagic, 4) != 0)
    throw Error(ErrorCode::UnsupportedFormat, "not a codebook file");
  if (bytes[4] != kCodebookVersion)
    throw Error(ErrorCode::UnsupportedVersion, "unknown codebook version");
  const std::size_t dim = bytes[5];
  const std::size_t k = (std::size_t(bytes[6]) << 8) | bytes[7];
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed = (seed << 8) | bytes[8 + i];

  const std::size_t wordBytes = dim * k * 4;
  if (bytes.size() != 16 + wordBytes + 4)
    throw Error(ErrorCode::CorruptFile, "codebook file length mismatch");

  const std::uint32_t storedHash = (std::uint32_t(bytes[16 + wordBytes]) << 24) |
                                   (std::uint32_t(bytes[17 + wordBytes]) << 16) |
                                   (std::uint32_t(bytes[18 + wordBytes]) << 8) |
                                   std::uint32_t(bytes[19 + wordBytes]);
  if (fnv1a32(bytes.subspan(16, wordBytes)) != storedHash)
    throw Error(ErrorCode::CorruptFile, "codebook hash mismatch");

  std::vector<float> wire(dim * k);
  for (std::size_t i = 0; i < wire.size(); ++i) {
    const std::size_t o = 16 + i * 4;
    const std::uint32_t b = (std::uint32_t(bytes[o]) << 24) |
                            (std::uint32_t(bytes[o + 1]) << 16) |
                            (std::uint32_t(bytes[o + 2]) << 8) |
                            std::uint32_t(bytes[o + 3]);
    wire[i] = bitsToFloat(b);
  }
  try {
    return Codebook(dim, k, seed, std::move(wire));
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptFile, std::string("bad codebook: ") + e.what());
  }
}

Codebook loadCodebookFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return loadCodebook(bytes);
}

void saveCodebookFile(const Codebook& cb, const std::string& path) {
  const auto bytes = saveCodebook(cb);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace lrvq
