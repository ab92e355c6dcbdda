// Command-line front end: corpus generation, codebook training,
// encode/decode, single-image evaluation and rate-distortion sweeps.

#include <omp.h>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lrvq/codec.hpp"
#include "lrvq/imageio.hpp"
#include "lrvq/metrics.hpp"
#include "lrvq/pipeline.hpp"
#include "lrvq/synthetic.hpp"
#include "lrvq/vq.hpp"

namespace {

using namespace lrvq;

std::vector<std::uint8_t> readFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void writeFileBytes(const std::string& path,
                    const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

CombineMode parseCombine(const std::string& s) {
  if (s == "sum") return CombineMode::Sum;
  if (s == "average") return CombineMode::Average;
  throw Error(ErrorCode::InvalidConfig, "combine must be sum or average");
}

LoopMode parseLoop(const std::string& s) {
  if (s == "closed") return LoopMode::Closed;
  if (s == "open") return LoopMode::Open;
  throw Error(ErrorCode::InvalidConfig, "loop must be open or closed");
}

// "OUTHxOUTWxINCxOUTCxK" per layer.
std::vector<ConvLayerSpec> parseConvSpec(const std::vector<std::string>& layers) {
  std::vector<ConvLayerSpec> out;
  for (const std::string& s : layers) {
    ConvLayerSpec l;
    std::size_t* fields[5] = {&l.outHeight, &l.outWidth, &l.inChannels,
                              &l.outChannels, &l.kernelSize};
    std::size_t pos = 0;
    for (int f = 0; f < 5; ++f) {
      std::size_t next = s.find('x', pos);
      const std::string tok = s.substr(pos, next == std::string::npos
                                                ? std::string::npos
                                                : next - pos);
      if (tok.empty() || (f < 4) != (next != std::string::npos))
        throw Error(ErrorCode::InvalidConfig, "bad conv layer spec: " + s);
      *fields[f] = std::stoul(tok);
      pos = next + 1;
    }
    out.push_back(l);
  }
  return out;
}

const std::vector<std::string> kDefaultConvSpec = {
    "16x16x64x64x3", "16x16x64x64x3", "64x64x64x64x3", "64x64x64x1x3"};

void applyThreadCap() {
  const char* env = std::getenv("LRCODEC_THREADS");
  if (!env) return;
  const int n = std::atoi(env);
  if (n > 0) omp_set_num_threads(n);
}

int runGenCorpus(const std::string& outDir, std::uint64_t seed,
                 std::size_t count, std::size_t offset, std::size_t height,
                 std::size_t width, std::size_t channels) {
  generateCorpus(outDir, seed, count, offset, height, width, channels);
  std::cout << "wrote " << count << " images to " << outDir << "\n";
  return 0;
}

int runTrainCodebook(const std::string& corpusDir, std::size_t patchSize,
                     std::size_t rank, std::size_t iterations, std::size_t k,
                     std::uint64_t seed, const std::string& outPath) {
  const std::vector<CorpusImage> corpus = loadCorpusDir(corpusDir);
  if (corpus.empty())
    throw Error(ErrorCode::InsufficientData, "corpus has no loadable images");
  const auto dirs = harvestDirections(corpus, patchSize, rank, iterations);
  TrainingStats stats;
  const Codebook cb = trainCodebook(dirs, k, seed, &stats);
  saveCodebookFile(cb, outPath);
  std::cout << "codebook K=" << cb.size() << " P=" << cb.dimension()
            << " vectors=" << stats.usableVectors
            << " objective=" << formatDouble(stats.finalObjective) << "\n";
  return 0;
}

int runEncode(const std::string& imagePath, const std::string& codebookPath,
              const CodecConfig& cfgIn, const std::string& outPath,
              bool serial) {
  const ImageTensor img = loadImageFile(imagePath);
  const Codebook cb = loadCodebookFile(codebookPath);
  CodecConfig cfg = cfgIn;
  cfg.codebookSize = cb.size();
  const EncodedStream stream =
      encode(img, cfg, cb,
             serial ? ExecutionPolicy::Serial : ExecutionPolicy::Parallel);
  writeFileBytes(outPath, serialize(stream));
  return 0;
}

int runDecode(const std::string& streamPath, const std::string& codebookPath,
              const std::string& outPath, bool serial) {
  const EncodedStream stream = deserialize(readFileBytes(streamPath));
  const Codebook cb = loadCodebookFile(codebookPath);
  const ImageTensor img =
      decode(stream, cb, nullptr,
             serial ? ExecutionPolicy::Serial : ExecutionPolicy::Parallel);
  writeFileBytes(outPath, saveImage(img));
  return 0;
}

int runEval(const std::string& originalPath, const std::string& streamPath,
            const std::string& codebookPath) {
  const ImageTensor original = loadImageFile(originalPath);
  const std::vector<std::uint8_t> streamBytes = readFileBytes(streamPath);
  const EncodedStream stream = deserialize(streamBytes);
  const Codebook cb = loadCodebookFile(codebookPath);
  if (original.height != stream.originalHeight ||
      original.width != stream.originalWidth ||
      original.channels != stream.channels)
    throw Error(ErrorCode::InconsistentInput,
                "original image shape does not match stream header");

  DecodeStats stats;
  const ImageTensor decoded = decode(stream, cb, &stats);

  RateDistortionPoint row;
  row.patchSize = stream.patchSize;
  row.rank = stream.rank;
  row.iterations = stream.iterations;
  row.codebookSize = stream.codebookSize;
  row.combine = stream.combine;
  row.loop = stream.loop;
  row.image = originalPath.substr(originalPath.find_last_of('/') + 1);
  row.bpp = computeBpp(streamBytes.size(), original.height, original.width);
  row.mse = mse(original, decoded);
  row.psnr = psnr(original, decoded);
  row.pnorm2 = pnormError(original, decoded, 2.0);
  row.decoderMacs = stats.multiplies;
  std::cout << formatCsvRow(row) << "\n";
  return 0;
}

int runSweepCmd(const SweepSpec& spec, const std::string& csvPath) {
  const SweepResult result = runSweep(spec);
  for (const std::string& s : result.skipLog) std::cerr << s << "\n";
  for (const std::string& s : result.failureLog) std::cerr << s << "\n";
  std::ofstream out(csvPath, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + csvPath);
  writeSweepCsv(out, result);
  if (!out) throw Error(ErrorCode::IoError, "short write to " + csvPath);
  std::cout << "wrote " << result.rows.size() << " data rows to " << csvPath
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  applyThreadCap();

  CLI::App app{"patch-based low-rank VQ image codec"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate synthetic images");
  std::string genOut;
  std::uint64_t genSeed = 1;
  std::size_t genCount = 36, genOffset = 0, genH = 64, genW = 64, genC = 1;
  gen->add_option("--out", genOut)->required();
  gen->add_option("--seed", genSeed);
  gen->add_option("--count", genCount);
  gen->add_option("--offset", genOffset);
  gen->add_option("--height", genH);
  gen->add_option("--width", genW);
  gen->add_option("--channels", genC);

  // train-codebook
  auto* train = app.add_subcommand("train-codebook",
                                   "train the shared direction codebook");
  std::string trainCorpus, trainOut;
  std::size_t trainP = 8, trainR = 2, trainI = 2, trainK = 256;
  std::uint64_t trainSeed = 0;
  train->add_option("--corpus", trainCorpus)->required();
  train->add_option("--patch-size", trainP);
  train->add_option("--rank", trainR);
  train->add_option("--iterations", trainI);
  train->add_option("--codebook-size", trainK);
  train->add_option("--seed", trainSeed);
  train->add_option("--out", trainOut)->required();

  // encode
  auto* enc = app.add_subcommand("encode", "encode an image to a stream");
  std::string encImage, encCodebook, encOut;
  std::size_t encP = 8, encR = 2, encI = 2;
  std::string encCombine = "sum", encLoop = "closed";
  bool encBypass = false, encSerial = false;
  enc->add_option("image", encImage)->required();
  enc->add_option("--codebook", encCodebook)->required();
  enc->add_option("--patch-size", encP);
  enc->add_option("--rank", encR);
  enc->add_option("--iterations", encI);
  enc->add_option("--combine", encCombine)->check(CLI::IsMember({"sum", "average"}));
  enc->add_option("--loop", encLoop)->check(CLI::IsMember({"open", "closed"}));
  enc->add_flag("--bypass", encBypass,
                "diagnostic exact mode (cannot be serialized)");
  enc->add_flag("--serial", encSerial, "disable patch-level parallelism");
  enc->add_option("--out", encOut)->required();

  // decode
  auto* dec = app.add_subcommand("decode", "decode a stream to an image");
  std::string decStream, decCodebook, decOut;
  bool decSerial = false;
  dec->add_option("stream", decStream)->required();
  dec->add_option("--codebook", decCodebook)->required();
  dec->add_flag("--serial", decSerial, "disable patch-level parallelism");
  dec->add_option("--out", decOut)->required();

  // eval
  auto* eval = app.add_subcommand("eval", "report rate/distortion/compute");
  std::string evalOriginal, evalStream, evalCodebook;
  eval->add_option("original", evalOriginal)->required();
  eval->add_option("stream", evalStream)->required();
  eval->add_option("--codebook", evalCodebook)->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "rate-distortion/compute sweep");
  std::vector<std::size_t> swP{8}, swR{2}, swI{2}, swK{256};
  std::string swCorpus, swCsv;
  std::vector<std::string> swEval;
  std::vector<std::string> swConv = kDefaultConvSpec;
  std::string swCombine = "sum", swLoop = "closed";
  std::uint64_t swSeed = 0;
  sweep->add_option("--corpus", swCorpus)->required();
  sweep->add_option("--eval", swEval)->required()->delimiter(',');
  sweep->add_option("--patch-size", swP)->delimiter(',');
  sweep->add_option("--rank", swR)->delimiter(',');
  sweep->add_option("--iterations", swI)->delimiter(',');
  sweep->add_option("--codebook-size", swK)->delimiter(',');
  sweep->add_option("--combine", swCombine)->check(CLI::IsMember({"sum", "average"}));
  sweep->add_option("--loop", swLoop)->check(CLI::IsMember({"open", "closed"}));
  sweep->add_option("--seed", swSeed);
  sweep->add_option("--conv-spec", swConv)->delimiter(',');
  sweep->add_option("--csv", swCsv)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return runGenCorpus(genOut, genSeed, genCount, genOffset, genH, genW,
                          genC);
    if (train->parsed())
      return runTrainCodebook(trainCorpus, trainP, trainR, trainI, trainK,
                              trainSeed, trainOut);
    if (enc->parsed()) {
      CodecConfig cfg;
      cfg.patchSize = encP;
      cfg.rank = encR;
      cfg.iterations = encI;
      cfg.combine = parseCombine(encCombine);
      cfg.loop = parseLoop(encLoop);
      cfg.quantizationBypass = encBypass;
      return runEncode(encImage, encCodebook, cfg, encOut, encSerial);
    }
    if (dec->parsed()) return runDecode(decStream, decCodebook, decOut, decSerial);
    if (eval->parsed()) return runEval(evalOriginal, evalStream, evalCodebook);
    if (sweep->parsed()) {
      SweepSpec spec;
      spec.patchSizes = swP;
      spec.ranks = swR;
      spec.iterationCounts = swI;
      spec.codebookSizes = swK;
      spec.corpusDir = swCorpus;
      spec.evalImagePaths = swEval;
      spec.convReference = parseConvSpec(swConv);
      spec.combine = parseCombine(swCombine);
      spec.loop = parseLoop(swLoop);
      spec.seed = swSeed;
      return runSweepCmd(spec, swCsv);
    }
  } catch (const lrvq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exitCode();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
