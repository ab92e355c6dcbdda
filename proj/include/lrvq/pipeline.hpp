#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrvq/metrics.hpp"

namespace lrvq {

struct CorpusImage {
  std::string name;
  ImageTensor image;
};

/// Loads every .pgm/.ppm file in a directory, sorted by filename.
std::vector<CorpusImage> loadCorpusDir(const std::string& dir);

/// Runs the exact (unquantized) decomposition over every patch of every
/// corpus image and collects the unit factor directions, left and right,
/// that feed codebook training. Components whose gain is below 1e-12 are
/// basis filler and are skipped.
std::vector<std::vector<double>> harvestDirections(
    const std::vector<CorpusImage>& corpus, std::size_t patchSize,
    std::size_t rank, std::size_t iterations);

/// Locale-independent shortest round-trip formatting.
std::string formatDouble(double v);

struct SweepSpec {
  std::vector<std::size_t> patchSizes;
  std::vector<std::size_t> ranks;
  std::vector<std::size_t> iterationCounts;
  std::vector<std::size_t> codebookSizes;
  std::string corpusDir;
  std::vector<std::string> evalImagePaths;
  std::vector<ConvLayerSpec> convReference;
  CombineMode combine = CombineMode::Sum;
  LoopMode loop = LoopMode::Closed;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::vector<RateDistortionPoint> rows;  // sorted by (P, R, I, K, image)
  std::uint64_t convReferenceMacs = 0;
  std::size_t skippedConfigs = 0;   // (P, R) pairs with R > P
  std::vector<std::string> skipLog;
  std::size_t failures = 0;
  std::vector<std::string> failureLog;
};

/// One row per (config, eval image). Configurations may be evaluated
/// concurrently; rows land in preassigned slots so the result is identical
/// to a sequential run.
SweepResult runSweep(const SweepSpec& spec);

constexpr int kCsvSchemaVersion = 1;

/// Fixed schema: schemaVersion, patchSize, rank, iterations, codebookSize,
/// combineMode, loopMode, image, bpp, mse, psnr, pnorm2, decoderMacs.
/// After the data rows: one conv_reference row, then an error_summary row
/// (only when failures occurred) carrying the failure count in decoderMacs.
void writeSweepCsv(std::ostream& out, const SweepResult& result);

std::string formatCsvRow(const RateDistortionPoint& row);
std::string csvHeaderRow();

}  // namespace lrvq
