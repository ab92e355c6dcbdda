#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrvq/lowrank.hpp"

namespace lrvq {

std::uint32_t fnv1a32(std::span<const std::uint8_t> bytes);

/// Shared table of K unit-norm direction vectors of dimension P, used for
/// both left and right factor directions.
///
/// The wire representation is big-endian f32 (one word per element); the
/// in-memory codewords are those words widened to double and renormalized,
/// so unit norm holds to double precision while save/load round-trips stay
/// byte-exact. contentHash is FNV-1a over the big-endian f32 byte stream.
class Codebook {
 public:
  Codebook(std::size_t dimension, std::size_t size, std::uint64_t trainingSeed,
           std::vector<float> wireWords);

  /// Builds the canonical codebook from arbitrary nonzero directions
  /// (normalizes, projects to f32, renormalizes).
  static Codebook fromDirections(std::size_t dimension,
                                 std::uint64_t trainingSeed,
                                 const std::vector<std::vector<double>>& dirs);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return size_; }
  std::uint64_t trainingSeed() const noexcept { return trainingSeed_; }
  std::uint32_t contentHash() const noexcept { return contentHash_; }

  std::span<const double> codeword(std::size_t i) const {
    return {codewords_.data() + i * dimension_, dimension_};
  }
  std::span<const float> wireWords() const noexcept { return wireWords_; }

 private:
  std::size_t dimension_ = 0;
  std::size_t size_ = 0;
  std::uint64_t trainingSeed_ = 0;
  std::vector<float> wireWords_;    // size * dimension, file order
  std::vector<double> codewords_;   // renormalized doubles
  std::uint32_t contentHash_ = 0;
};

struct GainRange {
  double minAbsGain = 1.0;
  double maxAbsGain = 1.0;
};

struct TrainingStats {
  std::size_t usableVectors = 0;
  std::size_t lloydIterations = 0;
  double finalObjective = 0.0;            // 1 - mean |cosine|
  std::vector<double> objectiveTrace;     // one entry per assignment step
};

/// Spherical k-means on |cosine| similarity: k-means++ init on unit-
/// normalized, sign-canonicalized inputs, Lloyd updates with sign-aligned
/// centroids, convergence when fewer than 0.1% of assignments change (100
/// iterations cap). Deterministic for a given (inputs, k, seed).
Codebook trainCodebook(const std::vector<std::vector<double>>& vectors,
                       std::size_t k, std::uint64_t seed,
                       TrainingStats* stats = nullptr);

/// Index of the codeword with the largest |dot| (ties go to the lowest
/// index) and the signed projection onto it.
std::pair<std::uint16_t, double> quantizeDirection(std::span<const double> v,
                                                   const Codebook& cb);

/// 8-bit gain code: sign bit in bit 7, |gain| clamped to the range and its
/// log2 quantized uniformly to 127 levels; level 0 is reserved for exact
/// zero.
std::uint8_t quantizeGain(double gain, const GainRange& range);
double dequantizeGain(std::uint8_t code, const GainRange& range);

/// FactorQuantizer backed by a codebook. Gain quantization applies only
/// when a range is supplied; otherwise gains pass through unchanged (used
/// by the range-observation pass).
class CodebookQuantizer : public FactorQuantizer {
 public:
  CodebookQuantizer(const Codebook& cb, std::optional<GainRange> range)
      : cb_(cb), range_(range) {}

  std::size_t dimension() const override { return cb_.dimension(); }
  std::uint16_t quantizeDirection(std::span<const double> v,
                                  std::span<double> out) const override;
  std::uint8_t quantizeGain(double gain, double& dequantized) const override;

 private:
  const Codebook& cb_;
  std::optional<GainRange> range_;
};

// Codebook container: magic "LRCB", version, P (u8), K (u16 BE),
// seed (u64 BE), K*P f32 BE words, FNV-1a hash of the word bytes (u32 BE).
std::vector<std::uint8_t> saveCodebook(const Codebook& cb);
Codebook loadCodebook(std::span<const std::uint8_t> bytes);
Codebook loadCodebookFile(const std::string& path);
void saveCodebookFile(const Codebook& cb, const std::string& path);

}  // namespace lrvq
