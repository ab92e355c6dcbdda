#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrvq/svd.hpp"

namespace lrvq {

enum class CombineMode : std::uint8_t { Sum = 0, Average = 1 };
enum class LoopMode : std::uint8_t { Closed = 0, Open = 1 };

struct DecompositionConfig {
  std::size_t rank = 1;
  std::size_t iterations = 1;
  CombineMode combine = CombineMode::Sum;
  LoopMode loop = LoopMode::Closed;
};

/// Wire triple for one rank-1 component.
struct QuantizedComponent {
  std::uint16_t leftIndex = 0;
  std::uint16_t rightIndex = 0;
  std::uint8_t gainCode = 0;

  bool operator==(const QuantizedComponent&) const = default;
};

/// What the decomposition needs from a quantizer. Implementations must be
/// immutable during a decomposition; the default codebook-backed one lives in
/// vq.hpp.
class FactorQuantizer {
 public:
  virtual ~FactorQuantizer() = default;
  virtual std::size_t dimension() const = 0;
  /// Picks a codeword for the direction `v` and writes the decoder-side unit
  /// vector into `out`. Returns the codeword index.
  virtual std::uint16_t quantizeDirection(std::span<const double> v,
                                          std::span<double> out) const = 0;
  /// Returns the gain code and stores the decoder-side gain in `dequantized`
  /// (pass-through when gain quantization is disabled).
  virtual std::uint8_t quantizeGain(double gain,
                                    double& dequantized) const = 0;
};

struct FactorSequence {
  std::vector<RankRFactors> perIteration;
};

struct DecompositionTrace {
  FactorSequence sequence;              // decoder-side factors
  std::vector<QuantizedComponent> codes; // iterations*rank when quantized
  std::vector<double> residualNorms;     // ||T_0||..||T_I||
  Matrix finalResidual;                  // T_I
};

/// Runs the residual iteration: each step decomposes the current residual,
/// keeps the top `rank` components and subtracts what the decoder will
/// reproduce. Without a quantizer the subtracted term is the exact
/// truncation. Closed loop quantizes each component's directions, refits its
/// gain against the live residual, quantizes the gain and subtracts the
/// dequantized term; open loop subtracts exact truncations and quantizes the
/// components afterwards.
DecompositionTrace decomposeWithTrace(const Matrix& t0,
                                      const DecompositionConfig& cfg,
                                      const FactorQuantizer* quantizer = nullptr);

FactorSequence decomposeIterative(const Matrix& t0,
                                  const DecompositionConfig& cfg,
                                  const FactorQuantizer* quantizer = nullptr);

std::vector<double> residualNorms(const Matrix& t0,
                                  const DecompositionConfig& cfg,
                                  const FactorQuantizer* quantizer = nullptr);

/// Sum of per-iteration reconstructions; Average divides by the iteration
/// count.
Matrix combine(const FactorSequence& seq, CombineMode mode);

}  // namespace lrvq
