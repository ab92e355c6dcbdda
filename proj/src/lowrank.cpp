#include "lrvq/lowrank.hpp"

#include <algorithm>
#include <cmath>

namespace lrvq {
namespace {

// gain = u^T * t * v, the least-squares fit of t by gain * u * v^T.
double fitGain(const Matrix& t, std::span<const double> u,
               std::span<const double> v) {
  double g = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (u[i] == 0.0) continue;
    double rowDot = 0.0;
    for (std::size_t j = 0; j < t.cols(); ++j) rowDot += t(i, j) * v[j];
    g += u[i] * rowDot;
  }
  return g;
}

void subtractScaledOuter(Matrix& t, double gain, std::span<const double> u,
                         std::span<const double> v) {
  addScaledOuter(t, -gain, u, v);
}

}  // namespace

DecompositionTrace decomposeWithTrace(const Matrix& t0,
                                      const DecompositionConfig& cfg,
                                      const FactorQuantizer* quantizer) {
  const std::size_t m = t0.rows();
  const std::size_t n = t0.cols();
  if (cfg.rank < 1 || cfg.rank > std::min(m, n))
    throw Error(ErrorCode::InvalidRank, "decomposition rank out of range");
  if (cfg.iterations < 1)
    throw Error(ErrorCode::InvalidRank, "iteration count must be >= 1");
  if (quantizer && (quantizer->dimension() != m || quantizer->dimension() != n))
    throw Error(ErrorCode::InvalidInput,
                "quantizer dimension does not match matrix shape");

  DecompositionTrace trace;
  trace.sequence.perIteration.reserve(cfg.iterations);
  trace.residualNorms.reserve(cfg.iterations + 1);

  Matrix residual = t0;
  trace.residualNorms.push_back(frobeniusNorm(residual));

  std::vector<double> uj(m), vj(n), uq(m), vq(n);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const SvdResult s = svd(residual);
    if (!quantizer) {
      RankRFactors f = truncate(s, cfg.rank);
      residual = subtract(residual, reconstructFactors(f));
      trace.sequence.perIteration.push_back(std::move(f));
    } else {
      RankRFactors f;
      f.left = Matrix(m, cfg.rank);
      f.rightT = Matrix(cfg.rank, n);
      f.gains.resize(cfg.rank);
      for (std::size_t j = 0; j < cfg.rank; ++j) {
        for (std::size_t i = 0; i < m; ++i) uj[i] = s.u(i, j);
        for (std::size_t i = 0; i < n; ++i) vj[i] = s.vt(j, i);

        QuantizedComponent code;
        code.leftIndex = quantizer->quantizeDirection(uj, uq);
        code.rightIndex = quantizer->quantizeDirection(vj, vq);

        double gain;
        if (cfg.loop == LoopMode::Closed) {
          // Refit against what is actually left over, then subtract the
          // decoder-side term so later components see its quantization error.
          gain = fitGain(residual, uq, vq);
          double dequantized = 0.0;
          code.gainCode = quantizer->quantizeGain(gain, dequantized);
          subtractScaledOuter(residual, dequantized, uq, vq);
          gain = dequantized;
        } else {
          // Open loop: the residual path stays exact; the component is
          // quantized against its own exact rank-1 term.
          double exactFit = 0.0;
          {
            double du = 0.0, dv = 0.0;
            for (std::size_t i = 0; i < m; ++i) du += uq[i] * uj[i];
            for (std::size_t i = 0; i < n; ++i) dv += vq[i] * vj[i];
            exactFit = s.singularValues[j] * du * dv;
          }
          double dequantized = 0.0;
          code.gainCode = quantizer->quantizeGain(exactFit, dequantized);
          subtractScaledOuter(residual, s.singularValues[j], uj, vj);
          gain = dequantized;
        }

        for (std::size_t i = 0; i < m; ++i) f.left(i, j) = uq[i];
        for (std::size_t i = 0; i < n; ++i) f.rightT(j, i) = vq[i];
        f.gains[j] = gain;
        trace.codes.push_back(code);
      }
      trace.sequence.perIteration.push_back(std::move(f));
    }
    trace.residualNorms.push_back(frobeniusNorm(residual));
  }
  trace.finalResidual = std::move(residual);
  return trace;
}

FactorSequence decomposeIterative(const Matrix& t0,
                                  const DecompositionConfig& cfg,
                                  const FactorQuantizer* quantizer) {
  return decomposeWithTrace(t0, cfg, quantizer).sequence;
}

std::vector<double> residualNorms(const Matrix& t0,
                                  const DecompositionConfig& cfg,
                                  const FactorQuantizer* quantizer) {
  return decomposeWithTrace(t0, cfg, quantizer).residualNorms;
}

Matrix combine(const FactorSequence& seq, CombineMode mode) {
  if (seq.perIteration.empty())
    throw Error(ErrorCode::InvalidInput, "combine of empty factor sequence");
  Matrix out = reconstructFactors(seq.perIteration.front());
  for (std::size_t i = 1; i < seq.perIteration.size(); ++i) {
    const Matrix next = reconstructFactors(seq.perIteration[i]);
    if (!out.sameShape(next))
      throw Error(ErrorCode::InvalidInput, "factor sequence shape mismatch");
    for (std::size_t j = 0; j < out.data().size(); ++j)
      out.data()[j] += next.data()[j];
  }
  if (mode == CombineMode::Average) {
    const double inv = 1.0 / static_cast<double>(seq.perIteration.size());
    for (double& v : out.data()) v *= inv;
  }
  return out;
}

}  // namespace lrvq
