#include <cmath>

#include "doctest.h"
#include "lrvq/lowrank.hpp"
#include "lrvq/synthetic.hpp"
#include "lrvq/vq.hpp"
#include "oracles.hpp"

using namespace lrvq;

namespace {

// Two orthonormal direction pairs scaled by 5 and 2.
Matrix rankTwoMatrix() {
  Matrix a(4, 4);
  const double u1[4] = {0.5, 0.5, 0.5, 0.5};
  const double v1[4] = {1.0, 0.0, 0.0, 0.0};
  const double u2[4] = {0.5, -0.5, 0.5, -0.5};
  const double v2[4] = {0.0, 1.0, 0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      a(i, j) = 5.0 * u1[i] * v1[j] + 2.0 * u2[i] * v2[j];
  return a;
}

Codebook axisCodebook(std::size_t dim) {
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> e(dim, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
  }
  return Codebook::fromDirections(dim, 0, dirs);
}

}  // namespace

TEST_SUITE("lowrank") {

TEST_CASE("rank-2 input is recovered by R=1, I=2") {
  const Matrix a = rankTwoMatrix();
  const DecompositionConfig cfg{1, 2, CombineMode::Sum, LoopMode::Closed};
  const FactorSequence seq = decomposeIterative(a, cfg);
  REQUIRE(seq.perIteration.size() == 2);
  CHECK(frobeniusNorm(subtract(combine(seq, CombineMode::Sum), a)) < 1e-10);
}

TEST_CASE("full-rank truncation zeroes the residual in one iteration") {
  SplitMix64 rng{5};
  const Matrix a = oracle::randomMatrix(rng, 6, 4);
  const DecompositionConfig cfg{4, 1, CombineMode::Sum, LoopMode::Closed};
  const auto norms = residualNorms(a, cfg);
  REQUIRE(norms.size() == 2);
  CHECK(norms[1] <= 1e-8 * frobeniusNorm(a));
}

TEST_CASE("residual trace matches the scripted recursion oracle") {
  SplitMix64 rng{19};
  const Matrix a = oracle::randomMatrix(rng, 8, 8);

  const auto norms = residualNorms(a, {2, 3, CombineMode::Sum, LoopMode::Closed});
  const auto ref = oracle::residualNormTrace(a, 2, 3);
  REQUIRE(norms.size() == ref.size());
  for (std::size_t i = 0; i < norms.size(); ++i)
    CHECK(std::abs(norms[i] - ref[i]) <= 1e-6 * (ref[0] + 1.0));

  const auto n14 = residualNorms(a, {1, 4, CombineMode::Sum, LoopMode::Closed});
  const auto ref14 = oracle::residualNormTrace(a, 1, 4);
  REQUIRE(n14.size() == 5);
  for (std::size_t i = 0; i < n14.size(); ++i) {
    CHECK(std::abs(n14[i] - ref14[i]) <= 1e-6 * (ref14[0] + 1.0));
    if (i > 0) CHECK(n14[i] <= n14[i - 1]);
  }
}

TEST_CASE("combine with a single iteration ignores the mode") {
  SplitMix64 rng{17};
  const Matrix a = oracle::randomMatrix(rng, 5, 5);
  const DecompositionConfig cfg{2, 1, CombineMode::Sum, LoopMode::Closed};
  const FactorSequence seq = decomposeIterative(a, cfg);
  CHECK(combine(seq, CombineMode::Sum) == combine(seq, CombineMode::Average));
}

TEST_CASE("constant matrix shows the averaging discrepancy") {
  const double c = 0.7;
  Matrix a(4, 4);
  for (double& v : a.data()) v = c;
  const DecompositionConfig cfg{1, 2, CombineMode::Sum, LoopMode::Closed};
  const FactorSequence seq = decomposeIterative(a, cfg);
  const Matrix avg = combine(seq, CombineMode::Average);
  const Matrix sum = combine(seq, CombineMode::Sum);
  for (double v : avg.data()) CHECK(v == doctest::Approx(c / 2).epsilon(1e-10));
  CHECK(frobeniusNorm(subtract(sum, a)) < 1e-10);
}

TEST_CASE("residualNorms examples") {
  const Matrix a = rankTwoMatrix();
  const auto n1 = residualNorms(a, {2, 1, CombineMode::Sum, LoopMode::Closed});
  REQUIRE(n1.size() == 2);
  CHECK(n1[0] == doctest::Approx(frobeniusNorm(a)));
  CHECK(n1[1] <= 1e-10);

  const auto n0 =
      residualNorms(Matrix(3, 3), {1, 2, CombineMode::Sum, LoopMode::Closed});
  for (double v : n0) CHECK(v == 0.0);
}

TEST_CASE("telescoping and monotone residuals in exact mode") {
  SplitMix64 rng{23};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + rng.next() % 7;
    const std::size_t n = 2 + rng.next() % 7;
    const Matrix a = oracle::randomMatrix(rng, m, n);
    const std::size_t rank = 1 + rng.next() % std::min(m, n);
    const std::size_t iters = 1 + rng.next() % 4;
    const DecompositionConfig cfg{rank, iters, CombineMode::Sum,
                                  LoopMode::Closed};
    const DecompositionTrace trace = decomposeWithTrace(a, cfg);
    const Matrix recon = combine(trace.sequence, CombineMode::Sum);
    CHECK(frobeniusNorm(subtract(subtract(a, recon), trace.finalResidual)) <=
          1e-9 * frobeniusNorm(a));
    for (std::size_t i = 0; i + 1 < trace.residualNorms.size(); ++i)
      CHECK(trace.residualNorms[i + 1] <=
            trace.residualNorms[i] + 1e-12 * frobeniusNorm(a));
  }
}

TEST_CASE("closed loop with exact gains keeps residuals monotone") {
  SplitMix64 rng{29};
  const Codebook cb = axisCodebook(6);
  const CodebookQuantizer quantizer(cb, std::nullopt);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::randomMatrix(rng, 6, 6);
    const DecompositionConfig cfg{2, 3, CombineMode::Sum, LoopMode::Closed};
    const auto norms = residualNorms(a, cfg, &quantizer);
    for (std::size_t i = 0; i + 1 < norms.size(); ++i)
      CHECK(norms[i + 1] <= norms[i] + 1e-12 * (norms[0] + 1.0));
  }
}

TEST_CASE("closed loop telescopes even when quantized") {
  SplitMix64 rng{31};
  const Codebook cb = axisCodebook(5);
  const CodebookQuantizer quantizer(cb, GainRange{0.01, 10.0});
  const Matrix a = oracle::randomMatrix(rng, 5, 5);
  const DecompositionConfig cfg{2, 2, CombineMode::Sum, LoopMode::Closed};
  const DecompositionTrace trace = decomposeWithTrace(a, cfg, &quantizer);
  const Matrix recon = combine(trace.sequence, CombineMode::Sum);
  CHECK(frobeniusNorm(subtract(subtract(a, recon), trace.finalResidual)) <=
        1e-9 * frobeniusNorm(a));
  CHECK(trace.codes.size() == 4);
}

TEST_CASE("open loop keeps the exact residual path") {
  SplitMix64 rng{43};
  const Codebook cb = axisCodebook(6);
  const CodebookQuantizer quantizer(cb, GainRange{0.01, 10.0});
  const Matrix a = oracle::randomMatrix(rng, 6, 6);
  const DecompositionConfig open{2, 3, CombineMode::Sum, LoopMode::Open};
  const DecompositionConfig exact{2, 3, CombineMode::Sum, LoopMode::Closed};
  const auto quantizedNorms = residualNorms(a, open, &quantizer);
  const auto exactNorms = residualNorms(a, exact);
  REQUIRE(quantizedNorms.size() == exactNorms.size());
  for (std::size_t i = 0; i < quantizedNorms.size(); ++i)
    CHECK(quantizedNorms[i] == doctest::Approx(exactNorms[i]).epsilon(1e-12));
}

TEST_CASE("exact-mode error is non-increasing in rank and iterations") {
  SplitMix64 rng{37};
  const Matrix a = oracle::randomMatrix(rng, 8, 8);
  auto errorFor = [&](std::size_t r, std::size_t i) {
    const DecompositionConfig cfg{r, i, CombineMode::Sum, LoopMode::Closed};
    return frobeniusNorm(
        subtract(a, combine(decomposeIterative(a, cfg), CombineMode::Sum)));
  };
  for (std::size_t r = 1; r < 8; ++r)
    CHECK(errorFor(r + 1, 2) <= errorFor(r, 2) + 1e-10);
  for (std::size_t i = 1; i < 4; ++i)
    CHECK(errorFor(2, i + 1) <= errorFor(2, i) + 1e-10);
}

TEST_CASE("combined reconstruction cannot beat the rank-I*R truncation") {
  SplitMix64 rng{41};
  for (int trial = 0; trial < 8; ++trial) {
    const Matrix a = oracle::randomMatrix(rng, 7, 7);
    const DecompositionConfig cfg{2, 2, CombineMode::Sum, LoopMode::Closed};
    const double err = frobeniusNorm(
        subtract(a, combine(decomposeIterative(a, cfg), CombineMode::Sum)));
    const double floor = oracle::truncationError(a, 4);
    CHECK(err >= floor - 1e-6 * (floor + 1.0));
  }
}

TEST_CASE("configuration validation") {
  const Matrix a = rankTwoMatrix();
  CHECK_THROWS_AS(
      decomposeIterative(a, {0, 1, CombineMode::Sum, LoopMode::Closed}), Error);
  CHECK_THROWS_AS(
      decomposeIterative(a, {5, 1, CombineMode::Sum, LoopMode::Closed}), Error);
  CHECK_THROWS_AS(
      decomposeIterative(a, {1, 0, CombineMode::Sum, LoopMode::Closed}), Error);
  const Codebook cb = axisCodebook(3);
  const CodebookQuantizer q(cb, std::nullopt);
  CHECK_THROWS_AS(
      decomposeIterative(a, {1, 1, CombineMode::Sum, LoopMode::Closed}, &q),
      Error);
  CHECK_THROWS_AS(combine(FactorSequence{}, CombineMode::Sum), Error);
}

}  // TEST_SUITE
