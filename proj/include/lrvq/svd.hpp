#pragma once

#include <cstddef>
#include <vector>

#include "lrvq/matrix.hpp"

namespace lrvq {

/// Full decomposition a = u * diag(singularValues) * vt with square
/// orthogonal u (m x m) and vt (n x n); singular values sorted
/// non-increasing, length min(m, n).
struct SvdResult {
  Matrix u;
  std::vector<double> singularValues;
  Matrix vt;
};

/// Top-R triplets in gain-shape form: unit-norm direction columns/rows and
/// one scalar gain per rank-1 component.
struct RankRFactors {
  Matrix left;               // m x R, unit-norm columns
  Matrix rightT;             // R x n, unit-norm rows
  std::vector<double> gains; // length R
};

/// One-sided Jacobi with cyclic sweeps. Converged when the largest
/// off-diagonal Gram element drops below 1e-12 * ||a||_F; at most 60 sweeps,
/// after which a NumericalFailure carrying the achieved off-diagonal norm is
/// thrown. Output is deterministic: singular values sorted non-increasing
/// (stable, ties by original column), and the largest-magnitude entry of
/// every left singular vector is made positive.
SvdResult svd(const Matrix& a);

RankRFactors truncate(const SvdResult& s, std::size_t r);

/// sum_j gains[j] * left_j * rightT_j.
Matrix reconstructFactors(const RankRFactors& f);

}  // namespace lrvq
