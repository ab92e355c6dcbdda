#include "lrvq/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lrvq {
namespace {

constexpr double kConvergenceFactor = 1e-12;
constexpr int kMaxSweeps = 60;

struct JacobiOut {
  Matrix u;                   // m x m orthonormal
  std::vector<double> sigma;  // length n, unsorted
  Matrix v;                   // n x n orthonormal (columns)
};

// Core one-sided Jacobi for m >= n: rotates column pairs of a working copy
// of A until all columns are mutually orthogonal, accumulating the rotations
// into V. Column norms are the singular values.
JacobiOut jacobiTall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::identity(n);

  const double normA = frobeniusNorm(a);
  const double thresh = kConvergenceFactor * normA;

  double maxOff = 0.0;
  bool converged = normA == 0.0;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    maxOff = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          app += wp * wp;
          aqq += wq * wq;
          apq += wp * wq;
        }
        maxOff = std::max(maxOff, std::abs(apq));
        if (apq == 0.0) continue;

        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    converged = maxOff <= thresh;
  }
  if (!converged)
    throw Error(ErrorCode::NumericalFailure,
                "svd did not converge after 60 sweeps; off-diagonal norm " +
                    std::to_string(maxOff));

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w(i, j) * w(i, j);
    sigma[j] = std::sqrt(s);
  }

  // Normalized columns give U; columns with a negligible singular value are
  // numerical noise and get replaced by an orthonormal completion below.
  double sigMax = 0.0;
  for (double s : sigma) sigMax = std::max(sigMax, s);
  const double tiny = sigMax * 1e-13;

  Matrix u(m, m);
  std::vector<bool> filled(m, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (sigma[j] > tiny && sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) u(i, j) = w(i, j) / sigma[j];
      filled[j] = true;
    }
  }

  // Gram-Schmidt over standard basis candidates for the remaining columns.
  auto orthogonalize = [&](std::vector<double>& cand) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!filled[j]) continue;
      double d = 0.0;
      for (std::size_t i = 0; i < m; ++i) d += cand[i] * u(i, j);
      for (std::size_t i = 0; i < m; ++i) cand[i] -= d * u(i, j);
    }
    double norm = 0.0;
    for (double x : cand) norm += x * x;
    return std::sqrt(norm);
  };
  std::size_t nextBasis = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (filled[j]) continue;
    while (nextBasis < m) {
      std::vector<double> cand(m, 0.0);
      cand[nextBasis++] = 1.0;
      const double norm = orthogonalize(cand);
      if (norm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) u(i, j) = cand[i] / norm;
        filled[j] = true;
        break;
      }
    }
  }

  return {std::move(u), std::move(sigma), std::move(v)};
}

void canonicalizeSigns(SvdResult& r) {
  const std::size_t m = r.u.rows();
  const std::size_t n = r.vt.cols();
  const std::size_t paired = std::min(m, n);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double mag = std::abs(r.u(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (r.u(arg, j) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) r.u(i, j) = -r.u(i, j);
      if (j < paired)
        for (std::size_t i = 0; i < n; ++i) r.vt(j, i) = -r.vt(j, i);
    }
  }
  // Unpaired rows of vt (n > m) get the same treatment on their own.
  for (std::size_t j = paired; j < n; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(r.vt(j, i));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (r.vt(j, arg) < 0.0)
      for (std::size_t i = 0; i < n; ++i) r.vt(j, i) = -r.vt(j, i);
  }
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw Error(ErrorCode::InvalidInput, "svd of empty matrix");
  if (!allFinite(a))
    throw Error(ErrorCode::InvalidInput, "svd input has non-finite entries");

  const bool tall = a.rows() >= a.cols();
  JacobiOut jac = tall ? jacobiTall(a) : jacobiTall(transpose(a));

  // Sort non-increasing; exact ties keep original column order.
  const std::size_t k = jac.sigma.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return jac.sigma[x] > jac.sigma[y];
  });

  const std::size_t bm = jac.u.rows();  // rows of the tall problem
  const std::size_t bn = k;
  Matrix bigU(bm, bm);
  Matrix smallV(bn, bn);
  std::vector<double> sigma(k);
  for (std::size_t j = 0; j < k; ++j) {
    sigma[j] = jac.sigma[order[j]];
    for (std::size_t i = 0; i < bm; ++i) bigU(i, j) = jac.u(i, order[j]);
    for (std::size_t i = 0; i < bn; ++i) smallV(i, j) = jac.v(i, order[j]);
  }
  for (std::size_t j = k; j < bm; ++j)
    for (std::size_t i = 0; i < bm; ++i) bigU(i, j) = jac.u(i, j);

  SvdResult out;
  out.singularValues = std::move(sigma);
  if (tall) {
    out.u = std::move(bigU);
    out.vt = transpose(smallV);
  } else {
    out.u = std::move(smallV);
    out.vt = transpose(bigU);
  }
  canonicalizeSigns(out);
  return out;
}

RankRFactors truncate(const SvdResult& s, std::size_t r) {
  const std::size_t m = s.u.rows();
  const std::size_t n = s.vt.cols();
  if (r < 1 || r > std::min(m, n))
    throw Error(ErrorCode::InvalidRank, "rank out of range");
  RankRFactors f;
  f.left = Matrix(m, r);
  f.rightT = Matrix(r, n);
  f.gains.assign(s.singularValues.begin(), s.singularValues.begin() + r);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < m; ++i) f.left(i, j) = s.u(i, j);
    for (std::size_t i = 0; i < n; ++i) f.rightT(j, i) = s.vt(j, i);
  }
  return f;
}

Matrix reconstructFactors(const RankRFactors& f) {
  const std::size_t m = f.left.rows();
  const std::size_t n = f.rightT.cols();
  const std::size_t r = f.gains.size();
  if (f.left.cols() != r || f.rightT.rows() != r)
    throw Error(ErrorCode::InvalidInput, "factor shape mismatch");
  Matrix out(m, n);
  std::vector<double> col(m);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < m; ++i) col[i] = f.left(i, j);
    addScaledOuter(out, f.gains[j], col, f.rightT.row(j));
  }
  return out;
}

}  // namespace lrvq
