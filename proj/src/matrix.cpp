#include "lrvq/matrix.hpp"

#include <cmath>

namespace lrvq {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorCode::InvalidInput, "matmul shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (!a.sameShape(b))
    throw Error(ErrorCode::InvalidInput, "subtract shape mismatch");
  Matrix out(a.rows(), a.cols());
  auto ad = a.data();
  auto bd = b.data();
  auto od = out.data();
  for (std::size_t i = 0; i < ad.size(); ++i) od[i] = ad[i] - bd[i];
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double frobeniusNorm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

bool allFinite(const Matrix& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

void addScaledOuter(Matrix& acc, double gain, std::span<const double> u,
                    std::span<const double> v) {
  if (acc.rows() != u.size() || acc.cols() != v.size())
    throw Error(ErrorCode::InvalidInput, "outer product shape mismatch");
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double gu = gain * u[i];
    double* row = acc.data().data() + i * acc.cols();
    for (std::size_t j = 0; j < v.size(); ++j) row[j] += gu * v[j];
  }
}

}  // namespace lrvq
