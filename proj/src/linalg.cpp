#include "qfan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qfan/error.hpp"

namespace qfan {

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("Matrix: non-finite entry on construction");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape() + " vs " +
                                b.shape());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw NumericError("Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                " does not match " + shape());
  }
  require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// Four partial sums break the dependency chain so the loop pipelines without
// reassociation flags.
double dot(const double* __restrict x, const double* __restrict y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += x[k] * y[k];
    s1 += x[k + 1] * y[k + 1];
    s2 += x[k + 2] * y[k + 2];
    s3 += x[k + 3] * y[k + 3];
  }
  for (; k < n; ++k) s0 += x[k] * y[k];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double a, const double* __restrict x, double* __restrict y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ (" + a.shape() + " * " +
                                b.shape() + ")");
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    const double* ai = a.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) axpy(ai[k], b.row(k).data(), dst, n);
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_nt: inner dimensions differ (" + a.shape() + " * (" +
                                b.shape() + ")^T)");
  }
  Matrix out(a.rows(), b.rows());
  const std::size_t n = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i).data();
    double* dst = out.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) dst[j] = dot(ai, b.row(j).data(), n);
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("matmul_tn: inner dimensions differ ((" + a.shape() + ")^T * " +
                                b.shape() + ")");
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row(k).data();
    const double* bk = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) axpy(ak[i], bk, out.row(i).data(), n);
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  auto dst = out.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  auto dst = out.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  return map(a, [s](double v) { return v * s; });
}

double squared_frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return acc;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(squared_frobenius_norm(a)); }

// Hestenes one-sided Jacobi: orthogonalize the columns of a working copy by
// plane rotations, accumulating the rotations in V. Column norms of the result
// are the singular values.
Svd svd(const Matrix& a, int max_sweeps) {
  if (a.empty()) throw std::invalid_argument("svd: empty matrix");
  if (a.rows() < a.cols()) {
    Svd t = svd(transpose(a), max_sweeps);
    return Svd{std::move(t.v), std::move(t.singular_values), std::move(t.u)};
  }

  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  // Column-major working storage keeps each rotation on contiguous memory.
  std::vector<double> w(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[j * m + i] = a(i, j);
  std::vector<double> v(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) v[j * n + j] = 1.0;

  constexpr double eps = 1e-15;
  // Columns with norm below this are numerically zero and never rotated.
  const double negligible = std::pow(eps * frobenius_norm(a), 2);
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      double* cp = &w[p * m];
      for (std::size_t q = p + 1; q < n; ++q) {
        double* cq = &w[q * m];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (alpha <= negligible || beta <= negligible) continue;
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double xp = cp[i];
          const double xq = cq[i];
          cp[i] = c * xp - s * xq;
          cq[i] = s * xp + c * xq;
        }
        double* vp = &v[p * n];
        double* vq = &v[q * n];
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = vp[i];
          const double xq = vq[i];
          vp[i] = c * xp - s * xq;
          vq[i] = s * xp + c * xq;
        }
      }
    }
  }
  if (!converged) {
    throw NumericError("svd: Jacobi sweeps did not converge after " + std::to_string(max_sweeps) +
                       " sweeps");
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += w[j * m + i] * w[j * m + i];
    sigma[j] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Svd out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular_values[k] = sigma[j];
    for (std::size_t i = 0; i < m; ++i) {
      out.u(i, k) = sigma[j] > 0.0 ? w[j * m + i] / sigma[j] : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v[j * n + i];
  }
  return out;
}

Matrix pinv(const Matrix& a, double tol) {
  if (a.empty()) throw std::invalid_argument("pinv: empty matrix");
  if (!(tol >= 0.0)) throw std::invalid_argument("pinv: tolerance must be non-negative");
  const Svd d = svd(a);
  const double cutoff = tol * d.singular_values.front();
  const std::size_t k = d.singular_values.size();

  // A+ = V diag(1/s) U^T over the retained singular values.
  Matrix out(a.cols(), a.rows());
  for (std::size_t r = 0; r < k; ++r) {
    const double s = d.singular_values[r];
    if (s <= cutoff || s == 0.0) continue;
    const double inv = 1.0 / s;
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double vi = d.v(i, r) * inv;
      if (vi == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < a.rows(); ++j) dst[j] += vi * d.u(j, r);
    }
  }
  return out;
}

}  // namespace qfan
