#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qfan {

/// Dense row-major matrix of doubles.
///
/// Construction rejects non-finite entries. A const Matrix is immutable and
/// safe to share between threads.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// "rows x cols", for error messages.
  std::string shape() const;

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

template <typename F>
Matrix map(const Matrix& a, F&& f) {
  Matrix out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

double frobenius_norm(const Matrix& a);
double squared_frobenius_norm(const Matrix& a);

/// Thin singular value decomposition a = U diag(s) V^T.
///
/// U is rows x k, V is cols x k, k = min(rows, cols); singular values are
/// sorted in decreasing order.
struct Svd {
  Matrix u;
  std::vector<double> singular_values;
  Matrix v;
};

/// One-sided Jacobi SVD. Throws NumericError if the sweeps do not converge
/// within max_sweeps.
Svd svd(const Matrix& a, int max_sweeps = 80);

inline constexpr double kDefaultPinvTolerance = 1e-12;

/// Moore-Penrose pseudoinverse. Singular values at or below tol * sigma_max
/// are treated as zero.
Matrix pinv(const Matrix& a, double tol = kDefaultPinvTolerance);

}  // namespace qfan
