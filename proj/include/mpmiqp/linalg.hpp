#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mpmiqp {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Sized for the small blocks (d <= ~16)
// and moderate dense matrices (up to a few thousand rows) used here.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);
  void add_block(std::size_t r0, std::size_t c0, const Matrix& b, double scale = 1.0);

  double max_abs() const;
  double trace() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Exact algebraic product; accumulates in long double.
Matrix mat_mul(const Matrix& a, const Matrix& b);
Vector mat_vec(const Matrix& a, std::span<const double> x);
// a^T * x without forming the transpose.
Vector mat_tvec(const Matrix& a, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

// LU with partial pivoting. Throws SingularMatrixError when a pivot falls
// below 1e-12 * max|a|.
Matrix mat_inverse(const Matrix& a);

// Inverse square root of a symmetric positive definite matrix via a Jacobi
// eigendecomposition. Eigenvalues at or below 1e-12 * trace are rejected.
Matrix sym_inv_sqrt(const Matrix& a);

// Cholesky-based test: true iff every pivot exceeds tol * max diagonal entry.
// Throws AsymmetricMatrixError if a is not symmetric to 1e-9 relative.
bool is_positive_definite(const Matrix& a, double tol);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi rotations; input must be symmetric (it is symmetrized).
SymmetricEigen sym_eigen(const Matrix& a);

// max |a_ij - a_ji| / max(1, max|a|, scale). Pass the magnitude of the
// operands as scale when a is a difference that may cancel.
double asymmetry(const Matrix& a, double scale = 0.0);

// Returns (a + a^T)/2, throwing AsymmetricMatrixError if the relative
// asymmetry exceeds rel_tol.
Matrix symmetrize(const Matrix& a, double rel_tol, double scale = 0.0);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace mpmiqp
