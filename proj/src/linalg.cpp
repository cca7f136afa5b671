#include "mpmiqp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape " + shape(a) + " vs " + shape(b));
  }
}

void require_square(const Matrix& a, const char* what) {
  if (!a.is_square()) throw DimensionError(std::string(what) + ": matrix is " + shape(a));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix entry count " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
  Matrix b(nr, nc);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("block out of range");
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r0 + r, c0 + c) = b(r, c);
}

void Matrix::add_block(std::size_t r0, std::size_t c0, const Matrix& b, double scale) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("block out of range");
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r0 + r, c0 + c) += scale * b(r, c);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double Matrix::trace() const {
  require_square(*this, "trace");
  long double t = 0.0L;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return static_cast<double>(t);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("mat_mul: " + shape(a) + " times " + shape(b));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += static_cast<long double>(a(i, k)) * b(k, j);
      }
      c(i, j) = static_cast<double>(s);
    }
  }
  return c;
}

Vector mat_vec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("mat_vec: size mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    long double s = 0.0L;
    for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * x[k];
    y[i] = static_cast<double>(s);
  }
  return y;
}

Vector mat_tvec(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionError("mat_tvec: size mismatch");
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    long double s = 0.0L;
    for (std::size_t k = 0; k < a.rows(); ++k) s += static_cast<long double>(a(k, j)) * x[k];
    y[j] = static_cast<double>(s);
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  long double s = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) s += static_cast<long double>(a[k]) * b[k];
  return static_cast<double>(s);
}

Matrix mat_inverse(const Matrix& a) {
  require_square(a, "mat_inverse");
  const std::size_t n = a.rows();
  if (!a.all_finite()) throw SingularMatrixError("mat_inverse: non-finite entry");
  const double scale = a.max_abs();
  const double threshold = 1e-12 * scale;
  if (n > 0 && scale == 0.0) throw SingularMatrixError("mat_inverse: zero matrix");

  // Gauss-Jordan on [a | I] in extended precision with row pivoting.
  std::vector<long double> lu(n * n), inv(n * n, 0.0L);
  for (std::size_t k = 0; k < n * n; ++k) lu[k] = a.data()[k];
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0L;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    long double best = std::fabs(lu[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      long double v = std::fabs(lu[r * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > threshold)) {
      throw SingularMatrixError("mat_inverse: pivot " + std::to_string(static_cast<double>(best)) +
                                " in column " + std::to_string(col) + " below tolerance");
    }
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(lu[piv * n + c], lu[col * n + c]);
        std::swap(inv[piv * n + c], inv[col * n + c]);
      }
    }
    const long double p = lu[col * n + col];
    for (std::size_t c = 0; c < n; ++c) {
      lu[col * n + c] /= p;
      inv[col * n + c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = lu[r * n + col];
      if (f == 0.0L) continue;
      for (std::size_t c = 0; c < n; ++c) {
        lu[r * n + c] -= f * lu[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }

  Matrix out(n, n);
  for (std::size_t k = 0; k < n * n; ++k) out.data()[k] = static_cast<double>(inv[k]);
  return out;
}

double asymmetry(const Matrix& a, double scale) {
  require_square(a, "asymmetry");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst / std::max({1.0, a.max_abs(), scale});
}

Matrix symmetrize(const Matrix& a, double rel_tol, double scale) {
  const double asym = asymmetry(a, scale);
  if (asym > rel_tol) {
    throw AsymmetricMatrixError("matrix asymmetric: relative defect " + std::to_string(asym));
  }
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

SymmetricEigen sym_eigen(const Matrix& input) {
  require_square(input, "sym_eigen");
  const std::size_t n = input.rows();
  std::vector<long double> m(n * n), v(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = 0.5L * (input(i, j) + input(j, i));
    v[i * n + i] = 1.0L;
  }
  auto at = [n](std::vector<long double>& x, std::size_t i, std::size_t j) -> long double& {
    return x[i * n + j];
  };

  for (int sweep = 0; sweep < 100; ++sweep) {
    long double off = 0.0L, total = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        long double e = at(m, i, j) * at(m, i, j);
        total += e;
        if (i != j) off += e;
      }
    if (off <= 1e-36L * total || off == 0.0L) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const long double apq = at(m, p, q);
        if (apq == 0.0L) continue;
        const long double app = at(m, p, p), aqq = at(m, q, q);
        const long double theta = (aqq - app) / (2.0L * apq);
        const long double t = (theta >= 0 ? 1.0L : -1.0L) /
                              (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
        const long double c = 1.0L / std::sqrt(t * t + 1.0L);
        const long double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const long double mkp = at(m, k, p), mkq = at(m, k, q);
          at(m, k, p) = c * mkp - s * mkq;
          at(m, k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const long double mpk = at(m, p, k), mqk = at(m, q, k);
          at(m, p, k) = c * mpk - s * mqk;
          at(m, q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const long double vkp = at(v, k, p), vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return m[x * n + x] < m[y * n + y]; });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = static_cast<double>(m[order[k] * n + order[k]]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = static_cast<double>(v[i * n + order[k]]);
  }
  return out;
}

Matrix sym_inv_sqrt(const Matrix& a) {
  require_square(a, "sym_inv_sqrt");
  const Matrix s = symmetrize(a, 1e-9);
  const double tr = s.trace();
  const SymmetricEigen eig = sym_eigen(s);
  const std::size_t n = s.rows();
  for (double lambda : eig.values) {
    if (!(lambda > 1e-12 * tr) || !(tr > 0.0)) {
      throw NotPositiveDefiniteError("sym_inv_sqrt: eigenvalue " + std::to_string(lambda) +
                                     " not above threshold");
    }
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < n; ++k) {
        acc += static_cast<long double>(eig.vectors(i, k)) * eig.vectors(j, k) /
               std::sqrt(static_cast<long double>(eig.values[k]));
      }
      out(i, j) = out(j, i) = static_cast<double>(acc);
    }
  }
  return out;
}

bool is_positive_definite(const Matrix& a, double tol) {
  require_square(a, "is_positive_definite");
  if (asymmetry(a) > 1e-9) throw AsymmetricMatrixError("is_positive_definite: asymmetric input");
  const std::size_t n = a.rows();
  if (n == 0) return true;
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
  if (!(max_diag > 0.0)) return false;
  const long double threshold = tol * max_diag;

  std::vector<long double> l(n * n, 0.0L);
  for (std::size_t j = 0; j < n; ++j) {
    long double d = 0.5L * (a(j, j) + a(j, j));
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > threshold)) return false;
    const long double root = std::sqrt(d);
    l[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      long double s = 0.5L * (static_cast<long double>(a(i, j)) + a(j, i));
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / root;
    }
  }
  return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

}  // namespace mpmiqp
