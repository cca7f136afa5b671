#include "mpmiqp/factorizable.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

std::string one_based_pair(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "(" << i + 1 << "," << j + 1 << ")";
  return os.str();
}

}  // namespace

struct FactorizableSpec::Cache {
  std::once_flag once;
  AssumptionReport report;
};

struct BlockFactorizableSpec::Cache {
  std::once_flag once;
  AssumptionReport report;
};

void validate_support(std::span<const std::size_t> S, std::size_t n) {
  for (std::size_t t = 0; t < S.size(); ++t) {
    if (S[t] >= n) throw InvalidArgumentError("support index " + std::to_string(S[t] + 1) + " outside [1, n]");
    if (t > 0 && S[t] <= S[t - 1]) throw InvalidArgumentError("support must be strictly increasing");
  }
}

// ---------------------------------------------------------------- scalar

FactorizableSpec::FactorizableSpec(Vector u, Vector v, std::vector<int> scale_exp)
    : u_(std::move(u)), v_(std::move(v)), k_(std::move(scale_exp)), cache_(std::make_shared<Cache>()) {
  if (u_.empty()) throw InvalidArgumentError("factorizable spec needs n >= 1");
  if (u_.size() != v_.size()) throw DimensionError("u and v lengths differ");
  if (!k_.empty() && k_.size() != u_.size()) throw DimensionError("scale exponent length differs from n");
  for (std::size_t i = 0; i < u_.size(); ++i) {
    if (!std::isfinite(u_[i]) || !std::isfinite(v_[i])) throw InvalidArgumentError("non-finite u or v");
    if (u_[i] == 0.0) throw InvalidArgumentError("u_" + std::to_string(i + 1) + " is zero");
  }
}

double FactorizableSpec::u_value(std::size_t i) const {
  return k_.empty() ? u_[i] : std::ldexp(u_[i], k_[i]);
}

double FactorizableSpec::v_value(std::size_t i) const {
  return k_.empty() ? v_[i] : std::ldexp(v_[i], -k_[i]);
}

double FactorizableSpec::entry(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  if (k_.empty()) return u_[i] * v_[j];
  return std::ldexp(u_[i] * v_[j], k_[i] - k_[j]);
}

double FactorizableSpec::u_ratio(std::size_t i, std::size_t j) const {
  if (k_.empty()) return u_[i] / u_[j];
  return std::ldexp(u_[i] / u_[j], k_[i] - k_[j]);
}

FactorizableSpec FactorizableSpec::restrict(std::span<const std::size_t> S) const {
  validate_support(S, n());
  if (S.empty()) throw InvalidArgumentError("cannot restrict to an empty index set");
  Vector u, v;
  std::vector<int> k;
  for (std::size_t i : S) {
    u.push_back(u_[i]);
    v.push_back(v_[i]);
    if (!k_.empty()) k.push_back(k_[i]);
  }
  return FactorizableSpec(std::move(u), std::move(v), std::move(k));
}

const AssumptionReport& FactorizableSpec::assumption() const {
  std::call_once(cache_->once, [this] { cache_->report = check_assumption_scalar(*this); });
  return cache_->report;
}

AssumptionReport check_assumption_scalar(const FactorizableSpec& spec) {
  const std::size_t n = spec.n();
  const Vector& u = spec.u();
  const Vector& v = spec.v();
  AssumptionReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(u[i] * v[i] > 0.0)) {
      std::ostringstream os;
      os << "u_i v_i = " << u[i] * v[i] << " is not positive at i=" << i + 1;
      return {false, os.str(), i, i};
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      int sign = 0;
      if (!spec.scaled()) {
        sign = sign_of(u[i] * v[j] * (u[j] * v[i] - u[i] * v[j]));
      } else {
        // u_j v_i - u_i v_j carries 2^(k_j - k_i) and 2^(k_i - k_j); multiply
        // through by the positive 2^(k_j - k_i) before comparing.
        const int e = spec.scale_exp()[j] - spec.scale_exp()[i];
        const double diff = std::ldexp(u[j] * v[i], 2 * e) - u[i] * v[j];
        sign = sign_of(u[i] * v[j]) * sign_of(diff);
      }
      if (sign <= 0) {
        return {false, "u_i v_j (u_j v_i - u_i v_j) is not positive at " + one_based_pair(i, j), i, j};
      }
    }
  }
  return rep;
}

Matrix materialize(const FactorizableSpec& spec) {
  const std::size_t n = spec.n();
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) q(i, j) = q(j, i) = spec.entry(i, j);
  return q;
}

void require_assumption(const FactorizableSpec& spec) {
  const auto& rep = spec.assumption();
  if (!rep.pass) throw AssumptionError("assumption check failed: " + rep.first_violation);
}

ScalarArc scalar_arc(const FactorizableSpec& spec, std::size_t i, std::size_t j) {
  const std::size_t n = spec.n();
  if (i >= n || j <= i || j > n) throw InvalidArgumentError("arc " + one_based_pair(i, j) + " out of range");
  ScalarArc arc;
  const double qii = spec.entry(i, i);
  if (j == n) {
    arc.theta = 0.0;
    arc.delta = 1.0 / qii;
  } else {
    arc.theta = spec.u_ratio(i, j);
    arc.delta = 1.0 / (qii - arc.theta * spec.entry(i, j));
  }
  if (!std::isfinite(arc.delta) || !(arc.delta > 0.0)) {
    throw NumericalError("arc " + one_based_pair(i, j) + " has non-positive or non-finite weight");
  }
  return arc;
}

namespace {

RankDecomposition decompose(const FactorizableSpec& spec, std::span<const std::size_t> S) {
  require_assumption(spec);
  validate_support(S, spec.n());
  const std::size_t n = spec.n();
  RankDecomposition out;
  out.assembled = Matrix(n, n);
  for (std::size_t t = 0; t < S.size(); ++t) {
    const std::size_t i = S[t];
    const std::size_t j = t + 1 < S.size() ? S[t + 1] : n;
    const ScalarArc arc = scalar_arc(spec, i, j);
    out.terms.push_back({i, j, Matrix(1, 1, arc.delta), Matrix(1, 1, arc.theta)});
    out.assembled(i, i) += arc.delta;
    if (j < n) {
      out.assembled(i, j) -= arc.delta * arc.theta;
      out.assembled(j, i) -= arc.delta * arc.theta;
      out.assembled(j, j) += arc.delta * arc.theta * arc.theta;
    }
  }
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

}  // namespace

RankDecomposition inverse_decomposition(const FactorizableSpec& spec) {
  const auto all = all_indices(spec.n());
  return decompose(spec, all);
}

Matrix submatrix_inverse(const FactorizableSpec& spec, std::span<const std::size_t> S) {
  validate_support(S, spec.n());
  if (S.empty()) return Matrix(spec.n(), spec.n());
  return decompose(spec, S).assembled;
}

Matrix lambda_matrix(const FactorizableSpec& spec, std::size_t i, std::size_t j) {
  require_assumption(spec);
  const ScalarArc arc = scalar_arc(spec, i, j);
  const std::size_t n = spec.n();
  Matrix l(n, n);
  l(i, i) = arc.delta;
  if (j < n) {
    l(i, j) = l(j, i) = -arc.delta * arc.theta;
    l(j, j) = arc.delta * arc.theta * arc.theta;
  }
  return l;
}

Matrix phi_factor(const FactorizableSpec& spec, std::size_t i, std::size_t j) {
  require_assumption(spec);
  const ScalarArc arc = scalar_arc(spec, i, j);
  const std::size_t n = spec.n();
  Matrix phi(n, 1);
  const double root = std::sqrt(arc.delta);
  phi(i, 0) = root;
  if (j < n) phi(j, 0) = -arc.theta * root;
  return phi;
}

// ----------------------------------------------------------------- block

BlockFactorizableSpec::BlockFactorizableSpec(std::vector<Matrix> U, std::vector<Matrix> V)
    : U_(std::move(U)), V_(std::move(V)), cache_(std::make_shared<Cache>()) {
  if (U_.empty()) throw InvalidArgumentError("block factorizable spec needs n >= 1");
  if (U_.size() != V_.size()) throw DimensionError("U and V counts differ");
  d_ = U_[0].rows();
  if (d_ == 0) throw DimensionError("block dimension must be positive");
  U_inv_.reserve(U_.size());
  for (std::size_t i = 0; i < U_.size(); ++i) {
    if (U_[i].rows() != d_ || U_[i].cols() != d_ || V_[i].rows() != d_ || V_[i].cols() != d_) {
      throw DimensionError("block " + std::to_string(i + 1) + " is not " + std::to_string(d_) + "x" +
                           std::to_string(d_));
    }
    if (!U_[i].all_finite() || !V_[i].all_finite()) throw InvalidArgumentError("non-finite U or V entry");
    try {
      U_inv_.push_back(mat_inverse(U_[i]));
    } catch (const SingularMatrixError&) {
      throw SingularMatrixError("U_" + std::to_string(i + 1) + " is singular");
    }
  }
}

BlockFactorizableSpec BlockFactorizableSpec::from_scalar(const FactorizableSpec& s) {
  std::vector<Matrix> U, V;
  for (std::size_t i = 0; i < s.n(); ++i) {
    U.emplace_back(1, 1, s.u_value(i));
    V.emplace_back(1, 1, s.v_value(i));
  }
  return BlockFactorizableSpec(std::move(U), std::move(V));
}

Matrix BlockFactorizableSpec::block(std::size_t i, std::size_t j) const {
  if (i <= j) return mat_mul(U_[i], V_[j].transpose());
  return mat_mul(U_[j], V_[i].transpose()).transpose();
}

BlockFactorizableSpec BlockFactorizableSpec::restrict(std::span<const std::size_t> S) const {
  validate_support(S, n());
  if (S.empty()) throw InvalidArgumentError("cannot restrict to an empty index set");
  std::vector<Matrix> U, V;
  for (std::size_t i : S) {
    U.push_back(U_[i]);
    V.push_back(V_[i]);
  }
  return BlockFactorizableSpec(std::move(U), std::move(V));
}

const AssumptionReport& BlockFactorizableSpec::assumption() const {
  std::call_once(cache_->once, [this] { cache_->report = check_assumption_block(*this); });
  return cache_->report;
}

namespace {

constexpr double kBlockSymTol = 1e-8;
constexpr double kBlockPdTol = 1e-10;

struct RawSchur {
  Matrix theta;
  Matrix schur;
  double scale = 0.0;  // magnitude of the operands, for cancellation-aware checks
};

// U_i U_j^-1 and the Schur complement Q_[ii] - U_i U_j^-1 V_j U_i^T.
RawSchur raw_schur(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j) {
  const Matrix qii = spec.block(i, i);
  if (j == spec.n()) return {Matrix(spec.d(), spec.d()), qii, qii.max_abs()};
  Matrix theta = mat_mul(spec.U()[i], spec.U_inverse(j));
  const Matrix sub = mat_mul(mat_mul(theta, spec.V()[j]), spec.U()[i].transpose());
  const double scale = std::max(qii.max_abs(), sub.max_abs());
  return {std::move(theta), qii - sub, scale};
}

}  // namespace

AssumptionReport check_assumption_block(const BlockFactorizableSpec& spec) {
  const std::size_t n = spec.n();
  auto test = [&](std::size_t i, std::size_t j, const Matrix& m, double scale,
                  const char* what) -> std::optional<AssumptionReport> {
    const double asym = asymmetry(m, scale);
    if (asym > kBlockSymTol) {
      return AssumptionReport{false, std::string(what) + " is asymmetric at " + one_based_pair(i, j), i, j};
    }
    const Matrix s = symmetrize(m, kBlockSymTol, scale);
    if (!is_positive_definite(s, kBlockPdTol)) {
      return AssumptionReport{false, std::string(what) + " is not positive definite at " + one_based_pair(i, j), i, j};
    }
    return std::nullopt;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (auto bad = test(i, i, spec.block(i, i), 0.0, "U_i V_i^T")) return *bad;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const RawSchur rs = raw_schur(spec, i, j);
      if (auto bad = test(i, j, rs.schur, rs.scale, "Schur complement")) return *bad;
    }
  }
  return {};
}

Matrix materialize(const BlockFactorizableSpec& spec) {
  const std::size_t n = spec.n(), d = spec.d();
  Matrix q(n * d, n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Matrix b = spec.block(i, j);
      if (j == i) {
        // U_i V_i^T is symmetric only up to rounding.
        q.set_block(i * d, i * d, (b + b.transpose()) * 0.5);
        continue;
      }
      q.set_block(i * d, j * d, b);
      q.set_block(j * d, i * d, b.transpose());
    }
  }
  return q;
}

void require_assumption(const BlockFactorizableSpec& spec) {
  const auto& rep = spec.assumption();
  if (!rep.pass) throw AssumptionError("assumption check failed: " + rep.first_violation);
}

BlockArc block_arc(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j) {
  const std::size_t n = spec.n();
  if (i >= n || j <= i || j > n) throw InvalidArgumentError("arc " + one_based_pair(i, j) + " out of range");
  RawSchur rs = raw_schur(spec, i, j);
  BlockArc arc;
  arc.theta = std::move(rs.theta);
  arc.schur = symmetrize(rs.schur, kBlockSymTol, rs.scale);
  arc.delta = symmetrize(mat_inverse(arc.schur), kBlockSymTol);
  return arc;
}

namespace {

void add_lambda(Matrix& out, std::size_t d, std::size_t i, std::size_t j, std::size_t n, const BlockArc& arc) {
  out.add_block(i * d, i * d, arc.delta);
  if (j < n) {
    const Matrix dt = mat_mul(arc.delta, arc.theta);        // Delta Theta
    const Matrix tdt = mat_mul(arc.theta.transpose(), dt);  // Theta^T Delta Theta
    out.add_block(i * d, j * d, dt, -1.0);
    out.add_block(j * d, i * d, dt.transpose(), -1.0);
    out.add_block(j * d, j * d, symmetrize(tdt, kBlockSymTol));
  }
}

RankDecomposition decompose(const BlockFactorizableSpec& spec, std::span<const std::size_t> S) {
  require_assumption(spec);
  validate_support(S, spec.n());
  const std::size_t n = spec.n(), d = spec.d();
  RankDecomposition out;
  out.assembled = Matrix(n * d, n * d);
  for (std::size_t t = 0; t < S.size(); ++t) {
    const std::size_t i = S[t];
    const std::size_t j = t + 1 < S.size() ? S[t + 1] : n;
    BlockArc arc = block_arc(spec, i, j);
    add_lambda(out.assembled, d, i, j, n, arc);
    out.terms.push_back({i, j, std::move(arc.delta), std::move(arc.theta)});
  }
  return out;
}

}  // namespace

RankDecomposition inverse_decomposition(const BlockFactorizableSpec& spec) {
  const auto all = all_indices(spec.n());
  return decompose(spec, all);
}

Matrix submatrix_inverse(const BlockFactorizableSpec& spec, std::span<const std::size_t> S) {
  validate_support(S, spec.n());
  if (S.empty()) return Matrix(spec.n() * spec.d(), spec.n() * spec.d());
  return decompose(spec, S).assembled;
}

Matrix lambda_matrix(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j) {
  require_assumption(spec);
  const BlockArc arc = block_arc(spec, i, j);
  Matrix l(spec.n() * spec.d(), spec.n() * spec.d());
  add_lambda(l, spec.d(), i, j, spec.n(), arc);
  return l;
}

Matrix phi_compact(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j) {
  require_assumption(spec);
  const std::size_t d = spec.d();
  const BlockArc arc = block_arc(spec, i, j);
  const Matrix root = sym_inv_sqrt(arc.schur);
  const bool terminal = j == spec.n();
  Matrix phi(terminal ? d : 2 * d, d);
  phi.set_block(0, 0, root);
  if (!terminal) phi.set_block(d, 0, mat_mul(arc.theta.transpose(), root) * -1.0);
  return phi;
}

Matrix phi_factor(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j) {
  const std::size_t d = spec.d();
  const Matrix compact = phi_compact(spec, i, j);
  Matrix phi(spec.n() * d, d);
  phi.set_block(i * d, 0, compact.block(0, 0, d, d));
  if (j < spec.n()) phi.set_block(j * d, 0, compact.block(d, 0, d, d));
  return phi;
}

PhiTable::PhiTable(const BlockFactorizableSpec& spec, unsigned threads) : n_(spec.n()), d_(spec.d()) {
  require_assumption(spec);
  table_.resize(n_ * (n_ + 1) / 2);
  threads = std::max(1u, threads);
  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < n_; i += threads)
      for (std::size_t j = i + 1; j <= n_; ++j) table_[slot(i, j)] = phi_compact(spec, i, j);
  };
  if (threads == 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::size_t PhiTable::slot(std::size_t i, std::size_t j) const {
  // Row i holds arcs j = i+1..n; rows before it hold n, n-1, ..., n-i+1.
  return i * n_ - i * (i - 1) / 2 + (j - i - 1);
}

const Matrix& PhiTable::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j <= i || j > n_) throw InvalidArgumentError("arc out of range");
  return table_[slot(i, j)];
}

}  // namespace mpmiqp
