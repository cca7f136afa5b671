#include "mpmiqp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

namespace {

// Exponent magnitude beyond which u and v are kept in mantissa/exponent form
// (2^830 is roughly 1e250).
constexpr int kScaleLimit = 830;

std::string period(std::size_t t) { return std::to_string(t + 1); }

void require_len(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(want) + " entries, got " +
                         std::to_string(got));
  }
}

void require_vec(const Vector& v, std::size_t d, const char* what) {
  require_len(v.size(), d, what);
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidArgumentError(std::string(what) + ": non-finite entry");
}

// Uncontrolled rollout minus targets.
std::vector<Vector> residuals(const MultiPeriodProblem& p) {
  std::vector<Vector> g(p.n + 1);
  Vector s = p.b[0];
  for (std::size_t t = 0; t <= p.n; ++t) {
    g[t].resize(p.d);
    for (std::size_t k = 0; k < p.d; ++k) g[t][k] = s[k] - p.r[t][k];
    if (t < p.n) {
      s = mat_vec(p.A[t], s);
      for (std::size_t k = 0; k < p.d; ++k) s[k] += p.b[t + 1][k];
    }
  }
  return g;
}

}  // namespace

void MultiPeriodProblem::validate() {
  if (n == 0) throw InvalidArgumentError("problem needs n >= 1");
  if (d == 0) throw InvalidArgumentError("problem needs d >= 1");
  require_len(P.size(), n + 1, "P");
  require_len(A.size(), n, "A");
  require_len(r.size(), n + 1, "r");
  require_len(f.size(), n, "f");
  require_len(b.size(), n + 1, "b");
  require_len(c.size(), n, "c");
  for (std::size_t t = 0; t <= n; ++t) {
    if (P[t].rows() != d || P[t].cols() != d) throw DimensionError("P_" + period(t) + " has wrong shape");
    if (!P[t].all_finite()) throw InvalidArgumentError("P_" + period(t) + " has non-finite entries");
    P[t] = symmetrize(P[t], 1e-8);
    if (!is_positive_definite(P[t], 1e-14)) {
      throw NotPositiveDefiniteError("P_" + period(t) + " is not positive definite");
    }
    require_vec(r[t], d, "r");
    require_vec(b[t], d, "b");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (A[t].rows() != d || A[t].cols() != d) throw DimensionError("A_" + period(t) + " has wrong shape");
    try {
      (void)mat_inverse(A[t]);
    } catch (const SingularMatrixError&) {
      throw SingularMatrixError("A_" + period(t) + " is singular");
    }
    require_vec(f[t], d, "f");
    if (!std::isfinite(c[t])) throw InvalidArgumentError("c has non-finite entries");
  }
}

ProjectedMIQP ProjectedMIQP::make(CostSpec spec, Vector a, Vector c, double constant) {
  ProjectedMIQP m{std::move(spec), std::move(a), std::move(c), constant, 0, 1};
  std::visit([&](const auto& s) { m.n = s.n(); }, m.spec);
  if (!m.scalar()) m.d = m.block_spec().d();
  require_len(m.a.size(), m.n * m.d, "a");
  require_len(m.c.size(), m.n, "c");
  for (double x : m.a)
    if (!std::isfinite(x)) throw InvalidArgumentError("a has non-finite entries");
  for (double x : m.c)
    if (!std::isfinite(x)) throw InvalidArgumentError("c has non-finite entries");
  if (!std::isfinite(m.constant)) throw InvalidArgumentError("constant is not finite");
  return m;
}

FactorizableSpec fold_scale(Vector u, Vector v, std::vector<int> k) {
  int worst = 0;
  for (int e : k) worst = std::max(worst, std::abs(e));
  if (worst <= kScaleLimit) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = std::ldexp(u[i], k[i]);
      v[i] = std::ldexp(v[i], -k[i]);
    }
    return FactorizableSpec(std::move(u), std::move(v));
  }
  return FactorizableSpec(std::move(u), std::move(v), std::move(k));
}

ProjectedMIQP project_scalar(MultiPeriodProblem p) {
  p.validate();
  if (p.d != 1) throw DimensionError("project_scalar requires d = 1");
  const std::size_t n = p.n;
  auto alpha = [&](std::size_t t) { return p.A[t](0, 0); };  // alpha_{t+1}
  auto weight = [&](std::size_t t) { return p.P[t](0, 0); };  // p_{t+1}

  // u_i = alpha_{i+1} ... alpha_n kept as mantissa * 2^k; S_i accumulates
  // sum_{tau > i} p_tau (alpha_{tau-1} ... alpha_{i+1})^2.
  Vector um(n), vm(n);
  std::vector<int> k(n, 0);
  um[n - 1] = 1.0;
  Vector S(n);
  S[n - 1] = weight(n);
  for (std::size_t i = n - 1; i-- > 0;) {
    int e = 0;
    um[i] = std::frexp(alpha(i + 1) * um[i + 1], &e);
    k[i] = k[i + 1] + e;
    S[i] = weight(i + 1) + alpha(i + 1) * alpha(i + 1) * S[i + 1];
  }
  for (std::size_t i = 0; i < n; ++i) vm[i] = S[i] / um[i];

  const auto g = residuals(p);
  Vector a(n);
  double w = weight(n) * g[n][0];
  a[n - 1] = 2.0 * w + p.f[n - 1][0];
  for (std::size_t i = n - 1; i-- > 0;) {
    w = weight(i + 1) * g[i + 1][0] + alpha(i + 1) * w;
    a[i] = 2.0 * w + p.f[i][0];
  }
  long double constant = 0.0L;
  for (std::size_t t = 0; t <= n; ++t) constant += static_cast<long double>(weight(t)) * g[t][0] * g[t][0];

  return ProjectedMIQP::make(fold_scale(std::move(um), std::move(vm), std::move(k)), std::move(a), p.c,
                             static_cast<double>(constant));
}

ProjectedMIQP project_block(MultiPeriodProblem p) {
  p.validate();
  const std::size_t n = p.n, d = p.d;

  // M_i = A_n ... A_{i+1} (M_n = I); S_i = sum_{tau > i} (prod A)^T P_tau (prod A).
  std::vector<Matrix> M(n), S(n);
  M[n - 1] = Matrix::identity(d);
  S[n - 1] = p.P[n];
  for (std::size_t i = n - 1; i-- > 0;) {
    M[i] = mat_mul(M[i + 1], p.A[i + 1]);
    S[i] = symmetrize(p.P[i + 1] + mat_mul(mat_mul(p.A[i + 1].transpose(), S[i + 1]), p.A[i + 1]), 1e-8);
  }
  std::vector<Matrix> U(n), V(n);
  for (std::size_t i = 0; i < n; ++i) {
    U[i] = M[i].transpose();
    V[i] = mat_mul(S[i], mat_inverse(M[i]));
  }

  const auto g = residuals(p);
  Vector a(n * d);
  Vector w = mat_vec(p.P[n], g[n]);
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) {
      Vector next = mat_vec(p.P[i + 1], g[i + 1]);
      const Vector carried = mat_tvec(p.A[i + 1], w);
      for (std::size_t k = 0; k < d; ++k) next[k] += carried[k];
      w = std::move(next);
    }
    for (std::size_t k = 0; k < d; ++k) a[i * d + k] = 2.0 * w[k] + p.f[i][k];
  }
  long double constant = 0.0L;
  for (std::size_t t = 0; t <= n; ++t) constant += dot(g[t], mat_vec(p.P[t], g[t]));

  return ProjectedMIQP::make(BlockFactorizableSpec(std::move(U), std::move(V)), std::move(a), p.c,
                             static_cast<double>(constant));
}

ProjectedMIQP project(MultiPeriodProblem p) {
  return p.d == 1 ? project_scalar(std::move(p)) : project_block(std::move(p));
}

std::vector<Vector> reconstruct_states(const MultiPeriodProblem& p, std::span<const double> x) {
  require_len(x.size(), p.n * p.d, "x");
  std::vector<Vector> s(p.n + 1);
  s[0] = p.b[0];
  for (std::size_t t = 0; t < p.n; ++t) {
    s[t + 1] = mat_vec(p.A[t], s[t]);
    for (std::size_t k = 0; k < p.d; ++k) s[t + 1][k] += x[t * p.d + k] + p.b[t + 1][k];
  }
  return s;
}

double original_objective(const MultiPeriodProblem& p, std::span<const double> x, std::span<const double> z) {
  require_len(z.size(), p.n, "z");
  const auto s = reconstruct_states(p, x);
  long double total = 0.0L;
  for (std::size_t t = 0; t <= p.n; ++t) {
    Vector e(p.d);
    for (std::size_t k = 0; k < p.d; ++k) e[k] = s[t][k] - p.r[t][k];
    total += dot(e, mat_vec(p.P[t], e));
  }
  for (std::size_t t = 0; t < p.n; ++t) {
    total += dot(p.f[t], x.subspan(t * p.d, p.d));
    total += static_cast<long double>(p.c[t]) * z[t];
  }
  return static_cast<double>(total);
}

Matrix materialize(const CostSpec& spec) {
  return std::visit([](const auto& s) { return materialize(s); }, spec);
}

void require_assumption(const CostSpec& spec) {
  std::visit([](const auto& s) { require_assumption(s); }, spec);
}

Vector apply_q(const CostSpec& spec, std::span<const double> x) {
  if (const auto* s = std::get_if<FactorizableSpec>(&spec)) {
    const std::size_t n = s->n();
    require_len(x.size(), n, "x");
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      long double acc = 0.0L;
      for (std::size_t j = 0; j < n; ++j)
        if (x[j] != 0.0) acc += static_cast<long double>(s->entry(i, j)) * x[j];
      y[i] = static_cast<double>(acc);
    }
    return y;
  }
  const auto& b = std::get<BlockFactorizableSpec>(spec);
  const std::size_t n = b.n(), d = b.d();
  require_len(x.size(), n * d, "x");
  std::vector<long double> acc(n * d, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto xj = x.subspan(j * d, d);
      if (std::all_of(xj.begin(), xj.end(), [](double v) { return v == 0.0; })) continue;
      const Matrix q = b.block(i, j);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t k = 0; k < d; ++k) acc[i * d + r] += static_cast<long double>(q(r, k)) * xj[k];
    }
  }
  return Vector(acc.begin(), acc.end());
}

double projected_objective(const ProjectedMIQP& m, std::span<const double> x, std::span<const double> z) {
  require_len(z.size(), m.n, "z");
  const Vector qx = apply_q(m.spec, x);
  long double total = static_cast<long double>(dot(x, qx)) + dot(m.a, x) + dot(m.c, z) + m.constant;
  return static_cast<double>(total);
}

}  // namespace mpmiqp
