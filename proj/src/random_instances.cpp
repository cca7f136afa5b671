#include "mpmiqp/random_instances.hpp"

#include <cmath>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

namespace {

Matrix random_spd(std::size_t d, RandomStream& rng) {
  Matrix b(d, d);
  for (double& v : b.data()) v = rng.normal();
  Matrix p = mat_mul(b, b.transpose()) * (1.0 / static_cast<double>(d));
  for (std::size_t k = 0; k < d; ++k) p(k, k) += rng.uniform(0.1, 1.0);
  return symmetrize(p, 1e-12);
}

// Symmetric with eigenvalues of both signs (or a single negative scalar).
Matrix random_indefinite(std::size_t d, RandomStream& rng) {
  if (d == 1) return Matrix(1, 1, -rng.uniform(0.05, 1.0));
  Matrix p = random_spd(d, rng);
  const double shift = rng.uniform(0.5, 1.5) * p.trace() / static_cast<double>(d);
  for (std::size_t k = 0; k < d; ++k) p(k, k) -= shift;
  return p;
}

Matrix random_dynamics(std::size_t d, RandomStream& rng) {
  if (d == 1) {
    const double mag = rng.uniform(0.3, 1.2);
    return Matrix(1, 1, rng.uniform() < 0.2 ? -mag : mag);
  }
  for (;;) {
    Matrix a = Matrix::identity(d) * rng.uniform(0.5, 1.0);
    for (double& v : a.data()) v += 0.4 * rng.normal() / std::sqrt(static_cast<double>(d));
    // Reject nearly singular draws so projections stay well conditioned.
    Matrix ata = mat_mul(a.transpose(), a);
    const auto eig = sym_eigen(ata);
    if (eig.values.front() > 0.05 * eig.values.back()) return a;
  }
}

Vector normal_vector(std::size_t d, RandomStream& rng, double scale = 1.0) {
  Vector v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

MultiPeriodProblem random_problem(std::size_t n, std::size_t d, RandomStream& rng) {
  if (n == 0 || d == 0) throw InvalidArgumentError("random_problem: n and d must be positive");
  MultiPeriodProblem p;
  p.n = n;
  p.d = d;
  for (std::size_t t = 0; t <= n; ++t) p.P.push_back(d == 1 ? Matrix(1, 1, rng.uniform(0.2, 2.0)) : random_spd(d, rng));
  for (std::size_t t = 0; t < n; ++t) p.A.push_back(random_dynamics(d, rng));
  for (std::size_t t = 0; t <= n; ++t) p.r.push_back(normal_vector(d, rng));
  for (std::size_t t = 0; t < n; ++t) p.f.push_back(normal_vector(d, rng, 0.5));
  for (std::size_t t = 0; t <= n; ++t) p.b.push_back(normal_vector(d, rng, t == 0 ? 1.0 : 0.3));
  for (std::size_t t = 0; t < n; ++t) p.c.push_back(rng.uniform(0.0, 2.0));
  return p;
}

ProjectedMIQP random_projected(std::size_t n, std::size_t d, RandomStream& rng) {
  return project(random_problem(n, d, rng));
}

CostSpec random_spec(std::size_t n, std::size_t d, RandomStream& rng, double fail_prob) {
  if (n == 0 || d == 0) throw InvalidArgumentError("random_spec: n and d must be positive");
  if (d == 1 && rng.uniform() < 0.25) {
    Vector u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.uniform(0.2, 2.0) * (rng.uniform() < 0.1 ? -1.0 : 1.0);
      v[i] = rng.uniform(0.2, 2.0);
    }
    return FactorizableSpec(std::move(u), std::move(v));
  }

  // Weights P_2 .. P_{n+1}; one of them is indefinite with probability fail_prob.
  std::vector<Matrix> P(n);
  for (auto& p : P) p = d == 1 ? Matrix(1, 1, rng.uniform(0.1, 2.0)) : random_spd(d, rng);
  if (rng.uniform() < fail_prob) {
    const auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    P[t] = random_indefinite(d, rng);
  }
  std::vector<Matrix> A(n);
  for (auto& a : A) a = random_dynamics(d, rng);

  // Same recursion as the projection: M_i = M_{i+1} A_{i+1}, S_i = P_{i+1} + A^T S_{i+1} A.
  std::vector<Matrix> M(n), S(n);
  M[n - 1] = Matrix::identity(d);
  S[n - 1] = P[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    M[i] = mat_mul(M[i + 1], A[i + 1]);
    S[i] = symmetrize(P[i] + mat_mul(mat_mul(A[i + 1].transpose(), S[i + 1]), A[i + 1]), 1e-8);
  }
  if (d == 1) {
    Vector u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = M[i](0, 0);
      v[i] = S[i](0, 0) / u[i];
    }
    return FactorizableSpec(std::move(u), std::move(v));
  }
  std::vector<Matrix> U(n), V(n);
  for (std::size_t i = 0; i < n; ++i) {
    U[i] = M[i].transpose();
    V[i] = mat_mul(S[i], mat_inverse(M[i]));
  }
  return BlockFactorizableSpec(std::move(U), std::move(V));
}

}  // namespace mpmiqp
