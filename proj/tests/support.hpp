// Test-only helpers: Eigen conversions and independent dense oracles.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mpmiqp/factorizable.hpp"
#include "mpmiqp/linalg.hpp"
#include "mpmiqp/projection.hpp"

namespace testing {

using mpmiqp::Matrix;
using mpmiqp::Vector;

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  return e;
}

inline Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline double max_abs_diff(const Matrix& a, const Eigen::MatrixXd& b) {
  return (to_eigen(a) - b).cwiseAbs().maxCoeff();
}

// Q straight from the defining products, without the library's materialize.
inline Eigen::MatrixXd dense_q(const mpmiqp::CostSpec& spec) {
  if (const auto* s = std::get_if<mpmiqp::FactorizableSpec>(&spec)) {
    const std::size_t n = s->n();
    Eigen::MatrixXd q(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) q(i, j) = q(j, i) = s->u_value(i) * s->v_value(j);
    return q;
  }
  const auto& b = std::get<mpmiqp::BlockFactorizableSpec>(spec);
  const auto n = static_cast<Eigen::Index>(b.n()), d = static_cast<Eigen::Index>(b.d());
  Eigen::MatrixXd q(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const Eigen::MatrixXd blk = to_eigen(b.U()[i]) * to_eigen(b.V()[j]).transpose();
      q.block(i * d, j * d, d, d) = blk;
      q.block(j * d, i * d, d, d) = blk.transpose();
    }
  return q;
}

// Stacked-state form of a multi-period problem: s = L x + s0 with s the
// n+1 states, so Q = L^T P L, a = 2 L^T P (s0 - r) + f.
struct DenseProjection {
  Eigen::MatrixXd Q;
  Eigen::VectorXd a;
  double constant = 0.0;
};

inline DenseProjection dense_projection(const mpmiqp::MultiPeriodProblem& p) {
  const auto n = static_cast<Eigen::Index>(p.n), d = static_cast<Eigen::Index>(p.d);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero((n + 1) * d, n * d);
  Eigen::VectorXd s0((n + 1) * d);
  s0.segment(0, d) = to_eigen(p.b[0]);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::MatrixXd A = to_eigen(p.A[t]);
    s0.segment((t + 1) * d, d) = A * s0.segment(t * d, d) + to_eigen(p.b[t + 1]);
    L.block((t + 1) * d, 0, d, n * d) = A * L.block(t * d, 0, d, n * d);
    L.block((t + 1) * d, t * d, d, d) += Eigen::MatrixXd::Identity(d, d);
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero((n + 1) * d, (n + 1) * d);
  Eigen::VectorXd r((n + 1) * d);
  for (Eigen::Index t = 0; t <= n; ++t) {
    P.block(t * d, t * d, d, d) = to_eigen(p.P[t]);
    r.segment(t * d, d) = to_eigen(p.r[t]);
  }
  Eigen::VectorXd f(n * d);
  for (Eigen::Index t = 0; t < n; ++t) f.segment(t * d, d) = to_eigen(p.f[t]);
  const Eigen::VectorXd g = s0 - r;
  return {L.transpose() * P * L, 2.0 * L.transpose() * P * g + f, g.dot(P * g)};
}

struct BruteForce {
  double objective = std::numeric_limits<double>::infinity();
  std::uint64_t mask = 0;
  std::vector<double> all;  // objective per support mask
};

// Minimum over all supports with Eigen's LDLT; ties go to the first mask seen.
inline BruteForce brute_force(const mpmiqp::ProjectedMIQP& m) {
  const Eigen::MatrixXd Q = dense_q(m.spec);
  const auto d = static_cast<Eigen::Index>(m.d);
  BruteForce best;
  const std::uint64_t count = std::uint64_t{1} << m.n;
  best.all.resize(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<Eigen::Index> idx;
    double obj = m.constant;
    for (std::size_t i = 0; i < m.n; ++i)
      if ((mask >> i) & 1u) {
        obj += m.c[i];
        for (Eigen::Index k = 0; k < d; ++k) idx.push_back(static_cast<Eigen::Index>(i) * d + k);
      }
    if (!idx.empty()) {
      const auto k = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd qs(k, k);
      Eigen::VectorXd as(k);
      for (Eigen::Index r = 0; r < k; ++r) {
        as(r) = m.a[static_cast<std::size_t>(idx[r])];
        for (Eigen::Index c = 0; c < k; ++c) qs(r, c) = Q(idx[r], idx[c]);
      }
      obj -= 0.25 * as.dot(qs.ldlt().solve(as));
    }
    best.all[mask] = obj;
    if (obj < best.objective) {
      best.objective = obj;
      best.mask = mask;
    }
  }
  return best;
}

// Smallest eigenvalue relative to the largest magnitude (Eigen self-adjoint solver).
inline double relative_min_eigenvalue(const Eigen::MatrixXd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  return ev.minCoeff() / scale;
}

inline std::vector<std::size_t> mask_support(std::uint64_t mask, std::size_t n) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < n; ++i)
    if ((mask >> i) & 1u) s.push_back(i);
  return s;
}

}  // namespace testing
