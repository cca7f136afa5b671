#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "mpmiqp/factorizable.hpp"
#include "mpmiqp/linalg.hpp"

namespace mpmiqp {

// Raw multi-period data. Indices are 0-based: P[t] weighs state s_{t+1},
// A[t] and f[t] belong to period t+1, b[0] is the initial state and b[t]
// (t >= 1) the offset added in period t.
//
//   s_1 = b_0,  s_{t+1} = A_t s_t + x_t + b_t
//   cost = sum_t (s_t - r_t)^T P_t (s_t - r_t) + sum_t f_t^T x_t + sum_t c_t z_t
struct MultiPeriodProblem {
  std::size_t n = 0;
  std::size_t d = 1;
  std::vector<Matrix> P;  // n+1, d x d
  std::vector<Matrix> A;  // n,   d x d
  std::vector<Vector> r;  // n+1, length d
  std::vector<Vector> f;  // n,   length d
  std::vector<Vector> b;  // n+1, length d
  Vector c;               // n

  // Checks shapes, symmetrizes P (rejecting relative asymmetry > 1e-8),
  // requires each P_t positive definite and each A_t nonsingular.
  void validate();
};

using CostSpec = std::variant<FactorizableSpec, BlockFactorizableSpec>;

// min x^T Q x + a^T x + c^T z + constant  s.t.  x_[i] (1 - z_i) = 0.
struct ProjectedMIQP {
  CostSpec spec;
  Vector a;  // length d n
  Vector c;  // length n
  double constant = 0.0;
  std::size_t n = 0;
  std::size_t d = 1;

  bool scalar() const { return std::holds_alternative<FactorizableSpec>(spec); }
  const FactorizableSpec& scalar_spec() const { return std::get<FactorizableSpec>(spec); }
  const BlockFactorizableSpec& block_spec() const { return std::get<BlockFactorizableSpec>(spec); }

  // Builds and checks shapes; the cost spec is not checked against the assumptions here.
  static ProjectedMIQP make(CostSpec spec, Vector a, Vector c, double constant);
};

ProjectedMIQP project_scalar(MultiPeriodProblem p);
ProjectedMIQP project_block(MultiPeriodProblem p);
// Routes d == 1 to project_scalar, otherwise project_block.
ProjectedMIQP project(MultiPeriodProblem p);

// s_1 .. s_{n+1} from the forward recursion.
std::vector<Vector> reconstruct_states(const MultiPeriodProblem& p, std::span<const double> x);

double original_objective(const MultiPeriodProblem& p, std::span<const double> x, std::span<const double> z);

// x^T Q x + a^T x + c^T z + constant.
double projected_objective(const ProjectedMIQP& m, std::span<const double> x, std::span<const double> z);

// Dense Q of the projected problem.
Matrix materialize(const CostSpec& spec);

// Q x without forming Q.
Vector apply_q(const CostSpec& spec, std::span<const double> x);

void require_assumption(const CostSpec& spec);

// A spec whose exponents fit comfortably in a double is returned unscaled.
FactorizableSpec fold_scale(Vector u_mantissa, Vector v_mantissa, std::vector<int> exponents);

}  // namespace mpmiqp
