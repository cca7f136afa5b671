#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mpmiqp/factorizable.hpp"
#include "mpmiqp/linalg.hpp"
#include "mpmiqp/projection.hpp"

namespace mpmiqp {

// Brute-force checks that only use dense LU, never the closed-form inverse.

struct FixedSupportResult {
  Vector x;  // zero off the support
  double objective = 0.0;
};

FixedSupportResult solve_fixed_support(const ProjectedMIQP& m, std::span<const std::size_t> S);
// Same, reusing an already materialized Q.
FixedSupportResult solve_fixed_support(const ProjectedMIQP& m, const Matrix& q, std::span<const std::size_t> S);

struct OracleResult {
  std::vector<std::size_t> best_support;  // 0-based
  Vector best_x;
  double best_objective = 0.0;
  // Objective per support, indexed by bit mask (bit i set <=> period i+1 in S).
  std::optional<std::vector<double>> per_support;
};

constexpr std::size_t kOracleMaxN = 20;

struct EnumerateOptions {
  bool keep_table = false;
  unsigned threads = 1;
};

// Minimizes over all 2^n supports; exact objective ties go to the
// lexicographically smallest support. Throws SizeGuardError for n > 20.
OracleResult enumerate_supports(const ProjectedMIQP& m, EnumerateOptions options = {});

// True iff support a precedes support b lexicographically (as sorted lists).
bool support_less(std::uint64_t a, std::uint64_t b);
std::vector<std::size_t> mask_to_support(std::uint64_t mask);

struct InverseReport {
  double max_error = 0.0;
  bool pass = true;
};

// || (closed-form inverse)_S * Q_S - I ||_max for the support S.
InverseReport verify_inverse(const CostSpec& spec, std::span<const std::size_t> S, double tol);

struct ArcFlow {
  std::size_t from = 0;  // DAG node
  std::size_t to = 0;
  int value = 0;
};

struct PolytopeReport {
  std::vector<ArcFlow> flow;  // arcs carrying flow, in path order
  Matrix W;                   // sum of Lambda over flow-carrying arcs with from >= 1
  bool binary = true;
  bool flow_balance = true;
  bool link = true;
  double max_error = 0.0;  // |W - dense inverse of Q_S|, relative to max(1, |Q_S^-1|)
  bool pass = true;
};

// Builds the unique path flow of the support of z and checks flow balance,
// the z-link rows and W against a dense inverse of the principal submatrix.
PolytopeReport verify_path_polytope(const CostSpec& spec, std::span<const double> z, double tol = 1e-10);

// Dense inverse of the principal (block) submatrix on S, zero-padded.
Matrix dense_submatrix_inverse(const Matrix& q, std::size_t d, std::span<const std::size_t> S);

}  // namespace mpmiqp
