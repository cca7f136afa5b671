#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpmiqp/linalg.hpp"

namespace mpmiqp {

struct AssumptionReport {
  bool pass = true;
  std::string first_violation;  // empty when pass
  // 0-based indices of the first violation; j == i for a diagonal failure.
  std::size_t i = 0;
  std::size_t j = 0;
};

// Scalar factorizable matrix: Q_ij = u_i v_j for i <= j, mirrored below.
//
// Optionally each pair may carry a power-of-two exponent k_i so that the
// represented values are u_i * 2^k_i and v_i * 2^-k_i. This keeps very long
// horizons with decaying products representable; entries and ratios are then
// evaluated by exponent subtraction.
class FactorizableSpec {
 public:
  FactorizableSpec(Vector u, Vector v, std::vector<int> scale_exp = {});

  std::size_t n() const { return u_.size(); }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }
  const std::vector<int>& scale_exp() const { return k_; }
  bool scaled() const { return !k_.empty(); }

  // Represented u_i, v_i (may over/underflow when scaled()).
  double u_value(std::size_t i) const;
  double v_value(std::size_t i) const;

  // Q_ij for any i, j.
  double entry(std::size_t i, std::size_t j) const;
  // u_i / u_j.
  double u_ratio(std::size_t i, std::size_t j) const;

  // Principal restriction to the strictly increasing index set S.
  FactorizableSpec restrict(std::span<const std::size_t> S) const;

  // Lazily evaluated, cached Assumption check (see check_assumption_scalar).
  const AssumptionReport& assumption() const;

 private:
  Vector u_;
  Vector v_;
  std::vector<int> k_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

// Block factorizable matrix: Q_[ij] = U_i V_j^T for i <= j, Q_[ji] = Q_[ij]^T.
class BlockFactorizableSpec {
 public:
  BlockFactorizableSpec(std::vector<Matrix> U, std::vector<Matrix> V);

  static BlockFactorizableSpec from_scalar(const FactorizableSpec& s);

  std::size_t n() const { return U_.size(); }
  std::size_t d() const { return d_; }
  const std::vector<Matrix>& U() const { return U_; }
  const std::vector<Matrix>& V() const { return V_; }
  const Matrix& U_inverse(std::size_t i) const { return U_inv_[i]; }

  // Q_[ij] for any i, j (d x d).
  Matrix block(std::size_t i, std::size_t j) const;

  BlockFactorizableSpec restrict(std::span<const std::size_t> S) const;

  const AssumptionReport& assumption() const;

 private:
  std::vector<Matrix> U_;
  std::vector<Matrix> V_;
  std::vector<Matrix> U_inv_;
  std::size_t d_ = 0;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

AssumptionReport check_assumption_scalar(const FactorizableSpec& spec);
AssumptionReport check_assumption_block(const BlockFactorizableSpec& spec);

Matrix materialize(const FactorizableSpec& spec);
Matrix materialize(const BlockFactorizableSpec& spec);

// Per-arc quantities for the arc i -> j (0-based, j == n is the terminal).
// theta = u_i/u_j (zero for the terminal), delta = 1/(Q_ii - theta Q_ij).
struct ScalarArc {
  double theta = 0.0;
  double delta = 0.0;
};
ScalarArc scalar_arc(const FactorizableSpec& spec, std::size_t i, std::size_t j);

// Block analogue: theta = U_i U_j^-1 (zero for the terminal),
// schur = Q_[ii] - theta Q_[ij]^T (symmetrized), delta = schur^-1.
struct BlockArc {
  Matrix theta;
  Matrix schur;
  Matrix delta;
};
BlockArc block_arc(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j);

struct RankTerm {
  std::size_t from = 0;  // 0-based index i
  std::size_t to = 0;    // 0-based index j, or n for the terminal
  Matrix weight;         // delta (1x1) or Delta (d x d)
  Matrix direction;      // theta (1x1) or Theta (d x d); zero for the terminal
};

struct RankDecomposition {
  std::vector<RankTerm> terms;
  Matrix assembled;  // tridiagonal (block tridiagonal) inverse
};

RankDecomposition inverse_decomposition(const FactorizableSpec& spec);
RankDecomposition inverse_decomposition(const BlockFactorizableSpec& spec);

// Zero-padded inverse of the principal (block) submatrix on S (0-based,
// strictly increasing). Empty S gives the zero matrix.
Matrix submatrix_inverse(const FactorizableSpec& spec, std::span<const std::size_t> S);
Matrix submatrix_inverse(const BlockFactorizableSpec& spec, std::span<const std::size_t> S);

// Dense, zero-padded rank-one (rank-d) matrix of the arc i -> j.
Matrix lambda_matrix(const FactorizableSpec& spec, std::size_t i, std::size_t j);
Matrix lambda_matrix(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j);

// Factor with Phi Phi^T = lambda_matrix(spec, i, j); n x 1 or dn x d.
Matrix phi_factor(const FactorizableSpec& spec, std::size_t i, std::size_t j);
Matrix phi_factor(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j);

// Compact factor of the arc: the nonzero rows of phi_factor. Rows [0, d)
// belong to index i and rows [d, 2d) to index j (absent for the terminal).
Matrix phi_compact(const BlockFactorizableSpec& spec, std::size_t i, std::size_t j);

// Triangular table of compact Phi factors for all arcs 0 <= i < j <= n,
// filled once (optionally in parallel; result independent of fill order).
class PhiTable {
 public:
  explicit PhiTable(const BlockFactorizableSpec& spec, unsigned threads = 1);
  const Matrix& at(std::size_t i, std::size_t j) const;
  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<Matrix> table_;
  std::size_t slot(std::size_t i, std::size_t j) const;
};

// Throws AssumptionError carrying the report text when the check fails.
void require_assumption(const FactorizableSpec& spec);
void require_assumption(const BlockFactorizableSpec& spec);

// Validates a 0-based strictly increasing index set against n.
void validate_support(std::span<const std::size_t> S, std::size_t n);

}  // namespace mpmiqp
