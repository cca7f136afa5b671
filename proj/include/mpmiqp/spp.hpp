#pragma once

#include <cstddef>
#include <vector>

#include "mpmiqp/linalg.hpp"
#include "mpmiqp/projection.hpp"

namespace mpmiqp {

// Arc costs on the complete DAG over nodes 0..n+1. Node i in 1..n stands for
// period i; node n+1 is the sink.
class ArcCostTable {
 public:
  explicit ArcCostTable(std::size_t n);

  std::size_t n() const { return n_; }
  std::size_t node_count() const { return n_ + 2; }
  double cost(std::size_t i, std::size_t j) const { return cost_[slot(i, j)]; }
  void set(std::size_t i, std::size_t j, double value) { cost_[slot(i, j)] = value; }

 private:
  std::size_t n_;
  std::vector<double> cost_;
  std::size_t slot(std::size_t i, std::size_t j) const;
};

enum class ArcCostMethod {
  compact,          // closed forms on the per-arc 2d x 2d slice
  dense_reference,  // c_i - 1/4 a^T Lambda a with the full padded Lambda (debug)
};

ArcCostTable arc_costs(const ProjectedMIQP& m, ArcCostMethod method = ArcCostMethod::compact,
                       unsigned threads = 1);

struct ShortestPath {
  std::vector<std::size_t> nodes;  // 0 = p_0 < ... < p_k = n+1
  double cost = 0.0;
};

// Forward pass in node order; ties prefer the smallest predecessor index.
ShortestPath shortest_path(const ArcCostTable& t);

struct SppSolution {
  std::vector<std::size_t> path;     // DAG nodes
  std::vector<std::size_t> support;  // 0-based periods
  Vector z;
  Vector x;
  double objective = 0.0;  // includes the projected constant
  double path_cost = 0.0;
};

// Throws NumericalError if the recovered objective disagrees with
// path_cost + constant beyond 1e-9 relative.
SppSolution solve(const ProjectedMIQP& m, unsigned threads = 1);

// x = -1/2 (sum of Lambda over the arcs of the support path) a.
Vector recover_x(const ProjectedMIQP& m, const std::vector<std::size_t>& support);

}  // namespace mpmiqp
