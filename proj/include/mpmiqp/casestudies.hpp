#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mpmiqp/linalg.hpp"
#include "mpmiqp/model.hpp"
#include "mpmiqp/projection.hpp"

namespace mpmiqp {

// ------------------------------------------------------------ calcium

// Fluorescence trace r_i = s_i + eps_i with s_1 = beta0, s_{i+1} = alpha s_i + x_i,
// spikes x_i ~ Poisson(mu) and eps_i ~ N(0, sigma^2).
struct CalciumInstance {
  std::size_t n = 0;
  double alpha = 0.96;
  double sigma = 0.1;
  double mu = 0.05;
  double lambda = 1.0;
  double beta0 = 1.0;
  Vector r;            // n+1 observations
  Vector true_spikes;  // n
  std::uint64_t seed = 0;
};

CalciumInstance gen_calcium(std::size_t n, double mu, double sigma, double alpha, double lambda, std::uint64_t seed,
                            double beta0 = 1.0);

// Closed forms with p_i = 1/2: u_i = alpha^(n-i),
// v_i = (alpha^(2(n-i+1)) - 1) / (2 alpha^(n-i) (alpha^2 - 1)).
ProjectedMIQP calcium_projected(const CalciumInstance& inst);

// The equivalent raw multi-period problem (p_i = 1/2, f = 0, c_i = lambda).
MultiPeriodProblem calcium_problem(const CalciumInstance& inst);

enum class CalciumVariant { relaxed, original, capacity };

CalciumVariant parse_calcium_variant(const std::string& s);
const char* to_string(CalciumVariant v);

// Capacity data g_i ~ unif{1..5}, h = sum(g) / 2, drawn from the instance seed.
struct CapacityData {
  std::vector<int> g;
  double h = 0.0;
};
CapacityData calcium_capacity(const CalciumInstance& inst);

struct ModelPair {
  Model socp;
  Model miqp;
};

// SOCP: extended formulation on the projected problem (z relaxed for the
// relaxed variant). MIQP: state-space form over s (n+1), x (n), z (n) with
// indicator records z_i -> x_i.
ModelPair calcium_models(const CalciumInstance& inst, CalciumVariant variant);

// ---------------------------------------------------------------- HEV

struct HevInstance {
  std::size_t n = 0;
  std::size_t ds = 2;
  std::size_t dy = 3;
  Matrix P;  // ds x ds, shared by all periods
  Matrix R;  // dy x dy
  std::vector<Vector> r;  // n+1 targets
  Vector b0;
  Matrix A;  // ds x ds
  Matrix G;  // ds x dy
  Vector k;  // ds
  double s_min = -5.0;
  double s_max = 10.0;
  double y_min = -2.3;
  double y_max = 2.3;
  double lambda = 2.0;
  std::uint64_t seed = 0;
};

// Random instance with every parameter rounded to one decimal. Draws for A
// and G are repeated until the rounded A is nonsingular with spectral radius
// <= 1.05 and the rounded G has full row rank.
HevInstance gen_hev(std::size_t n, double lambda, std::uint64_t seed);

// Data needed to append the input, bound and control-cost structure.
struct ControlMap {
  Matrix G;
  Vector k;
  Matrix R;
  double s_min = 0.0, s_max = 0.0, y_min = 0.0, y_max = 0.0;
  // s_i = offset[i] + sum_{tau < i} coef[i][tau] x_tau for i = 0..n.
  std::vector<Vector> offset;
  std::vector<std::vector<Matrix>> coef;
};

MultiPeriodProblem hev_problem(const HevInstance& inst);

struct HevProjection {
  ProjectedMIQP projected;
  ControlMap control;
};

HevProjection hev_projected(const HevInstance& inst);

// Side structure for the projected x-space: y variables, input rows, state
// and control bound rows and perspective cones for y^T R y.
SideConstraints hev_side_constraints(const HevInstance& inst, const ControlMap& control);

// socp: MISOCP on the projected problem. miqp: state-space model over s, y, z;
// with perspective = true the control cost moves into per-period cones.
ModelPair hev_models(const HevInstance& inst, bool perspective);

// Spectral radius of a real 2 x 2 matrix.
double spectral_radius_2x2(const Matrix& a);

}  // namespace mpmiqp
