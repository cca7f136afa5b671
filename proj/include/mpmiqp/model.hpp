#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpmiqp/linalg.hpp"
#include "mpmiqp/projection.hpp"
#include "mpmiqp/spp.hpp"

namespace mpmiqp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };
enum class Sense { le, eq, ge };
enum class ModelKind { conic, quadratic };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = -kInf;
  double upper = kInf;
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct Term {
  std::size_t var = 0;  // index into Model::variables
  double coef = 0.0;
  friend bool operator==(const Term&, const Term&) = default;
};

struct LinearRow {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::eq;
  double rhs = 0.0;
  friend bool operator==(const LinearRow&, const LinearRow&) = default;
};

// ||h||^2 <= t * w with t, w >= 0.
struct RotatedCone {
  std::size_t t = 0;
  std::size_t w = 0;
  std::vector<std::size_t> h;
  friend bool operator==(const RotatedCone&, const RotatedCone&) = default;
};

// z = 0 implies every listed variable is zero.
struct Indicator {
  std::size_t z = 0;
  std::vector<std::size_t> implied_zero;
  friend bool operator==(const Indicator&, const Indicator&) = default;
};

// v^T Q v over the listed variables (no 1/2 factor).
struct QuadraticTerm {
  std::vector<std::size_t> vars;
  Matrix matrix;
  friend bool operator==(const QuadraticTerm&, const QuadraticTerm&) = default;
};

struct Objective {
  std::vector<Term> linear;
  double constant = 0.0;
  std::optional<QuadraticTerm> quadratic;
  friend bool operator==(const Objective&, const Objective&) = default;
};

// Solver-agnostic model: a conic model carries rotated cones and a linear
// objective, a quadratic model a quadratic objective and indicator records.
class Model {
 public:
  ModelKind kind = ModelKind::conic;
  std::vector<Variable> variables;
  Objective objective;
  std::vector<LinearRow> rows;
  std::vector<RotatedCone> cones;
  std::vector<Indicator> indicators;
  std::map<std::string, std::string> meta;

  // Throws InvalidArgumentError on a duplicate name.
  std::size_t add_variable(std::string name, VarKind kind = VarKind::continuous, double lower = -kInf,
                           double upper = kInf);
  // Throws InvalidArgumentError for an unknown name.
  std::size_t index(const std::string& name) const;
  bool has(const std::string& name) const { return lookup_.count(name) != 0; }

  // Rebuilds the name lookup after variables were assigned directly.
  void reindex();
  // Unique names, cone t/w lower bounds >= 0, indices in range, symmetric Q.
  void validate() const;

  friend bool operator==(const Model& a, const Model& b) {
    return a.kind == b.kind && a.variables == b.variables && a.objective == b.objective && a.rows == b.rows &&
           a.cones == b.cones && a.indicators == b.indicators && a.meta == b.meta;
  }

 private:
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Extra structure appended to a built model. Everything refers to variables
// by name so it can mention x_*, z_* before the model exists.
struct SideConstraints {
  struct Row {
    std::string name;
    std::vector<std::pair<std::string, double>> terms;
    Sense sense = Sense::le;
    double rhs = 0.0;
  };
  struct Cone {
    std::string t;
    std::string w;
    std::vector<std::string> h;
  };
  struct Indicator {
    std::string z;
    std::vector<std::string> implied_zero;
  };
  std::vector<Variable> extra_variables;
  std::vector<Row> rows;
  std::vector<Cone> cones;
  std::vector<Indicator> indicators;
  std::vector<std::pair<std::string, double>> objective_terms;
  std::map<std::string, std::string> meta;
  bool relax_z = false;  // z continuous in [0, 1]
};

// Variable naming (1-based): x_i (d = 1) or x_i_k, z_i, w_i_j over DAG nodes,
// tau_i_j and h_i_j (h_i_j_k when d > 1), tau.
std::string x_name(std::size_t i, std::size_t k, std::size_t d);

Model build_socp(const ProjectedMIQP& m, const SideConstraints& side = {});
Model build_miqp(const ProjectedMIQP& m, const SideConstraints& side = {});

// Replaces indicator records by v - U z <= 0 and v - L z >= 0 using the
// variable bounds. Infinite bounds fall back to +-default_bound when given,
// otherwise InvalidArgumentError is thrown.
Model expand_big_m(const Model& model, std::optional<double> default_bound = std::nullopt);

struct PointReport {
  double max_row_violation = 0.0;
  double max_cone_violation = 0.0;
  double max_bound_violation = 0.0;
  double objective = 0.0;
  double max_violation() const;
};

// Violations are scaled by 1 + the magnitude of the terms involved.
PointReport evaluate_point(const Model& model, const Vector& values);

struct HullReport {
  double max_violation = 0.0;
  double objective_gap = 0.0;  // relative to 1 + |sol.objective|
  bool pass = false;
  Vector point;
};

// Lifts an SPP solution into a model built by build_socp (without side
// constraints) and checks rows, cones, bounds and the objective.
HullReport certify_hull_feasibility(const Model& model, const SppSolution& sol, const ProjectedMIQP& m,
                                    double tol = 1e-8);

struct ModelStats {
  std::size_t continuous = 0;
  std::size_t binary = 0;
  std::size_t cones = 0;
  std::size_t rows = 0;
  std::size_t indicators = 0;
  friend bool operator==(const ModelStats&, const ModelStats&) = default;
};

ModelStats model_stats(const Model& model);

// Canonical JSON ("mpmiqp-model/1"): sorted keys, shortest round-trip
// numbers, compact, one trailing LF. Returns bytes written.
std::size_t write_model(const Model& model, std::ostream& out);
std::string model_to_json(const Model& model);
Model read_model(std::istream& in);
Model model_from_json(const std::string& text);

const char* to_string(Sense s);
const char* to_string(VarKind k);
const char* to_string(ModelKind k);

}  // namespace mpmiqp
