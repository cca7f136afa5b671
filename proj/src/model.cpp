#include "mpmiqp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <thread>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

namespace {

std::string idx(std::size_t i) { return std::to_string(i); }

std::string pair_name(const char* prefix, std::size_t i, std::size_t j) {
  return std::string(prefix) + "_" + idx(i) + "_" + idx(j);
}

std::string h_name(std::size_t i, std::size_t j, std::size_t k, std::size_t d) {
  return d == 1 ? pair_name("h", i, j) : pair_name("h", i, j) + "_" + idx(k + 1);
}

void append_side(Model& md, const SideConstraints& side) {
  for (const auto& v : side.extra_variables) md.add_variable(v.name, v.kind, v.lower, v.upper);
  for (const auto& r : side.rows) {
    LinearRow row{r.name, {}, r.sense, r.rhs};
    for (const auto& [name, coef] : r.terms) row.terms.push_back({md.index(name), coef});
    md.rows.push_back(std::move(row));
  }
  for (const auto& c : side.cones) {
    RotatedCone cone{md.index(c.t), md.index(c.w), {}};
    for (const auto& h : c.h) cone.h.push_back(md.index(h));
    md.cones.push_back(std::move(cone));
  }
  for (const auto& ind : side.indicators) {
    Indicator rec{md.index(ind.z), {}};
    for (const auto& v : ind.implied_zero) rec.implied_zero.push_back(md.index(v));
    md.indicators.push_back(std::move(rec));
  }
  for (const auto& [name, coef] : side.objective_terms) md.objective.linear.push_back({md.index(name), coef});
  for (const auto& [k, v] : side.meta) md.meta[k] = v;
}

void add_xz(Model& md, const ProjectedMIQP& m, bool relax_z) {
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t k = 0; k < m.d; ++k) md.add_variable(x_name(i, k, m.d));
  for (std::size_t i = 0; i < m.n; ++i)
    md.add_variable("z_" + idx(i + 1), relax_z ? VarKind::continuous : VarKind::binary, 0.0, 1.0);
}

void add_common_objective(Model& md, const ProjectedMIQP& m) {
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t k = 0; k < m.d; ++k) md.objective.linear.push_back({md.index(x_name(i, k, m.d)), m.a[i * m.d + k]});
  for (std::size_t i = 0; i < m.n; ++i) md.objective.linear.push_back({md.index("z_" + idx(i + 1)), m.c[i]});
  md.objective.constant = m.constant;
}

void base_meta(Model& md, const ProjectedMIQP& m, const char* formulation) {
  md.meta["schema"] = "mpmiqp-model/1";
  md.meta["formulation"] = formulation;
  md.meta["n"] = idx(m.n);
  md.meta["d"] = idx(m.d);
}

// Compact factor of arc (i, j) over DAG nodes 1 <= i < j <= n+1: rows [0, d)
// act on period i, rows [d, 2d) on period j (absent when j is the sink).
Matrix compact_phi(const ProjectedMIQP& m, std::size_t i, std::size_t j) {
  if (m.scalar()) {
    const ScalarArc arc = scalar_arc(m.scalar_spec(), i - 1, j - 1);
    const double root = std::sqrt(arc.delta);
    if (j == m.n + 1) return Matrix(1, 1, root);
    return Matrix(2, 1, std::vector<double>{root, -arc.theta * root});
  }
  return phi_compact(m.block_spec(), i - 1, j - 1);
}

}  // namespace

const char* to_string(Sense s) {
  switch (s) {
    case Sense::le: return "<=";
    case Sense::eq: return "=";
    case Sense::ge: return ">=";
  }
  return "?";
}

const char* to_string(VarKind k) { return k == VarKind::binary ? "binary" : "continuous"; }
const char* to_string(ModelKind k) { return k == ModelKind::conic ? "conic" : "quadratic"; }

std::string x_name(std::size_t i, std::size_t k, std::size_t d) {
  return d == 1 ? "x_" + idx(i + 1) : "x_" + idx(i + 1) + "_" + idx(k + 1);
}

std::size_t Model::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (lookup_.count(name)) throw InvalidArgumentError("duplicate variable name " + name);
  lookup_.emplace(name, variables.size());
  variables.push_back({std::move(name), kind, lower, upper});
  return variables.size() - 1;
}

std::size_t Model::index(const std::string& name) const {
  const auto it = lookup_.find(name);
  if (it == lookup_.end()) throw InvalidArgumentError("unknown variable " + name);
  return it->second;
}

void Model::reindex() {
  lookup_.clear();
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (!lookup_.emplace(variables[i].name, i).second) {
      throw InvalidArgumentError("duplicate variable name " + variables[i].name);
    }
  }
}

void Model::validate() const {
  std::set<std::string> names;
  for (const auto& v : variables) {
    if (!names.insert(v.name).second) throw InvalidArgumentError("duplicate variable name " + v.name);
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw InvalidArgumentError("invalid bounds on " + v.name);
    }
  }
  const std::size_t nv = variables.size();
  auto check = [nv](std::size_t i) {
    if (i >= nv) throw InvalidArgumentError("variable index out of range");
  };
  for (const auto& r : rows)
    for (const auto& t : r.terms) check(t.var);
  for (const auto& t : objective.linear) check(t.var);
  for (const auto& c : cones) {
    check(c.t);
    check(c.w);
    for (auto h : c.h) check(h);
    if (variables[c.t].lower < 0.0 || variables[c.w].lower < 0.0) {
      throw InvalidArgumentError("cone variables " + variables[c.t].name + ", " + variables[c.w].name +
                                 " need lower bound >= 0");
    }
  }
  for (const auto& ind : indicators) {
    check(ind.z);
    for (auto v : ind.implied_zero) check(v);
  }
  if (objective.quadratic) {
    const auto& q = *objective.quadratic;
    for (auto v : q.vars) check(v);
    if (q.matrix.rows() != q.vars.size() || q.matrix.cols() != q.vars.size()) {
      throw DimensionError("quadratic objective shape mismatch");
    }
    if (asymmetry(q.matrix) > 0.0) throw AsymmetricMatrixError("quadratic objective is not symmetric");
  }
}

Model build_socp(const ProjectedMIQP& m, const SideConstraints& side) {
  require_assumption(m.spec);
  const std::size_t n = m.n, d = m.d;
  Model md;
  md.kind = ModelKind::conic;
  base_meta(md, m, "socp");

  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n + 1; ++j) md.add_variable(pair_name("w", i, j), VarKind::continuous, 0.0, kInf);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n + 1; ++j) md.add_variable(pair_name("tau", i, j), VarKind::continuous, 0.0, kInf);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n + 1; ++j)
      for (std::size_t k = 0; k < d; ++k) md.add_variable(h_name(i, j, k, d));
  add_xz(md, m, side.relax_z);
  const std::size_t tau = md.add_variable("tau", VarKind::continuous, 0.0, kInf);

  // Flow balance at every DAG node.
  for (std::size_t v = 0; v <= n + 1; ++v) {
    LinearRow row{"flow_" + idx(v), {}, Sense::eq, v == 0 ? 1.0 : (v == n + 1 ? -1.0 : 0.0)};
    for (std::size_t i = 0; i < v; ++i) row.terms.push_back({md.index(pair_name("w", i, v)), -1.0});
    for (std::size_t j = v + 1; j <= n + 1; ++j) row.terms.push_back({md.index(pair_name("w", v, j)), 1.0});
    md.rows.push_back(std::move(row));
  }
  // z_l equals the flow entering node l.
  for (std::size_t l = 1; l <= n; ++l) {
    LinearRow row{"link_" + idx(l), {{md.index("z_" + idx(l)), 1.0}}, Sense::eq, 0.0};
    for (std::size_t i = 0; i < l; ++i) row.terms.push_back({md.index(pair_name("w", i, l)), -1.0});
    md.rows.push_back(std::move(row));
  }
  {
    LinearRow row{"tau_sum", {{tau, 1.0}}, Sense::ge, 0.0};
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = i + 1; j <= n + 1; ++j) row.terms.push_back({md.index(pair_name("tau", i, j)), -1.0});
    md.rows.push_back(std::move(row));
  }

  // sum_{(i,j)} Phi_ij h_ij = x, one row per component of x.
  std::vector<LinearRow> phi_rows(n * d);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t k = 0; k < d; ++k) phi_rows[p * d + k] = {"phi_" + x_name(p, k, d).substr(2), {}, Sense::eq, 0.0};
  std::optional<PhiTable> table;
  if (!m.scalar()) table.emplace(m.block_spec());
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n + 1; ++j) {
      const Matrix phi = m.scalar() ? compact_phi(m, i, j) : table->at(i - 1, j - 1);
      for (std::size_t c = 0; c < d; ++c) {
        const std::size_t hv = md.index(h_name(i, j, c, d));
        for (std::size_t k = 0; k < d; ++k) {
          if (phi(k, c) != 0.0) phi_rows[(i - 1) * d + k].terms.push_back({hv, phi(k, c)});
          if (j <= n && phi(d + k, c) != 0.0) phi_rows[(j - 1) * d + k].terms.push_back({hv, phi(d + k, c)});
        }
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t k = 0; k < d; ++k) {
      auto& row = phi_rows[p * d + k];
      row.terms.push_back({md.index(x_name(p, k, d)), -1.0});
      md.rows.push_back(std::move(row));
    }
  }

  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n + 1; ++j) {
      RotatedCone cone{md.index(pair_name("tau", i, j)), md.index(pair_name("w", i, j)), {}};
      for (std::size_t k = 0; k < d; ++k) cone.h.push_back(md.index(h_name(i, j, k, d)));
      md.cones.push_back(std::move(cone));
    }
  }

  md.objective.linear.push_back({tau, 1.0});
  add_common_objective(md, m);
  if (side.relax_z) md.meta["relaxed"] = "true";
  append_side(md, side);
  md.validate();
  return md;
}

Model build_miqp(const ProjectedMIQP& m, const SideConstraints& side) {
  const std::size_t n = m.n, d = m.d;
  Model md;
  md.kind = ModelKind::quadratic;
  base_meta(md, m, "miqp");
  add_xz(md, m, side.relax_z);

  QuadraticTerm q;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) q.vars.push_back(md.index(x_name(i, k, d)));
  q.matrix = materialize(m.spec);
  md.objective.quadratic = std::move(q);
  add_common_objective(md, m);

  for (std::size_t i = 0; i < n; ++i) {
    Indicator ind{md.index("z_" + idx(i + 1)), {}};
    for (std::size_t k = 0; k < d; ++k) ind.implied_zero.push_back(md.index(x_name(i, k, d)));
    md.indicators.push_back(std::move(ind));
  }
  if (side.relax_z) md.meta["relaxed"] = "true";
  append_side(md, side);
  md.validate();
  return md;
}

Model expand_big_m(const Model& model, std::optional<double> default_bound) {
  Model out = model;
  out.indicators.clear();
  for (const auto& ind : model.indicators) {
    for (std::size_t v : ind.implied_zero) {
      const Variable& var = model.variables[v];
      double lo = var.lower, hi = var.upper;
      if (default_bound) {
        if (!std::isfinite(lo)) lo = -*default_bound;
        if (!std::isfinite(hi)) hi = *default_bound;
      }
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw InvalidArgumentError("big-M expansion needs finite bounds on " + var.name);
      }
      out.rows.push_back({"bigm_up_" + var.name, {{v, 1.0}, {ind.z, -hi}}, Sense::le, 0.0});
      out.rows.push_back({"bigm_lo_" + var.name, {{v, 1.0}, {ind.z, -lo}}, Sense::ge, 0.0});
    }
  }
  out.meta["indicator_encoding"] = "big-m";
  return out;
}

double PointReport::max_violation() const {
  return std::max({max_row_violation, max_cone_violation, max_bound_violation});
}

PointReport evaluate_point(const Model& model, const Vector& values) {
  if (values.size() != model.variables.size()) throw DimensionError("point has wrong length");
  PointReport rep;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& v = model.variables[i];
    const double over = std::max({v.lower - values[i], values[i] - v.upper, 0.0});
    rep.max_bound_violation = std::max(rep.max_bound_violation, over / (1.0 + std::abs(values[i])));
  }
  for (const auto& row : model.rows) {
    long double lhs = 0.0L, mag = 1.0L + std::fabs(row.rhs);
    for (const auto& t : row.terms) {
      const long double term = static_cast<long double>(t.coef) * values[t.var];
      lhs += term;
      mag += std::fabs(term);
    }
    long double gap = lhs - row.rhs;
    if (row.sense == Sense::le) gap = std::max(gap, 0.0L);
    if (row.sense == Sense::ge) gap = std::max(-gap, 0.0L);
    rep.max_row_violation = std::max(rep.max_row_violation, static_cast<double>(std::fabs(gap) / mag));
  }
  for (const auto& c : model.cones) {
    long double hh = 0.0L;
    for (auto h : c.h) hh += static_cast<long double>(values[h]) * values[h];
    const long double tw = static_cast<long double>(values[c.t]) * values[c.w];
    const long double gap = std::max(hh - tw, 0.0L) / (1.0L + hh + std::fabs(tw));
    rep.max_cone_violation = std::max(rep.max_cone_violation, static_cast<double>(gap));
  }
  long double obj = model.objective.constant;
  for (const auto& t : model.objective.linear) obj += static_cast<long double>(t.coef) * values[t.var];
  if (model.objective.quadratic) {
    const auto& q = *model.objective.quadratic;
    Vector sub(q.vars.size());
    for (std::size_t k = 0; k < q.vars.size(); ++k) sub[k] = values[q.vars[k]];
    obj += dot(sub, mat_vec(q.matrix, sub));
  }
  rep.objective = static_cast<double>(obj);
  return rep;
}

HullReport certify_hull_feasibility(const Model& model, const SppSolution& sol, const ProjectedMIQP& m, double tol) {
  const std::size_t n = m.n, d = m.d;
  Vector point(model.variables.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) point[model.index(x_name(i, k, d))] = sol.x[i * d + k];
    point[model.index("z_" + idx(i + 1))] = sol.z[i];
  }
  long double tau = 0.0L;
  for (std::size_t t = 0; t + 1 < sol.path.size(); ++t) {
    const std::size_t i = sol.path[t], j = sol.path[t + 1];
    point[model.index(pair_name("w", i, j))] = 1.0;
    if (i == 0) continue;
    // h = -1/2 Phi^T a restricted to the arc's periods.
    const Matrix phi = compact_phi(m, i, j);
    Vector local(phi.rows());
    for (std::size_t k = 0; k < d; ++k) {
      local[k] = m.a[(i - 1) * d + k];
      if (j <= n) local[d + k] = m.a[(j - 1) * d + k];
    }
    const Vector h = mat_tvec(phi, local);
    long double hh = 0.0L;
    for (std::size_t k = 0; k < d; ++k) {
      const double hv = -0.5 * h[k];
      point[model.index(h_name(i, j, k, d))] = hv;
      hh += static_cast<long double>(hv) * hv;
    }
    point[model.index(pair_name("tau", i, j))] = static_cast<double>(hh);
    tau += hh;
  }
  point[model.index("tau")] = static_cast<double>(tau);

  const PointReport rep = evaluate_point(model, point);
  HullReport out;
  out.max_violation = rep.max_violation();
  out.objective_gap = std::abs(rep.objective - sol.objective) / (1.0 + std::abs(sol.objective));
  out.pass = out.max_violation <= tol && out.objective_gap <= tol;
  out.point = std::move(point);
  return out;
}

ModelStats model_stats(const Model& model) {
  ModelStats s;
  for (const auto& v : model.variables) (v.kind == VarKind::binary ? s.binary : s.continuous)++;
  s.cones = model.cones.size();
  s.rows = model.rows.size();
  s.indicators = model.indicators.size();
  return s;
}

}  // namespace mpmiqp
