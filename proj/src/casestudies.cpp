#include "mpmiqp/casestudies.hpp"

#include <cmath>
#include <string>

#include "mpmiqp/errors.hpp"
#include "mpmiqp/rng.hpp"

namespace mpmiqp {

namespace {

std::string idx(std::size_t i) { return std::to_string(i); }

double round1(double v) {
  const double r = std::round(v * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

Matrix round1(Matrix m) {
  for (double& v : m.data()) v = round1(v);
  return m;
}

}  // namespace

// ------------------------------------------------------------ calcium

CalciumInstance gen_calcium(std::size_t n, double mu, double sigma, double alpha, double lambda, std::uint64_t seed,
                            double beta0) {
  if (n == 0) throw InvalidArgumentError("calcium: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgumentError("calcium: alpha must lie in (0, 1)");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgumentError("calcium: sigma must be >= 0");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgumentError("calcium: mu must be >= 0");
  if (!std::isfinite(lambda) || !std::isfinite(beta0)) throw InvalidArgumentError("calcium: non-finite parameter");

  CalciumInstance inst;
  inst.n = n;
  inst.alpha = alpha;
  inst.sigma = sigma;
  inst.mu = mu;
  inst.lambda = lambda;
  inst.beta0 = beta0;
  inst.seed = seed;

  RandomStream spikes(seed, "calcium.spikes");
  RandomStream noise(seed, "calcium.noise");
  inst.true_spikes.resize(n);
  for (std::size_t i = 0; i < n; ++i) inst.true_spikes[i] = static_cast<double>(spikes.poisson(mu));
  inst.r.resize(n + 1);
  double s = beta0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double eps = sigma > 0.0 ? sigma * noise.normal() : 0.0;
    inst.r[i] = s + eps;
    if (i < n) s = alpha * s + inst.true_spikes[i];
  }
  return inst;
}

ProjectedMIQP calcium_projected(const CalciumInstance& inst) {
  const std::size_t n = inst.n;
  const double alpha = inst.alpha;
  if (n == 0 || inst.r.size() != n + 1) throw DimensionError("calcium instance needs n+1 observations");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgumentError("calcium: alpha must lie in (0, 1)");

  // u_i = alpha^(n-i) as mantissa * 2^k.
  Vector um(n), vm(n);
  std::vector<int> k(n, 0);
  um[n - 1] = 1.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    int e = 0;
    um[i] = std::frexp(alpha * um[i + 1], &e);
    k[i] = k[i + 1] + e;
  }
  const double a2 = alpha * alpha;
  for (std::size_t i = 0; i < n; ++i) {
    const double num = std::pow(alpha, 2.0 * static_cast<double>(n - i)) - 1.0;
    vm[i] = num / (2.0 * (a2 - 1.0) * um[i]);
  }

  // g_t = alpha^(t-1) beta0 - r_t; a_n = g_{n+1}, a_i = g_{i+1} + alpha a_{i+1}.
  Vector g(n + 1);
  double decay = inst.beta0;
  long double constant = 0.0L;
  for (std::size_t t = 0; t <= n; ++t) {
    g[t] = decay - inst.r[t];
    constant += 0.5L * g[t] * g[t];
    decay *= alpha;
  }
  Vector a(n);
  a[n - 1] = g[n];
  for (std::size_t i = n - 1; i-- > 0;) a[i] = g[i + 1] + alpha * a[i + 1];

  return ProjectedMIQP::make(fold_scale(std::move(um), std::move(vm), std::move(k)), std::move(a),
                             Vector(n, inst.lambda), static_cast<double>(constant));
}

MultiPeriodProblem calcium_problem(const CalciumInstance& inst) {
  MultiPeriodProblem p;
  p.n = inst.n;
  p.d = 1;
  p.P.assign(inst.n + 1, Matrix(1, 1, 0.5));
  p.A.assign(inst.n, Matrix(1, 1, inst.alpha));
  for (double v : inst.r) p.r.push_back({v});
  p.f.assign(inst.n, Vector{0.0});
  p.b.assign(inst.n + 1, Vector{0.0});
  p.b[0][0] = inst.beta0;
  p.c.assign(inst.n, inst.lambda);
  return p;
}

CalciumVariant parse_calcium_variant(const std::string& s) {
  if (s == "relaxed") return CalciumVariant::relaxed;
  if (s == "original") return CalciumVariant::original;
  if (s == "capacity") return CalciumVariant::capacity;
  throw InvalidArgumentError("unknown calcium variant '" + s + "' (expected relaxed, original or capacity)");
}

const char* to_string(CalciumVariant v) {
  switch (v) {
    case CalciumVariant::relaxed: return "relaxed";
    case CalciumVariant::original: return "original";
    case CalciumVariant::capacity: return "capacity";
  }
  return "?";
}

CapacityData calcium_capacity(const CalciumInstance& inst) {
  RandomStream rng(inst.seed, "calcium.capacity");
  CapacityData cap;
  long total = 0;
  for (std::size_t i = 0; i < inst.n; ++i) {
    cap.g.push_back(static_cast<int>(rng.uniform_int(1, 5)));
    total += cap.g.back();
  }
  cap.h = 0.5 * static_cast<double>(total);
  return cap;
}

ModelPair calcium_models(const CalciumInstance& inst, CalciumVariant variant) {
  const std::size_t n = inst.n;
  const ProjectedMIQP projected = calcium_projected(inst);

  std::vector<SideConstraints::Row> extra;
  if (variant != CalciumVariant::relaxed) {
    for (std::size_t i = 1; i <= n; ++i) extra.push_back({"nonneg_" + idx(i), {{"x_" + idx(i), 1.0}}, Sense::ge, 0.0});
  }
  if (variant == CalciumVariant::capacity) {
    const CapacityData cap = calcium_capacity(inst);
    SideConstraints::Row row{"capacity", {}, Sense::le, cap.h};
    for (std::size_t i = 1; i <= n; ++i) row.terms.push_back({"z_" + idx(i), static_cast<double>(cap.g[i - 1])});
    extra.push_back(std::move(row));
  }

  SideConstraints side;
  side.rows = extra;
  side.relax_z = variant == CalciumVariant::relaxed;
  side.meta["case"] = "calcium";
  side.meta["variant"] = to_string(variant);

  ModelPair out{build_socp(projected, side), Model{}};

  // State-space MIQP: 1/2 sum (s_i - r_i)^2 + lambda sum z_i.
  Model& md = out.miqp;
  md.kind = ModelKind::quadratic;
  md.meta = {{"schema", "mpmiqp-model/1"}, {"formulation", "miqp"}, {"n", idx(n)}, {"d", "1"},
             {"case", "calcium"}, {"variant", to_string(variant)}};
  for (std::size_t i = 1; i <= n + 1; ++i) md.add_variable("s_" + idx(i));
  for (std::size_t i = 1; i <= n; ++i) md.add_variable("x_" + idx(i));
  for (std::size_t i = 1; i <= n; ++i) md.add_variable("z_" + idx(i), VarKind::binary, 0.0, 1.0);

  md.rows.push_back({"init", {{md.index("s_1"), 1.0}}, Sense::eq, inst.beta0});
  for (std::size_t i = 1; i <= n; ++i) {
    md.rows.push_back({"dyn_" + idx(i),
                       {{md.index("s_" + idx(i + 1)), 1.0}, {md.index("s_" + idx(i)), -inst.alpha},
                        {md.index("x_" + idx(i)), -1.0}},
                       Sense::eq,
                       0.0});
  }
  for (auto& row : extra) {
    LinearRow lr{row.name, {}, row.sense, row.rhs};
    for (const auto& [name, coef] : row.terms) lr.terms.push_back({md.index(name), coef});
    md.rows.push_back(std::move(lr));
  }

  QuadraticTerm q;
  for (std::size_t i = 1; i <= n + 1; ++i) q.vars.push_back(md.index("s_" + idx(i)));
  q.matrix = Matrix::identity(n + 1) * 0.5;
  md.objective.quadratic = std::move(q);
  long double constant = 0.0L;
  for (std::size_t i = 0; i <= n; ++i) {
    md.objective.linear.push_back({md.index("s_" + idx(i + 1)), -inst.r[i]});
    constant += 0.5L * inst.r[i] * inst.r[i];
  }
  for (std::size_t i = 1; i <= n; ++i) md.objective.linear.push_back({md.index("z_" + idx(i)), inst.lambda});
  md.objective.constant = static_cast<double>(constant);
  for (std::size_t i = 1; i <= n; ++i) md.indicators.push_back({md.index("z_" + idx(i)), {md.index("x_" + idx(i))}});
  md.validate();
  return out;
}

// ---------------------------------------------------------------- HEV

double spectral_radius_2x2(const Matrix& a) {
  if (a.rows() != 2 || a.cols() != 2) throw DimensionError("spectral_radius_2x2 needs a 2x2 matrix");
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double disc = tr * tr - 4.0 * det;
  if (disc < 0.0) return std::sqrt(det);  // complex pair, |lambda|^2 = det
  const double root = std::sqrt(disc);
  return std::max(std::abs(0.5 * (tr + root)), std::abs(0.5 * (tr - root)));
}

HevInstance gen_hev(std::size_t n, double lambda, std::uint64_t seed) {
  if (n == 0) throw InvalidArgumentError("hev: n must be >= 1");
  if (!std::isfinite(lambda)) throw InvalidArgumentError("hev: lambda must be finite");
  HevInstance inst;
  inst.n = n;
  inst.lambda = lambda;
  inst.seed = seed;
  const std::size_t ds = inst.ds, dy = inst.dy;

  RandomStream sP(seed, "hev.P"), sR(seed, "hev.r"), sB(seed, "hev.b0"), sA(seed, "hev.A"), sG(seed, "hev.G"),
      sK(seed, "hev.k");

  Matrix pt(ds, ds);
  for (double& v : pt.data()) v = sP.normal();
  inst.P = round1(mat_mul(pt, pt.transpose()) * 0.5 + Matrix::identity(ds) * 0.25);
  inst.R = Matrix::identity(dy) * 0.1;
  for (std::size_t i = 0; i <= n; ++i) {
    Vector ri(ds);
    for (double& v : ri) v = round1(sR.uniform(-2.0, 2.0));
    inst.r.push_back(std::move(ri));
  }
  inst.b0.resize(ds);
  for (double& v : inst.b0) v = round1(sB.uniform(1.0, 3.0));

  for (int attempt = 0;; ++attempt) {
    if (attempt > 10000) throw NumericalError("hev: could not draw an admissible A");
    Matrix at(ds, ds);
    for (double& v : at.data()) v = sA.normal();
    const double rho = spectral_radius_2x2(at);
    if (!(rho > 1e-8)) continue;
    Matrix a = round1(at * (1.0 / rho));
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    if (std::abs(det) < 1e-9 || spectral_radius_2x2(a) > 1.05) continue;
    inst.A = std::move(a);
    break;
  }
  for (int attempt = 0;; ++attempt) {
    if (attempt > 10000) throw NumericalError("hev: could not draw a full-row-rank G");
    Matrix g(ds, dy);
    for (double& v : g.data()) v = round1(sG.normal());
    // Full row rank iff G G^T is nonsingular.
    const Matrix ggt = mat_mul(g, g.transpose());
    const double det = ggt(0, 0) * ggt(1, 1) - ggt(0, 1) * ggt(1, 0);
    if (det < 1e-9) continue;
    inst.G = std::move(g);
    break;
  }
  inst.k.resize(ds);
  for (double& v : inst.k) v = round1(sK.uniform(1.0, 3.0));
  return inst;
}

MultiPeriodProblem hev_problem(const HevInstance& inst) {
  MultiPeriodProblem p;
  p.n = inst.n;
  p.d = inst.ds;
  p.P.assign(inst.n + 1, inst.P);
  p.A.assign(inst.n, inst.A);
  p.r = inst.r;
  p.f.assign(inst.n, Vector(inst.ds, 0.0));
  p.b.assign(inst.n + 1, Vector(inst.ds, 0.0));
  p.b[0] = inst.b0;
  p.c.assign(inst.n, inst.lambda);
  return p;
}

HevProjection hev_projected(const HevInstance& inst) {
  MultiPeriodProblem p = hev_problem(inst);
  ControlMap cm;
  cm.G = inst.G;
  cm.k = inst.k;
  cm.R = inst.R;
  cm.s_min = inst.s_min;
  cm.s_max = inst.s_max;
  cm.y_min = inst.y_min;
  cm.y_max = inst.y_max;

  // Affine state map: s_{i+1} = A_i s_i + x_i + b_i.
  const std::size_t n = inst.n, ds = inst.ds;
  cm.offset.resize(n + 1);
  cm.coef.resize(n + 1);
  cm.offset[0] = p.b[0];
  for (std::size_t i = 0; i < n; ++i) {
    cm.offset[i + 1] = mat_vec(p.A[i], cm.offset[i]);
    for (std::size_t k = 0; k < ds; ++k) cm.offset[i + 1][k] += p.b[i + 1][k];
    for (const Matrix& c : cm.coef[i]) cm.coef[i + 1].push_back(mat_mul(p.A[i], c));
    cm.coef[i + 1].push_back(Matrix::identity(ds));
  }
  return {project(std::move(p)), std::move(cm)};
}

namespace {

std::string y_name(std::size_t i, std::size_t l) { return "y_" + idx(i + 1) + "_" + idx(l + 1); }

bool is_scaled_identity(const Matrix& r) {
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = 0; j < r.cols(); ++j)
      if (r(i, j) != (i == j ? r(0, 0) : 0.0)) return false;
  return r(0, 0) > 0.0;
}

// Appends per-period cones ||R^{1/2} y_i||^2 <= t_i z_i and objective terms;
// returns the number of auxiliary variables added.
void add_perspective(SideConstraints& side, const HevInstance& inst) {
  const std::size_t n = inst.n, dy = inst.dy;
  const bool scalar_r = is_scaled_identity(inst.R);
  Matrix root;
  if (!scalar_r) root = mat_mul(inst.R, sym_inv_sqrt(inst.R));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string t = "t_" + idx(i + 1);
    side.extra_variables.push_back({t, VarKind::continuous, 0.0, kInf});
    SideConstraints::Cone cone{t, "z_" + idx(i + 1), {}};
    if (scalar_r) {
      for (std::size_t l = 0; l < dy; ++l) cone.h.push_back(y_name(i, l));
      side.objective_terms.push_back({t, inst.R(0, 0)});
    } else {
      for (std::size_t l = 0; l < dy; ++l) {
        const std::string q = "ry_" + idx(i + 1) + "_" + idx(l + 1);
        side.extra_variables.push_back({q, VarKind::continuous, -kInf, kInf});
        SideConstraints::Row row{"rootR_" + idx(i + 1) + "_" + idx(l + 1), {{q, 1.0}}, Sense::eq, 0.0};
        for (std::size_t m = 0; m < dy; ++m) row.terms.push_back({y_name(i, m), -root(l, m)});
        side.rows.push_back(std::move(row));
        cone.h.push_back(q);
      }
      side.objective_terms.push_back({t, 1.0});
    }
    side.cones.push_back(std::move(cone));
  }
}

}  // namespace

SideConstraints hev_side_constraints(const HevInstance& inst, const ControlMap& cm) {
  const std::size_t n = inst.n, ds = inst.ds, dy = inst.dy;
  SideConstraints side;
  side.meta["case"] = "hev";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < dy; ++l) side.extra_variables.push_back({y_name(i, l), VarKind::continuous, -kInf, kInf});

  // x_i = G y_i + k z_i.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < ds; ++k) {
      SideConstraints::Row row{"input_" + idx(i + 1) + "_" + idx(k + 1), {{x_name(i, k, ds), 1.0}}, Sense::eq, 0.0};
      for (std::size_t l = 0; l < dy; ++l)
        if (cm.G(k, l) != 0.0) row.terms.push_back({y_name(i, l), -cm.G(k, l)});
      if (cm.k[k] != 0.0) row.terms.push_back({"z_" + idx(i + 1), -cm.k[k]});
      side.rows.push_back(std::move(row));
    }
  }
  // s_min <= offset + sum coef x <= s_max for every state s_1..s_{n+1}.
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = 0; k < ds; ++k) {
      std::vector<std::pair<std::string, double>> terms;
      for (std::size_t tau = 0; tau < cm.coef[i].size(); ++tau)
        for (std::size_t m = 0; m < ds; ++m)
          if (cm.coef[i][tau](k, m) != 0.0) terms.push_back({x_name(tau, m, ds), cm.coef[i][tau](k, m)});
      const std::string tag = idx(i + 1) + "_" + idx(k + 1);
      side.rows.push_back({"smin_" + tag, terms, Sense::ge, cm.s_min - cm.offset[i][k]});
      side.rows.push_back({"smax_" + tag, terms, Sense::le, cm.s_max - cm.offset[i][k]});
    }
  }
  // y_min z_i <= y_i <= y_max z_i.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < dy; ++l) {
      const std::string tag = idx(i + 1) + "_" + idx(l + 1);
      const std::string z = "z_" + idx(i + 1);
      side.rows.push_back({"ymax_" + tag, {{y_name(i, l), 1.0}, {z, -cm.y_max}}, Sense::le, 0.0});
      side.rows.push_back({"ymin_" + tag, {{y_name(i, l), 1.0}, {z, -cm.y_min}}, Sense::ge, 0.0});
    }
  }
  add_perspective(side, inst);
  return side;
}

ModelPair hev_models(const HevInstance& inst, bool perspective) {
  const std::size_t n = inst.n, ds = inst.ds, dy = inst.dy;
  const HevProjection hp = hev_projected(inst);
  ModelPair out{build_socp(hp.projected, hev_side_constraints(inst, hp.control)), Model{}};

  Model& md = out.miqp;
  md.kind = ModelKind::quadratic;
  md.meta = {{"schema", "mpmiqp-model/1"}, {"formulation", perspective ? "miqp-p" : "miqp"}, {"n", idx(n)},
             {"d", idx(ds)}, {"case", "hev"}};
  auto s_name = [](std::size_t i, std::size_t k) { return "s_" + idx(i + 1) + "_" + idx(k + 1); };
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t k = 0; k < ds; ++k) md.add_variable(s_name(i, k), VarKind::continuous, inst.s_min, inst.s_max);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < dy; ++l) md.add_variable(y_name(i, l));
  for (std::size_t i = 0; i < n; ++i) md.add_variable("z_" + idx(i + 1), VarKind::binary, 0.0, 1.0);

  for (std::size_t k = 0; k < ds; ++k) md.rows.push_back({"init_" + idx(k + 1), {{md.index(s_name(0, k)), 1.0}}, Sense::eq, inst.b0[k]});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < ds; ++k) {
      LinearRow row{"dyn_" + idx(i + 1) + "_" + idx(k + 1), {{md.index(s_name(i + 1, k)), 1.0}}, Sense::eq, 0.0};
      for (std::size_t m = 0; m < ds; ++m)
        if (inst.A(k, m) != 0.0) row.terms.push_back({md.index(s_name(i, m)), -inst.A(k, m)});
      for (std::size_t l = 0; l < dy; ++l)
        if (inst.G(k, l) != 0.0) row.terms.push_back({md.index(y_name(i, l)), -inst.G(k, l)});
      if (inst.k[k] != 0.0) row.terms.push_back({md.index("z_" + idx(i + 1)), -inst.k[k]});
      md.rows.push_back(std::move(row));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < dy; ++l) {
      const std::string tag = idx(i + 1) + "_" + idx(l + 1);
      const std::size_t y = md.index(y_name(i, l)), z = md.index("z_" + idx(i + 1));
      md.rows.push_back({"ymax_" + tag, {{y, 1.0}, {z, -inst.y_max}}, Sense::le, 0.0});
      md.rows.push_back({"ymin_" + tag, {{y, 1.0}, {z, -inst.y_min}}, Sense::ge, 0.0});
    }
  }

  // sum (s - r)^T P (s - r) [+ sum y^T R y] + lambda sum z.
  const std::size_t quad_vars = (n + 1) * ds + (perspective ? 0 : n * dy);
  QuadraticTerm q;
  q.matrix = Matrix(quad_vars, quad_vars);
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = 0; k < ds; ++k) q.vars.push_back(md.index(s_name(i, k)));
    q.matrix.set_block(i * ds, i * ds, inst.P);
    const Vector pr = mat_vec(inst.P, inst.r[i]);
    for (std::size_t k = 0; k < ds; ++k) md.objective.linear.push_back({md.index(s_name(i, k)), -2.0 * pr[k]});
    md.objective.constant += dot(inst.r[i], pr);
  }
  if (!perspective) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < dy; ++l) q.vars.push_back(md.index(y_name(i, l)));
      q.matrix.set_block((n + 1) * ds + i * dy, (n + 1) * ds + i * dy, inst.R);
    }
  }
  md.objective.quadratic = std::move(q);
  for (std::size_t i = 0; i < n; ++i) md.objective.linear.push_back({md.index("z_" + idx(i + 1)), inst.lambda});

  if (perspective) {
    SideConstraints side;
    add_perspective(side, inst);
    for (const auto& v : side.extra_variables) md.add_variable(v.name, v.kind, v.lower, v.upper);
    for (const auto& r : side.rows) {
      LinearRow lr{r.name, {}, r.sense, r.rhs};
      for (const auto& [name, coef] : r.terms) lr.terms.push_back({md.index(name), coef});
      md.rows.push_back(std::move(lr));
    }
    for (const auto& c : side.cones) {
      RotatedCone cone{md.index(c.t), md.index(c.w), {}};
      for (const auto& h : c.h) cone.h.push_back(md.index(h));
      md.cones.push_back(std::move(cone));
    }
    for (const auto& [name, coef] : side.objective_terms) md.objective.linear.push_back({md.index(name), coef});
  }
  md.validate();
  return out;
}

}  // namespace mpmiqp
