#include "mpmiqp/instance_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "mpmiqp/errors.hpp"

namespace mpmiqp {

using nlohmann::json;

namespace {

constexpr const char* kInstanceSchema = "mpmiqp-instance/1";

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix parse_matrix(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw DimensionError("ragged matrix in instance");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

json matrices_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_json(m));
  return out;
}

std::vector<Matrix> parse_matrices(const json& j) {
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(parse_matrix(m));
  return out;
}

json vectors_json(const std::vector<Vector>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(v);
  return out;
}

std::vector<Vector> parse_vectors(const json& j) { return j.get<std::vector<Vector>>(); }

json spec_json(const CostSpec& spec) {
  json j;
  if (const auto* s = std::get_if<FactorizableSpec>(&spec)) {
    j["n"] = s->n();
    j["d"] = 1;
    j["u"] = s->u();
    j["v"] = s->v();
    if (s->scaled()) j["scale_exp"] = s->scale_exp();
  } else {
    const auto& b = std::get<BlockFactorizableSpec>(spec);
    j["n"] = b.n();
    j["d"] = b.d();
    j["U"] = matrices_json(b.U());
    j["V"] = matrices_json(b.V());
  }
  return j;
}

CostSpec parse_spec(const json& j) {
  if (j.contains("U")) return BlockFactorizableSpec(parse_matrices(j.at("U")), parse_matrices(j.at("V")));
  std::vector<int> k;
  if (j.contains("scale_exp")) k = j.at("scale_exp").get<std::vector<int>>();
  FactorizableSpec s(j.at("u").get<Vector>(), j.at("v").get<Vector>(), std::move(k));
  if (j.contains("n") && j.at("n").get<std::size_t>() != s.n()) throw DimensionError("spec: n does not match u");
  return s;
}

json to_json_value(const CalciumInstance& c) {
  return {{"kind", "calcium"}, {"n", c.n},         {"alpha", c.alpha}, {"sigma", c.sigma},
          {"mu", c.mu},        {"lambda", c.lambda}, {"beta0", c.beta0}, {"r", c.r},
          {"true_spikes", c.true_spikes}, {"seed", c.seed}};
}

json to_json_value(const HevInstance& h) {
  return {{"kind", "hev"},
          {"n", h.n},
          {"ds", h.ds},
          {"dy", h.dy},
          {"P", matrix_json(h.P)},
          {"R", matrix_json(h.R)},
          {"r", vectors_json(h.r)},
          {"b0", h.b0},
          {"A", matrix_json(h.A)},
          {"G", matrix_json(h.G)},
          {"k", h.k},
          {"s_min", h.s_min},
          {"s_max", h.s_max},
          {"y_min", h.y_min},
          {"y_max", h.y_max},
          {"lambda", h.lambda},
          {"seed", h.seed}};
}

json to_json_value(const ProjectedMIQP& m) {
  json j = spec_json(m.spec);
  j["kind"] = "raw-projected";
  j["a"] = m.a;
  j["c"] = m.c;
  j["constant"] = m.constant;
  return j;
}

json to_json_value(const MultiPeriodProblem& p) {
  return {{"kind", "raw-multiperiod"}, {"n", p.n},  {"d", p.d}, {"P", matrices_json(p.P)}, {"A", matrices_json(p.A)},
          {"r", vectors_json(p.r)},    {"f", vectors_json(p.f)}, {"b", vectors_json(p.b)}, {"c", p.c}};
}

CalciumInstance parse_calcium(const json& j) {
  CalciumInstance c;
  c.n = j.at("n").get<std::size_t>();
  c.alpha = j.at("alpha").get<double>();
  c.sigma = j.value("sigma", 0.0);
  c.mu = j.value("mu", 0.0);
  c.lambda = j.at("lambda").get<double>();
  c.beta0 = j.value("beta0", 1.0);
  c.r = j.at("r").get<Vector>();
  c.true_spikes = j.value("true_spikes", Vector{});
  c.seed = j.value("seed", std::uint64_t{0});
  if (c.r.size() != c.n + 1) throw DimensionError("calcium: r must have n+1 entries");
  return c;
}

HevInstance parse_hev(const json& j) {
  HevInstance h;
  h.n = j.at("n").get<std::size_t>();
  h.ds = j.at("ds").get<std::size_t>();
  h.dy = j.at("dy").get<std::size_t>();
  h.P = parse_matrix(j.at("P"));
  h.R = parse_matrix(j.at("R"));
  h.r = parse_vectors(j.at("r"));
  h.b0 = j.at("b0").get<Vector>();
  h.A = parse_matrix(j.at("A"));
  h.G = parse_matrix(j.at("G"));
  h.k = j.at("k").get<Vector>();
  h.s_min = j.at("s_min").get<double>();
  h.s_max = j.at("s_max").get<double>();
  h.y_min = j.at("y_min").get<double>();
  h.y_max = j.at("y_max").get<double>();
  h.lambda = j.at("lambda").get<double>();
  h.seed = j.value("seed", std::uint64_t{0});
  if (h.r.size() != h.n + 1 || h.P.rows() != h.ds || h.A.rows() != h.ds || h.G.rows() != h.ds ||
      h.G.cols() != h.dy || h.R.rows() != h.dy || h.k.size() != h.ds || h.b0.size() != h.ds)
    throw DimensionError("hev: inconsistent dimensions");
  return h;
}

MultiPeriodProblem parse_multiperiod(const json& j) {
  MultiPeriodProblem p;
  p.n = j.at("n").get<std::size_t>();
  p.d = j.at("d").get<std::size_t>();
  p.P = parse_matrices(j.at("P"));
  p.A = parse_matrices(j.at("A"));
  p.r = parse_vectors(j.at("r"));
  p.f = j.contains("f") ? parse_vectors(j.at("f")) : std::vector<Vector>(p.n, Vector(p.d, 0.0));
  p.b = parse_vectors(j.at("b"));
  p.c = j.at("c").get<Vector>();
  p.validate();
  return p;
}

}  // namespace

const char* instance_kind(const Instance& inst) {
  switch (inst.index()) {
    case 0: return "calcium";
    case 1: return "hev";
    case 2: return "raw-projected";
    default: return "raw-multiperiod";
  }
}

std::size_t instance_n(const Instance& inst) {
  return std::visit([](const auto& v) { return v.n; }, inst);
}

std::string instance_to_json(const Instance& inst) {
  json j = std::visit([](const auto& v) { return to_json_value(v); }, inst);
  j["version"] = kInstanceSchema;
  return j.dump() + "\n";
}

Instance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("instance JSON: ") + e.what());
  }
  try {
    if (j.value("version", std::string(kInstanceSchema)) != kInstanceSchema)
      throw InvalidArgumentError("unsupported instance version " + j.at("version").get<std::string>());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "calcium") return parse_calcium(j);
    if (kind == "hev") return parse_hev(j);
    if (kind == "raw-multiperiod") return parse_multiperiod(j);
    if (kind == "raw-projected") {
      return ProjectedMIQP::make(parse_spec(j), j.at("a").get<Vector>(), j.at("c").get<Vector>(),
                                 j.value("constant", 0.0));
    }
    throw InvalidArgumentError("unknown instance kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("instance JSON: ") + e.what());
  }
}

void write_instance(const Instance& inst, std::ostream& out) {
  out << instance_to_json(inst);
  if (!out) throw Error("failed to write instance");
}

Instance read_instance(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return instance_from_json(text);
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgumentError("cannot open instance file " + path);
  return read_instance(in);
}

ProjectedMIQP to_projected(const Instance& inst) {
  switch (inst.index()) {
    case 0: return calcium_projected(std::get<CalciumInstance>(inst));
    case 1: return hev_projected(std::get<HevInstance>(inst)).projected;
    case 2: return std::get<ProjectedMIQP>(inst);
    default: return project(std::get<MultiPeriodProblem>(inst));
  }
}

std::string spec_to_json(const CostSpec& spec) { return spec_json(spec).dump() + "\n"; }

CostSpec spec_from_json(const std::string& text) {
  try {
    return parse_spec(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("spec JSON: ") + e.what());
  }
}

}  // namespace mpmiqp
