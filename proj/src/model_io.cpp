#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include "json.hpp"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/model.hpp"

namespace mpmiqp {

using nlohmann::json;

namespace {

constexpr const char* kModelSchema = "mpmiqp-model/1";

json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_bound(const json& j, double missing) { return j.is_null() ? missing : j.get<double>(); }

Sense parse_sense(const std::string& s) {
  if (s == "<=") return Sense::le;
  if (s == "=") return Sense::eq;
  if (s == ">=") return Sense::ge;
  throw InvalidArgumentError("unknown row sense " + s);
}

json terms_json(const Model& m, const std::vector<Term>& terms) {
  json out = json::array();
  for (const auto& t : terms) out.push_back(json::array({m.variables[t.var].name, t.coef}));
  return out;
}

std::vector<Term> parse_terms(const Model& m, const json& j) {
  std::vector<Term> out;
  for (const auto& t : j) out.push_back({m.index(t.at(0).get<std::string>()), t.at(1).get<double>()});
  return out;
}

json names_json(const Model& m, const std::vector<std::size_t>& vars) {
  json out = json::array();
  for (auto v : vars) out.push_back(m.variables[v].name);
  return out;
}

std::vector<std::size_t> parse_names(const Model& m, const json& j) {
  std::vector<std::size_t> out;
  for (const auto& name : j) out.push_back(m.index(name.get<std::string>()));
  return out;
}

}  // namespace

std::string model_to_json(const Model& model) {
  model.validate();
  json j;
  j["version"] = kModelSchema;
  j["kind"] = to_string(model.kind);

  json vars = json::array();
  for (const auto& v : model.variables) {
    vars.push_back({{"name", v.name}, {"kind", to_string(v.kind)}, {"lower", bound(v.lower)}, {"upper", bound(v.upper)}});
  }
  j["variables"] = std::move(vars);

  json obj;
  obj["linear"] = terms_json(model, model.objective.linear);
  obj["constant"] = model.objective.constant;
  if (model.objective.quadratic) {
    const auto& q = *model.objective.quadratic;
    json rows = json::array();
    for (std::size_t r = 0; r < q.matrix.rows(); ++r) {
      const auto row = q.matrix.row(r);
      rows.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    obj["quadratic"] = {{"vars", names_json(model, q.vars)}, {"matrix", std::move(rows)}};
  }
  j["objective"] = std::move(obj);

  json rows = json::array();
  for (const auto& r : model.rows) {
    rows.push_back({{"name", r.name}, {"terms", terms_json(model, r.terms)}, {"sense", to_string(r.sense)}, {"rhs", r.rhs}});
  }
  j["rows"] = std::move(rows);

  json cones = json::array();
  for (const auto& c : model.cones) {
    cones.push_back({{"t", model.variables[c.t].name}, {"w", model.variables[c.w].name}, {"h", names_json(model, c.h)}});
  }
  j["cones"] = std::move(cones);

  json inds = json::array();
  for (const auto& ind : model.indicators) {
    inds.push_back({{"z", model.variables[ind.z].name}, {"implied_zero", names_json(model, ind.implied_zero)}});
  }
  j["indicators"] = std::move(inds);
  j["meta"] = model.meta;
  return j.dump() + "\n";
}

std::size_t write_model(const Model& model, std::ostream& out) {
  const std::string text = model_to_json(model);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed to write model");
  return text.size();
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("model JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<std::string>() != kModelSchema) {
      throw InvalidArgumentError("unsupported model version " + j.at("version").get<std::string>());
    }
    Model m;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "conic") {
      m.kind = ModelKind::conic;
    } else if (kind == "quadratic") {
      m.kind = ModelKind::quadratic;
    } else {
      throw InvalidArgumentError("unknown model kind " + kind);
    }
    for (const auto& v : j.at("variables")) {
      const auto vk = v.at("kind").get<std::string>();
      if (vk != "continuous" && vk != "binary") throw InvalidArgumentError("unknown variable kind " + vk);
      m.add_variable(v.at("name").get<std::string>(), vk == "binary" ? VarKind::binary : VarKind::continuous,
                     read_bound(v.at("lower"), -kInf), read_bound(v.at("upper"), kInf));
    }
    const auto& obj = j.at("objective");
    m.objective.linear = parse_terms(m, obj.at("linear"));
    m.objective.constant = obj.at("constant").get<double>();
    if (obj.contains("quadratic")) {
      QuadraticTerm q;
      q.vars = parse_names(m, obj["quadratic"].at("vars"));
      const auto& rows = obj["quadratic"].at("matrix");
      q.matrix = Matrix(q.vars.size(), q.vars.size());
      if (rows.size() != q.vars.size()) throw DimensionError("quadratic matrix row count");
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != q.vars.size()) throw DimensionError("quadratic matrix column count");
        for (std::size_t c = 0; c < rows[r].size(); ++c) q.matrix(r, c) = rows[r][c].get<double>();
      }
      m.objective.quadratic = std::move(q);
    }
    for (const auto& r : j.at("rows")) {
      m.rows.push_back({r.at("name").get<std::string>(), parse_terms(m, r.at("terms")),
                        parse_sense(r.at("sense").get<std::string>()), r.at("rhs").get<double>()});
    }
    for (const auto& c : j.at("cones")) {
      m.cones.push_back({m.index(c.at("t").get<std::string>()), m.index(c.at("w").get<std::string>()),
                         parse_names(m, c.at("h"))});
    }
    for (const auto& ind : j.at("indicators")) {
      m.indicators.push_back({m.index(ind.at("z").get<std::string>()), parse_names(m, ind.at("implied_zero"))});
    }
    m.meta = j.at("meta").get<std::map<std::string, std::string>>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("model JSON: ") + e.what());
  }
}

Model read_model(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace mpmiqp
