#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/model.hpp"
#include "mpmiqp/random_instances.hpp"
#include "mpmiqp/spp.hpp"
#include "support.hpp"

using namespace mpmiqp;

namespace {
ProjectedMIQP toy() { return ProjectedMIQP::make(FactorizableSpec({1, 1}, {2, 1}), {-2, -2}, {0.5, 0.5}, 0.0); }
}  // namespace

TEST_CASE("socp structure counts") {
  RandomStream rng(61, "model.counts");
  for (std::size_t d : {1, 2}) {
    for (std::size_t n : {1, 3, 7}) {
      const ProjectedMIQP m = random_projected(n, d, rng);
      const Model md = build_socp(m);
      const ModelStats st = model_stats(md);
      const std::size_t pairs = n * (n + 1) / 2;
      CHECK(st.cones == pairs);
      CHECK(st.binary == n);
      CHECK(st.continuous == (n + 1) * (n + 2) / 2 + pairs + d * pairs + d * n + 1);
      CHECK(st.rows == (n + 2) + n + 1 + d * n);
      CHECK(md.meta.at("formulation") == "socp");
    }
  }
  const Model relaxed = build_socp(toy(), SideConstraints{.relax_z = true});
  CHECK(model_stats(relaxed).binary == 0);
}

TEST_CASE("hull witness on the toy instance") {
  const ProjectedMIQP m = toy();
  const Model md = build_socp(m);
  const SppSolution sol = solve(m);
  const HullReport rep = certify_hull_feasibility(md, sol, m, 1e-10);
  CHECK(rep.pass);
  CHECK(rep.max_violation <= 1e-10);
  CHECK(rep.objective_gap <= 1e-10);
  CHECK(rep.point[md.index("w_0_2")] == 1.0);
  CHECK(rep.point[md.index("w_2_3")] == 1.0);
  CHECK(rep.point[md.index("tau")] == doctest::Approx(1.0));

  // Moving x off the witness breaks the Phi link rows.
  Vector bad = rep.point;
  bad[md.index("x_2")] += 0.1;
  CHECK(evaluate_point(md, bad).max_row_violation > 1e-3);
}

TEST_CASE("hull witness on random instances") {
  RandomStream rng(62, "model.hull");
  for (int trial = 0; trial < 30; ++trial) {
    const ProjectedMIQP m = random_projected(2 + trial % 9, 1 + trial % 3, rng);
    const HullReport rep = certify_hull_feasibility(build_socp(m), solve(m), m);
    CHECK(rep.pass);
  }
}

TEST_CASE("miqp carries the dense Q and indicator records") {
  RandomStream rng(63, "model.miqp");
  const ProjectedMIQP m = random_projected(4, 2, rng);
  const Model md = build_miqp(m);
  REQUIRE(md.objective.quadratic);
  CHECK(max_abs_diff(md.objective.quadratic->matrix, materialize(m.spec)) == 0.0);
  CHECK(md.indicators.size() == 4);
  CHECK(md.indicators[0].implied_zero.size() == 2);
  CHECK(model_stats(md).binary == 4);
  // Objective evaluation matches the projected objective.
  Vector x(8), z{1, 0, 1, 1};
  for (std::size_t i = 0; i < 8; ++i) x[i] = z[i / 2] * (0.3 * static_cast<double>(i) - 1.0);
  Vector point(md.variables.size(), 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 2; ++k) point[md.index(x_name(i, k, 2))] = x[i * 2 + k];
    point[md.index("z_" + std::to_string(i + 1))] = z[i];
  }
  const double expected = projected_objective(m, x, z);
  CHECK(evaluate_point(md, point).objective == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("big-M expansion") {
  Model md = build_miqp(toy());
  CHECK_THROWS_AS(expand_big_m(md), InvalidArgumentError);
  const Model bm = expand_big_m(md, 50.0);
  CHECK(bm.indicators.empty());
  CHECK(bm.rows.size() == md.rows.size() + 4);
  CHECK(bm.meta.at("indicator_encoding") == "big-m");
  md.variables[md.index("x_1")].lower = -3.0;
  md.variables[md.index("x_1")].upper = 2.0;
  const Model bounded = expand_big_m(md, 50.0);
  bool found = false;
  for (const auto& r : bounded.rows)
    if (r.name == "bigm_up_x_1") {
      found = true;
      for (const auto& t : r.terms)
        if (t.var == bounded.index("z_1")) CHECK(t.coef == -2.0);
    }
  CHECK(found);
}

TEST_CASE("json round trip is exact and canonical") {
  RandomStream rng(64, "model.json");
  for (std::size_t d : {1, 2}) {
    const ProjectedMIQP m = random_projected(4, d, rng);
    for (const Model& md : {build_socp(m), build_miqp(m), expand_big_m(build_miqp(m), 10.0)}) {
      const std::string text = model_to_json(md);
      CHECK(text.back() == '\n');
      const Model back = model_from_json(text);
      CHECK(back == md);
      CHECK(model_to_json(back) == text);
      std::ostringstream os;
      CHECK(write_model(md, os) == text.size());
    }
  }
  CHECK_THROWS_AS(model_from_json("{\"version\":\"other\"}"), InvalidArgumentError);
  CHECK_THROWS_AS(model_from_json("not json"), InvalidArgumentError);
}

TEST_CASE("model validation") {
  Model md;
  md.add_variable("a");
  CHECK_THROWS_AS(md.add_variable("a"), InvalidArgumentError);
  CHECK_THROWS_AS(md.index("missing"), InvalidArgumentError);
  md.add_variable("t");  // free lower bound
  md.cones.push_back({1, 0, {}});
  CHECK_THROWS(md.validate());
}

TEST_CASE("side constraints append by name") {
  SideConstraints side;
  side.rows.push_back({"cap", {{"z_1", 1.0}, {"z_2", 1.0}}, Sense::le, 1.0});
  side.extra_variables.push_back({"y", VarKind::continuous, -1.0, 1.0});
  side.objective_terms.push_back({"y", 2.0});
  const Model md = build_socp(toy(), side);
  CHECK(md.has("y"));
  CHECK(md.rows.back().name == "cap");
  SideConstraints bad;
  bad.rows.push_back({"oops", {{"nope", 1.0}}, Sense::le, 0.0});
  CHECK_THROWS(build_socp(toy(), bad));
}
