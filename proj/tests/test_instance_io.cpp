#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/instance_io.hpp"
#include "mpmiqp/random_instances.hpp"
#include "mpmiqp/spp.hpp"

using namespace mpmiqp;

TEST_CASE("every instance kind round-trips byte for byte") {
  RandomStream rng(71, "io.roundtrip");
  std::vector<Instance> all{gen_calcium(30, 0.05, 0.1, 0.96, 1.0, 4), gen_hev(8, 2.0, 5), random_projected(5, 1, rng),
                            random_projected(4, 2, rng), random_problem(4, 2, rng)};
  all.push_back(ProjectedMIQP::make(fold_scale({0.5, 0.5}, {1.0, 1.0}, {-1000, -999}), {1, 2}, {0, 0}, 0.5));
  for (const Instance& inst : all) {
    const std::string text = instance_to_json(inst);
    CHECK(text.back() == '\n');
    const Instance back = instance_from_json(text);
    CHECK(back.index() == inst.index());
    CHECK(instance_to_json(back) == text);
    CHECK(instance_n(back) == instance_n(inst));
  }
}

TEST_CASE("projected forms of each kind solve consistently") {
  RandomStream rng(72, "io.projected");
  const Instance raw = random_problem(5, 1, rng);
  const ProjectedMIQP direct = project(std::get<MultiPeriodProblem>(raw));
  const ProjectedMIQP via = to_projected(instance_from_json(instance_to_json(raw)));
  CHECK(solve(direct).objective == solve(via).objective);
  CHECK(std::string(instance_kind(raw)) == "raw-multiperiod");
}

TEST_CASE("shipped toy fixture") {
  const Instance inst = read_instance_file(std::string(MPMIQP_FIXTURES) + "/toy_n2.json");
  REQUIRE(std::holds_alternative<ProjectedMIQP>(inst));
  const SppSolution sol = solve(to_projected(inst));
  CHECK(sol.objective == doctest::Approx(-0.5));
  CHECK(sol.support == std::vector<std::size_t>{1});
}

TEST_CASE("spec json") {
  const CostSpec s = FactorizableSpec({1, 2}, {3, 1});
  const std::string text = spec_to_json(s);
  CHECK(text == "{\"d\":1,\"n\":2,\"u\":[1.0,2.0],\"v\":[3.0,1.0]}\n");
  const CostSpec back = spec_from_json(text);
  CHECK(std::get<FactorizableSpec>(back).v()[0] == 3.0);
  const CostSpec b = BlockFactorizableSpec({Matrix::identity(2)}, {Matrix{{2, 0}, {0, 3}}});
  CHECK(spec_to_json(spec_from_json(spec_to_json(b))) == spec_to_json(b));
}

TEST_CASE("malformed instances") {
  CHECK_THROWS_AS(instance_from_json("{"), InvalidArgumentError);
  CHECK_THROWS_AS(instance_from_json("{\"kind\":\"nope\"}"), InvalidArgumentError);
  CHECK_THROWS_AS(instance_from_json("{\"kind\":\"calcium\",\"n\":3}"), InvalidArgumentError);
  CHECK_THROWS_AS(instance_from_json("{\"kind\":\"calcium\",\"n\":3,\"alpha\":0.5,\"lambda\":1,\"r\":[1,2]}"),
                  DimensionError);
  CHECK_THROWS_AS(instance_from_json("{\"kind\":\"raw-projected\",\"version\":\"mpmiqp-instance/9\"}"),
                  InvalidArgumentError);
  CHECK_THROWS_AS(read_instance_file("/nonexistent/file.json"), InvalidArgumentError);
}
