#include <chrono>
#include <cmath>

#include "doctest.h"
#include "mpmiqp/casestudies.hpp"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/random_instances.hpp"
#include "mpmiqp/spp.hpp"
#include "support.hpp"

using namespace mpmiqp;

namespace {

ProjectedMIQP toy() { return ProjectedMIQP::make(FactorizableSpec({1, 1}, {2, 1}), {-2, -2}, {0.5, 0.5}, 0.0); }

double tol(double v) { return 1e-8 * (1 + std::abs(v)); }

}  // namespace

TEST_CASE("toy arc costs and path") {
  const ProjectedMIQP m = toy();
  const ArcCostTable t = arc_costs(m);
  CHECK(t.cost(1, 2) == doctest::Approx(0.5));
  CHECK(t.cost(1, 3) == doctest::Approx(0.0));
  CHECK(t.cost(2, 3) == doctest::Approx(-0.5));
  CHECK(t.cost(0, 1) == 0.0);
  const SppSolution sol = solve(m);
  CHECK(sol.path == std::vector<std::size_t>{0, 2, 3});
  CHECK(sol.support == std::vector<std::size_t>{1});
  CHECK(sol.x[0] == doctest::Approx(0.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
  CHECK(sol.z == Vector{0.0, 1.0});
  CHECK(sol.objective == doctest::Approx(-0.5));
  CHECK(sol.path_cost == doctest::Approx(-0.5));
}

TEST_CASE("compact and dense arc costs agree") {
  RandomStream rng(41, "spp.methods");
  for (std::size_t d : {1, 2, 3}) {
    const ProjectedMIQP m = random_projected(6, d, rng);
    const ArcCostTable a = arc_costs(m, ArcCostMethod::compact), b = arc_costs(m, ArcCostMethod::dense_reference);
    for (std::size_t i = 1; i <= 6; ++i)
      for (std::size_t j = i + 1; j <= 7; ++j) CHECK(std::abs(a.cost(i, j) - b.cost(i, j)) <= 1e-10 * (1 + std::abs(b.cost(i, j))));
  }
}

TEST_CASE("parallel fill is identical to sequential") {
  RandomStream rng(42, "spp.parallel");
  const ProjectedMIQP m = random_projected(30, 2, rng);
  const ArcCostTable a = arc_costs(m, ArcCostMethod::compact, 1), b = arc_costs(m, ArcCostMethod::compact, 4);
  for (std::size_t i = 0; i <= 30; ++i)
    for (std::size_t j = i + 1; j <= 31; ++j) CHECK(a.cost(i, j) == b.cost(i, j));
}

TEST_CASE("shortest path matches brute force over supports") {
  RandomStream rng(43, "spp.brute");
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 1 + trial % 3;
    const std::size_t n = d == 1 ? 2 + trial % 10 : 2 + trial % 6;
    const ProjectedMIQP m = random_projected(n, d, rng);
    const auto bf = testing::brute_force(m);
    const SppSolution sol = solve(m);
    CHECK(std::abs(sol.objective - bf.objective) <= tol(bf.objective));
    // Recovered point attains the reported objective.
    CHECK(std::abs(projected_objective(m, sol.x, sol.z) - sol.objective) <= tol(sol.objective));
  }
}

TEST_CASE("ties prefer the smallest predecessor") {
  ArcCostTable t(2);
  t.set(0, 1, 0.0);
  t.set(0, 2, 0.0);
  t.set(1, 2, 0.0);
  t.set(1, 3, 1.0);
  t.set(2, 3, 1.0);
  t.set(0, 3, 2.0);
  const ShortestPath p = shortest_path(t);
  CHECK(p.nodes == std::vector<std::size_t>{0, 1, 3});
  CHECK(p.cost == 1.0);
}

TEST_CASE("raising every fixed cost never grows the support") {
  RandomStream rng(44, "spp.monotone");
  for (int trial = 0; trial < 40; ++trial) {
    const ProjectedMIQP m = random_projected(8, 1 + trial % 2, rng);
    std::size_t prev = solve(m).support.size();
    for (double kappa : {0.1, 0.5, 1.0, 5.0}) {
      Vector c = m.c;
      for (double& v : c) v += kappa;
      const ProjectedMIQP bumped = ProjectedMIQP::make(m.spec, m.a, c, m.constant);
      const std::size_t now = solve(bumped).support.size();
      CHECK(now <= prev);
      prev = now;
    }
  }
}

TEST_CASE("relaxed calcium at n = 300 is fast and optimal on truncations") {
  const CalciumInstance inst = gen_calcium(300, 0.05, 0.1, 0.96, 1.0, 5);
  const auto t0 = std::chrono::steady_clock::now();
  const SppSolution sol = solve(calcium_projected(inst));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  CHECK(std::isfinite(sol.objective));

  for (std::size_t n : {8, 12, 14}) {
    CalciumInstance small = inst;
    small.n = n;
    small.r.resize(n + 1);
    small.true_spikes.resize(n);
    const ProjectedMIQP m = calcium_projected(small);
    const auto bf = testing::brute_force(m);
    CHECK(std::abs(solve(m).objective - bf.objective) <= tol(bf.objective));
  }
}

TEST_CASE("invalid specs are refused") {
  const ProjectedMIQP bad = ProjectedMIQP::make(FactorizableSpec({1, 1}, {1, 2}), {0, 0}, {0, 0}, 0.0);
  CHECK_THROWS_AS(solve(bad), AssumptionError);
  const std::vector<std::size_t> out_of_range{3};
  CHECK_THROWS(recover_x(toy(), out_of_range));
}
