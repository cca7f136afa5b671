#include <cmath>

#include "doctest.h"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/oracle.hpp"
#include "mpmiqp/random_instances.hpp"
#include "mpmiqp/spp.hpp"
#include "support.hpp"

using namespace mpmiqp;

namespace {
ProjectedMIQP toy() { return ProjectedMIQP::make(FactorizableSpec({1, 1}, {2, 1}), {-2, -2}, {0.5, 0.5}, 0.0); }
}  // namespace

TEST_CASE("toy enumeration") {
  const OracleResult r = enumerate_supports(toy(), {true, 1});
  CHECK(r.best_support == std::vector<std::size_t>{1});
  CHECK(r.best_objective == doctest::Approx(-0.5));
  CHECK(r.best_x[1] == doctest::Approx(1.0));
  REQUIRE(r.per_support);
  CHECK((*r.per_support)[0] == 0.0);
  CHECK((*r.per_support)[1] == doctest::Approx(0.0));
  CHECK((*r.per_support)[2] == doctest::Approx(-0.5));
  CHECK((*r.per_support)[3] == doctest::Approx(0.0));
}

TEST_CASE("fixed-support solve uses a dense solve") {
  const std::size_t S[] = {1};
  const auto res = solve_fixed_support(toy(), S);
  CHECK(res.x[0] == 0.0);
  CHECK(res.x[1] == doctest::Approx(1.0));
  CHECK(res.objective == doctest::Approx(-0.5));
}

TEST_CASE("enumeration agrees with Eigen on every support") {
  RandomStream rng(51, "oracle.table");
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + trial % 2;
    const ProjectedMIQP m = random_projected(2 + trial % 7, d, rng);
    const OracleResult r = enumerate_supports(m, {true, 1 + static_cast<unsigned>(trial % 3)});
    const auto bf = testing::brute_force(m);
    for (std::size_t mask = 0; mask < bf.all.size(); ++mask)
      CHECK(std::abs((*r.per_support)[mask] - bf.all[mask]) <= 1e-9 * (1 + std::abs(bf.all[mask])));
    CHECK(std::abs(r.best_objective - bf.objective) <= 1e-9 * (1 + std::abs(bf.objective)));
  }
}

TEST_CASE("threaded enumeration is deterministic") {
  RandomStream rng(52, "oracle.threads");
  const ProjectedMIQP m = random_projected(12, 1, rng);
  const OracleResult a = enumerate_supports(m, {false, 1}), b = enumerate_supports(m, {false, 4});
  CHECK(a.best_support == b.best_support);
  CHECK(a.best_objective == b.best_objective);
}

TEST_CASE("exact ties go to the lexicographically smallest support") {
  // a = 0, c = 0: every support has objective exactly 0.
  const ProjectedMIQP m = ProjectedMIQP::make(FactorizableSpec({1, 2, 4}, {5, 4, 2}), {0, 0, 0}, {0, 0, 0}, 0.0);
  const OracleResult r = enumerate_supports(m);
  CHECK(r.best_support.empty());
  CHECK(support_less(0b001, 0b010));  // {1} < {2}
  CHECK_FALSE(support_less(0b011, 0b001));  // {1,2} after {1}
  CHECK(support_less(0b011, 0b101));  // {1,2} < {1,3}
  CHECK(support_less(0b000, 0b100));
  CHECK(mask_to_support(0b1010) == std::vector<std::size_t>{1, 3});
}

TEST_CASE("size guard") {
  RandomStream rng(53, "oracle.guard");
  const ProjectedMIQP m = random_projected(21, 1, rng);
  CHECK_THROWS_AS(enumerate_supports(m), SizeGuardError);
}

TEST_CASE("closed-form inverse verification") {
  RandomStream rng(54, "oracle.inverse");
  for (std::size_t d : {1, 2}) {
    const ProjectedMIQP m = random_projected(6, d, rng);
    for (std::uint64_t mask = 0; mask < 64; ++mask) {
      const auto S = mask_to_support(mask);
      const auto rep = verify_inverse(m.spec, S, 1e-9);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("path polytope: unique binary flow and W") {
  RandomStream rng(55, "oracle.polytope");
  for (std::size_t d : {1, 2}) {
    const ProjectedMIQP m = random_projected(6, d, rng);
    for (std::uint64_t mask = 0; mask < 64; ++mask) {
      Vector z(6);
      for (std::size_t i = 0; i < 6; ++i) z[i] = (mask >> i) & 1u;
      const auto rep = verify_path_polytope(m.spec, z);
      CHECK(rep.pass);
      CHECK(rep.binary);
      CHECK(rep.flow.size() == static_cast<std::size_t>(__builtin_popcountll(mask)) + 1);
      // Flow starts at the source and ends at the sink.
      CHECK(rep.flow.front().from == 0);
      CHECK(rep.flow.back().to == 7);
    }
  }
  const FactorizableSpec spec({1, 2, 4}, {5, 4, 2});
  const Vector z{1, 1, 0};
  const auto rep = verify_path_polytope(spec, z);
  CHECK(rep.W(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(rep.W(0, 1) == doctest::Approx(-1.0 / 6));
  CHECK(rep.W(1, 1) == doctest::Approx(5.0 / 24));
  CHECK_THROWS(verify_path_polytope(spec, Vector{0.5, 1, 0}));
}

TEST_CASE("spp and oracle agree on random instances") {
  RandomStream rng(56, "oracle.spp");
  for (int trial = 0; trial < 40; ++trial) {
    const ProjectedMIQP m = random_projected(3 + trial % 9, 1 + trial % 3, rng);
    const auto sol = solve(m);
    const auto r = enumerate_supports(m);
    CHECK(std::abs(sol.objective - r.best_objective) <= 1e-8 * (1 + std::abs(r.best_objective)));
  }
}
