#include <cmath>

#include "doctest.h"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/projection.hpp"
#include "mpmiqp/random_instances.hpp"
#include "support.hpp"

using namespace mpmiqp;
using testing::to_eigen;

namespace {

MultiPeriodProblem calcium_shaped() {
  MultiPeriodProblem p;
  p.n = 2;
  p.P.assign(3, Matrix(1, 1, 0.5));
  p.A.assign(2, Matrix(1, 1, 0.5));
  p.r = {{1.0}, {0.5}, {0.25}};
  p.f.assign(2, Vector{0.0});
  p.b = {{1.0}, {0.0}, {0.0}};
  p.c = {1.0, 1.0};
  return p;
}

Vector random_point(std::size_t len, RandomStream& rng) {
  Vector v(len);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("calcium-shaped two-period projection") {
  const ProjectedMIQP m = project(calcium_shaped());
  const Matrix q = materialize(m.spec);
  CHECK(q(0, 0) == doctest::Approx(0.625));
  CHECK(q(0, 1) == doctest::Approx(0.25));
  CHECK(q(1, 1) == doctest::Approx(0.5));
  CHECK(std::abs(m.a[0]) < 1e-15);
  CHECK(std::abs(m.a[1]) < 1e-15);
  CHECK(std::abs(m.constant) < 1e-15);
  CHECK(m.scalar_spec().u()[0] == doctest::Approx(0.5));
  CHECK(m.scalar_spec().v()[0] == doctest::Approx(1.25));
  CHECK(m.scalar_spec().v()[1] == doctest::Approx(0.5));
}

TEST_CASE("targets on the uncontrolled trajectory leave only f") {
  RandomStream rng(31, "projection.zero");
  for (std::size_t d : {1, 2}) {
    MultiPeriodProblem p = random_problem(5, d, rng);
    const auto s = reconstruct_states(p, Vector(5 * d, 0.0));
    p.r = s;
    const ProjectedMIQP m = project(p);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t k = 0; k < d; ++k) CHECK(m.a[i * d + k] == doctest::Approx(p.f[i][k]).epsilon(1e-12));
    CHECK(std::abs(m.constant) < 1e-12);
  }
}

TEST_CASE("scalar problems routed through the block path agree") {
  RandomStream rng(32, "projection.route");
  const MultiPeriodProblem p = random_problem(6, 1, rng);
  const ProjectedMIQP s = project_scalar(p), b = project_block(p);
  CHECK(max_abs_diff(materialize(s.spec), materialize(b.spec)) <= 1e-12);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(s.a[i] - b.a[i]) <= 1e-12 * (1 + std::abs(s.a[i])));
  CHECK(std::abs(s.constant - b.constant) <= 1e-12 * (1 + std::abs(s.constant)));
}

TEST_CASE("projection matches the stacked-state assembly") {
  RandomStream rng(33, "projection.dense");
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + trial % 3, n = 2 + trial % 5;
    const MultiPeriodProblem p = random_problem(n, d, rng);
    const ProjectedMIQP m = project(p);
    const auto dense = testing::dense_projection(p);
    const double scale = 1.0 + dense.Q.cwiseAbs().maxCoeff();
    CHECK(testing::max_abs_diff(materialize(m.spec), dense.Q) <= 1e-10 * scale);
    CHECK((to_eigen(m.a) - dense.a).cwiseAbs().maxCoeff() <= 1e-10 * (1 + dense.a.cwiseAbs().maxCoeff()));
    CHECK(std::abs(m.constant - dense.constant) <= 1e-10 * (1 + std::abs(dense.constant)));
  }
}

TEST_CASE("projected plus constant equals the original objective") {
  RandomStream rng(34, "projection.objective");
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + trial % 2, n = 3 + trial % 4;
    const MultiPeriodProblem p = random_problem(n, d, rng);
    const ProjectedMIQP m = project(p);
    Vector x = random_point(n * d, rng), z(n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      if (rng.uniform() < 0.4) {
        z[i] = 0.0;
        for (std::size_t k = 0; k < d; ++k) x[i * d + k] = 0.0;
      }
    const double orig = original_objective(p, x, z);
    CHECK(std::abs(orig - projected_objective(m, x, z)) <= 1e-9 * (1 + std::abs(orig)));
  }
}

TEST_CASE("apply_q matches the dense product") {
  RandomStream rng(35, "projection.applyq");
  for (std::size_t d : {1, 3}) {
    const ProjectedMIQP m = random_projected(6, d, rng);
    const Vector x = random_point(6 * d, rng);
    const Vector dense = mat_vec(materialize(m.spec), x);
    const Vector fast = apply_q(m.spec, x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(fast[i] == doctest::Approx(dense[i]).epsilon(1e-12));
  }
}

TEST_CASE("long decaying horizons stay representable") {
  MultiPeriodProblem p;
  p.n = 300;
  p.P.assign(301, Matrix(1, 1, 0.5));
  p.A.assign(300, Matrix(1, 1, 0.1));  // 0.1^299 is far below 2^-830
  p.f.assign(300, Vector{0.0});
  p.b.assign(301, Vector{0.0});
  p.b[0] = {1.0};
  p.c.assign(300, 1.0);
  for (std::size_t t = 0; t <= 300; ++t) p.r.push_back({t % 7 == 0 ? 1.0 : 0.0});
  const ProjectedMIQP m = project(p);
  const auto& s = m.scalar_spec();
  CHECK(s.scaled());
  CHECK(s.assumption().pass);
  CHECK(s.entry(299, 299) == doctest::Approx(0.5));
  CHECK(s.entry(298, 298) == doctest::Approx(0.505));
  CHECK(std::isfinite(s.u()[0]));
  CHECK(s.u_ratio(0, 1) == doctest::Approx(0.1));
}

TEST_CASE("fold_scale removes small exponents") {
  const auto s = fold_scale({0.5, 0.5}, {1.0, 1.0}, {3, -2});
  CHECK_FALSE(s.scaled());
  CHECK(s.u()[0] == 4.0);
  CHECK(s.v()[1] == 4.0);
  CHECK(fold_scale({0.5}, {1.0}, {-900}).scaled());
}

TEST_CASE("invalid problems are rejected") {
  MultiPeriodProblem p = calcium_shaped();
  p.P[1] = Matrix(1, 1, -1.0);
  CHECK_THROWS_AS(project(p), NotPositiveDefiniteError);
  p = calcium_shaped();
  p.A[0] = Matrix(1, 1, 0.0);
  CHECK_THROWS(project(p));
  p = calcium_shaped();
  p.r.pop_back();
  CHECK_THROWS_AS(project(p), DimensionError);
}
