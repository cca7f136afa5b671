#include "doctest.h"
#include "mpmiqp/errors.hpp"
#include "mpmiqp/linalg.hpp"
#include "mpmiqp/rng.hpp"
#include "support.hpp"

using namespace mpmiqp;
using testing::to_eigen;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RandomStream& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("products match Eigen") {
  RandomStream rng(11, "linalg.products");
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(4, 3, rng), b = random_matrix(3, 5, rng);
    CHECK(testing::max_abs_diff(mat_mul(a, b), to_eigen(a) * to_eigen(b)) < 1e-13);
    const Vector x{1.0, -2.0, 0.5};
    const Eigen::VectorXd ax = to_eigen(a) * to_eigen(x);
    const Vector got = mat_vec(a, x);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(ax(i)).epsilon(1e-14));
    const Vector y{1.0, 2.0, 3.0, 4.0};
    const Eigen::VectorXd aty = to_eigen(a).transpose() * to_eigen(y);
    const Vector gt = mat_tvec(a, y);
    for (std::size_t i = 0; i < gt.size(); ++i) CHECK(gt[i] == doctest::Approx(aty(i)).epsilon(1e-14));
  }
}

TEST_CASE("inverse matches Eigen and rejects singular input") {
  RandomStream rng(12, "linalg.inverse");
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(5, 5, rng) + Matrix::identity(5) * 3.0;
    CHECK(testing::max_abs_diff(mat_inverse(a), to_eigen(a).inverse()) < 1e-10);
  }
  CHECK_THROWS_AS(mat_inverse(Matrix{{1.0, 2.0}, {2.0, 4.0}}), SingularMatrixError);
  CHECK_THROWS_AS(mat_inverse(Matrix(2, 3)), DimensionError);
}

TEST_CASE("symmetric eigen and inverse square root") {
  RandomStream rng(13, "linalg.eigen");
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix b = random_matrix(4, 4, rng);
    const Matrix s = mat_mul(b, b.transpose()) + Matrix::identity(4) * 0.5;
    const auto mine = sym_eigen(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(s));
    for (int k = 0; k < 4; ++k) CHECK(mine.values[k] == doctest::Approx(es.eigenvalues()(k)).epsilon(1e-12));
    const Matrix r = sym_inv_sqrt(s);
    const Matrix id = mat_mul(mat_mul(r, s), r);
    CHECK(max_abs_diff(id, Matrix::identity(4)) < 1e-11);
  }
}

TEST_CASE("positive definiteness via Cholesky") {
  CHECK(is_positive_definite(Matrix{{2.0, 1.0}, {1.0, 2.0}}, 1e-10));
  CHECK_FALSE(is_positive_definite(Matrix{{1.0, 2.0}, {2.0, 1.0}}, 1e-10));
  CHECK_FALSE(is_positive_definite(Matrix{{1.0, 1.0}, {1.0, 1.0}}, 1e-10));
  CHECK_THROWS_AS(is_positive_definite(Matrix{{1.0, 0.0}, {0.5, 1.0}}, 1e-10), AsymmetricMatrixError);
}

TEST_CASE("symmetrize and asymmetry") {
  const Matrix a{{1.0, 2.0}, {2.0 + 1e-12, 3.0}};
  CHECK(asymmetry(a) < 1e-11);
  const Matrix s = symmetrize(a, 1e-8);
  CHECK(s(0, 1) == s(1, 0));
  CHECK_THROWS_AS(symmetrize(Matrix{{1.0, 0.0}, {1.0, 1.0}}, 1e-8), AsymmetricMatrixError);
}

TEST_CASE("matrix helpers") {
  Matrix m(3, 3);
  m.set_block(1, 1, Matrix{{1.0, 2.0}, {3.0, 4.0}});
  CHECK(m(2, 2) == 4.0);
  CHECK(m.block(1, 1, 2, 2) == Matrix{{1.0, 2.0}, {3.0, 4.0}});
  m.add_block(0, 0, Matrix::identity(2), -2.0);
  CHECK(m(0, 0) == -2.0);
  CHECK(m(1, 1) == -1.0);
  CHECK(m.trace() == 1.0);
  CHECK(m.max_abs() == 4.0);
  CHECK(m.transpose()(1, 2) == 3.0);
  const Vector diag{1.0, 2.0};
  CHECK(Matrix::diagonal(diag)(1, 1) == 2.0);
}
