#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gsvgd/errors.hpp"
#include "gsvgd/manifold.hpp"

using namespace gsvgd;
using namespace gsvgd::manifold;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Orthogonal polar factor Y (Y^T Y)^{-1/2} via a symmetric eigensolve.
Matrix polar_factor_oracle(const Matrix& y) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(y.transpose() * y);
  const Matrix inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
  return y * inv_sqrt;
}

}  // namespace

TEST_CASE("projector construction validates rank and orthonormality") {
  CHECK_NOTHROW(Projector(Matrix::Identity(3, 2)));
  CHECK_THROWS_AS(Projector(Matrix::Identity(2, 3)), DimensionError);
  CHECK_THROWS_AS(Projector(Matrix(3, 0)), DimensionError);
  CHECK_THROWS_AS(Projector(col({1.0, 1.0})), DegenerateError);
}

TEST_CASE("tangent_project") {
  Rng rng(1);
  const Projector a = random_projector(6, 2, rng);

  SUBCASE("A itself projects to zero") {
    CHECK(tangent_project(a, a.matrix()).delta.norm() <= 1e-14);
  }
  SUBCASE("hand example") {
    const Projector e1(col({1.0, 0.0}));
    const Matrix out = tangent_project(e1, col({3.0, 4.0})).delta;
    CHECK(out(0, 0) == doctest::Approx(0.0));
    CHECK(out(1, 0) == doctest::Approx(4.0));
  }
  SUBCASE("idempotent and tangent") {
    const Matrix g = rng.normal_matrix(6, 2);
    const Matrix once = tangent_project(a, g).delta;
    const Matrix twice = tangent_project(a, once).delta;
    CHECK((once - twice).norm() <= 1e-12);
    CHECK((a.matrix().transpose() * once).norm() <= 1e-10);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(tangent_project(a, Matrix::Zero(6, 3)), DimensionError);
    CHECK_THROWS_AS(tangent_project(a, Matrix::Zero(5, 2)), DimensionError);
  }
}

TEST_CASE("polar_retract") {
  Rng rng(2);

  SUBCASE("zero step keeps the subspace") {
    const Projector a = random_projector(7, 3, rng);
    const Projector b = polar_retract(a, Matrix::Zero(7, 3));
    CHECK(subspace_distance(a, b) <= 1e-10);
  }
  SUBCASE("hand example") {
    const Projector out = polar_retract(Projector(col({1.0, 0.0})), col({0.0, 1.0}));
    CHECK(out.matrix()(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(out.matrix()(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("matches the polar factor oracle and stays orthonormal") {
    for (int trial = 0; trial < 50; ++trial) {
      const Projector a = random_projector(3, 2, rng);
      const Matrix delta = tangent_project(a, 0.3 * rng.normal_matrix(3, 2)).delta;
      const Projector out = polar_retract(a, delta);
      CHECK(orthonormality_error(out.matrix()) <= 1e-12);
      CHECK((out.matrix() - polar_factor_oracle(a.matrix() + delta)).norm() <= 1e-12);
    }
  }
  SUBCASE("non-tangent steps still give an orthonormal result") {
    for (int trial = 0; trial < 20; ++trial) {
      const Projector a = random_projector(10, 4, rng);
      const Projector out = polar_retract(a, rng.normal_matrix(10, 4));
      CHECK(orthonormality_error(out.matrix()) <= 1e-10);
    }
  }
  SUBCASE("representative invariance") {
    const Projector a = random_projector(8, 3, rng);
    const Matrix c = random_orthogonal(3, rng);
    const Matrix delta = tangent_project(a, 0.2 * rng.normal_matrix(8, 3)).delta;
    const Projector r1 = polar_retract(a, delta);
    const Projector r2 = polar_retract(Projector(a.matrix() * c), delta * c);
    CHECK(subspace_distance(r1, r2) <= 1e-10);
  }
  SUBCASE("rank deficient step") {
    CHECK_THROWS_AS(polar_retract(Projector(col({1.0, 0.0})), col({-1.0, 0.0})), DegenerateError);
  }
  SUBCASE("deterministic") {
    const Projector a = random_projector(5, 2, rng);
    const Matrix delta = rng.normal_matrix(5, 2);
    CHECK(polar_retract(a, delta).matrix() == polar_retract(a, delta).matrix());
  }
}

TEST_CASE("sample_tangent_noise") {
  Rng base(3);
  const Projector a = random_projector(4, 2, base);

  Rng r1(42), r2(42);
  const Matrix n1 = sample_tangent_noise(a, r1).delta;
  const Matrix n2 = sample_tangent_noise(a, r2).delta;
  CHECK(n1 == n2);
  CHECK((a.matrix().transpose() * n1).norm() <= 1e-10);

  // Column j of Pi_A xi is Pi_A xi_j, so entry (i, j) has variance (Pi_A)_ii.
  const Matrix pi = Matrix::Identity(4, 4) - a.matrix() * a.matrix().transpose();
  Matrix second = Matrix::Zero(4, 2);
  const int draws = 10000;
  Rng rng(7);
  for (int s = 0; s < draws; ++s) second += sample_tangent_noise(a, rng).delta.array().square().matrix();
  second /= draws;
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(second(i, j) / pi(i, i) - 1.0) <= 0.1);
}

TEST_CASE("init_projectors") {
  const auto ps = init_projectors(4, 2, 2);
  REQUIRE(ps.size() == 2);
  Matrix first = Matrix::Zero(4, 2), second = Matrix::Zero(4, 2);
  first(0, 0) = first(1, 1) = 1.0;
  second(2, 0) = second(3, 1) = 1.0;
  CHECK(ps[0].matrix() == first);
  CHECK(ps[1].matrix() == second);

  CHECK(init_projectors(50, 5, std::min<Eigen::Index>(20, 50 / 5)).size() == 10);
  const auto many = init_projectors(30, 3, 10);
  CHECK(orthonormality_error(concatenate(many)) <= 1e-14);

  try {
    init_projectors(3, 2, 2);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "M");
  }
}

TEST_CASE("reorthonormalize") {
  Rng rng(4);

  SUBCASE("orthonormal input keeps its subspaces") {
    const Matrix q = random_orthogonal(9, rng).leftCols(6);
    std::vector<Projector> ps{Projector(q.leftCols(2)), Projector(q.middleCols(2, 3)), Projector(q.rightCols(1))};
    const auto out = reorthonormalize(ps);
    REQUIRE(out.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
      CHECK(out[l].rank() == ps[l].rank());
      CHECK(subspace_distance(out[l], ps[l]) <= 1e-10);
    }
    CHECK(orthonormality_error(concatenate(out)) <= 1e-10);
  }
  SUBCASE("hand Gram-Schmidt") {
    const double h = 1.0 / std::sqrt(2.0);
    std::vector<Projector> ps{Projector(col({1.0, 0.0})), Projector(col({h, h}))};
    const auto out = reorthonormalize(ps);
    CHECK(std::abs(out[0].matrix()(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(out[1].matrix()(0, 0)) <= 1e-12);
    CHECK(std::abs(out[1].matrix()(1, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("drifted batch becomes jointly orthonormal") {
    auto ps = init_projectors(12, 2, 5);
    for (auto& p : ps) p = polar_retract(p, 0.3 * rng.normal_matrix(12, 2));
    CHECK(orthonormality_error(concatenate(ps)) > 1e-3);
    const auto out = reorthonormalize(ps);
    CHECK(orthonormality_error(concatenate(out)) <= 1e-10);
    CHECK(reorthonormalize(ps)[3].matrix() == out[3].matrix());
  }
  SUBCASE("total rank above d") {
    std::vector<Projector> ps{Projector(col({1.0, 0.0})), Projector(col({0.0, 1.0})), Projector(col({1.0, 0.0}))};
    CHECK_THROWS_AS(reorthonormalize(ps), DegenerateError);
  }
  SUBCASE("repeated columns") {
    std::vector<Projector> ps{Projector(col({1.0, 0.0, 0.0})), Projector(col({1.0, 0.0, 0.0}))};
    CHECK_THROWS_AS(reorthonormalize(ps), DegenerateError);
  }
}

TEST_CASE("subspace_distance") {
  Rng rng(5);
  const Projector a = random_projector(6, 3, rng);
  const Projector b = random_projector(6, 3, rng);
  CHECK(subspace_distance(a, Projector(a.matrix() * random_orthogonal(3, rng))) <= 1e-12);
  CHECK(subspace_distance(a, b) == subspace_distance(b, a));
  CHECK(subspace_distance(Projector(col({1.0, 0.0})), Projector(col({0.0, 1.0}))) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(subspace_distance(a, random_projector(6, 2, rng)), DimensionError);
}

TEST_CASE("random_orthogonal is orthogonal") {
  Rng rng(6);
  const Matrix c = random_orthogonal(5, rng);
  CHECK((c.transpose() * c - Matrix::Identity(5, 5)).norm() <= 1e-12);
}
