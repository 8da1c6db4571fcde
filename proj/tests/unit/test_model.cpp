#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "gsvgd/errors.hpp"
#include "gsvgd/model.hpp"
#include "support.hpp"

using namespace gsvgd;
using namespace gsvgd::model;
using test_support::fd_gradient;
using test_support::rel_error;

namespace {

Vector fd_score(const ScoreModel& model, const Vector& x, double h = 1e-5) {
  return fd_gradient([&](const Matrix& z) { return *model.log_density_unnormalized(z.col(0)); }, x, h).col(0);
}

Matrix random_spd(Rng& rng, Eigen::Index d) {
  const Matrix b = rng.normal_matrix(d, d);
  return b * b.transpose() + 0.5 * Matrix::Identity(d, d);
}

}  // namespace

TEST_CASE("gaussian score") {
  Rng rng(1);
  const auto std5 = GaussianTarget::standard(5);
  const Vector x = rng.normal_matrix(5, 1).col(0);
  CHECK((std5.score(x) + x).norm() <= 1e-15);

  const Vector mu = rng.normal_matrix(4, 1).col(0);
  const GaussianTarget g(mu, random_spd(rng, 4));
  CHECK(g.score(mu).norm() <= 1e-12);
  for (int t = 0; t < 10; ++t) {
    const Vector z = rng.normal_matrix(4, 1).col(0);
    CHECK(rel_error(g.score(z), fd_score(g, z)) <= 1e-6);
  }

  const Matrix batch = rng.normal_matrix(7, 4);
  const Matrix s = g.scores(batch);
  for (Eigen::Index i = 0; i < 7; ++i) CHECK((s.row(i).transpose() - g.score(batch.row(i).transpose())).norm() <= 1e-12);

  CHECK_THROWS_AS(GaussianTarget(Vector::Zero(2), Matrix::Identity(3, 3)), DimensionError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(GaussianTarget(Vector::Zero(2), bad), ConfigError);
}

TEST_CASE("gmm score") {
  Rng rng(2);

  SUBCASE("symmetric midpoint") {
    const Vector m1 = Vector::Constant(3, 1.5);
    const GaussianMixtureTarget mix(Vector::Constant(2, 0.5), {m1, -m1},
                                    {Matrix::Identity(3, 3), Matrix::Identity(3, 3)});
    CHECK(mix.score(Vector::Zero(3)).norm() <= 1e-14);
  }
  SUBCASE("single component reduces to a gaussian") {
    const Vector mu = rng.normal_matrix(3, 1).col(0);
    const Matrix cov = random_spd(rng, 3);
    const GaussianMixtureTarget mix(Vector::Ones(1), {mu}, {cov});
    const GaussianTarget g(mu, cov);
    const Vector x = rng.normal_matrix(3, 1).col(0);
    CHECK((mix.score(x) - g.score(x)).norm() <= 1e-12);
  }
  SUBCASE("multimodal target matches finite differences") {
    const auto mm = make_multimodal_target(6);
    for (int t = 0; t < 50; ++t) {
      const Vector x = 2.0 * rng.normal_matrix(6, 1).col(0);
      CHECK(rel_error(mm.score(x), fd_score(mm, x)) <= 1e-5);
    }
  }
  SUBCASE("x-shaped target matches finite differences") {
    const auto xs = make_xshaped_target(5);
    for (int t = 0; t < 50; ++t) {
      const Vector x = 1.5 * rng.normal_matrix(5, 1).col(0);
      CHECK(rel_error(xs.score(x), fd_score(xs, x)) <= 1e-4);
    }
  }
  SUBCASE("translation equivariance") {
    const auto xs = make_xshaped_target(4);
    const Vector c = rng.normal_matrix(4, 1).col(0);
    std::vector<Vector> shifted;
    for (const auto& m : xs.means()) shifted.push_back(m + c);
    const GaussianMixtureTarget moved(xs.weights(), shifted, xs.covariances());
    const Vector x = rng.normal_matrix(4, 1).col(0);
    CHECK((moved.score(x + c) - xs.score(x)).norm() <= 1e-12);
  }
  SUBCASE("far from every mode stays finite") {
    const auto mm = make_multimodal_target(50);
    const Vector x = Vector::Constant(50, 40.0);
    const Vector s = mm.score(x);
    CHECK(s.allFinite());
    const Matrix batch = x.transpose();
    CHECK((mm.scores(batch).row(0).transpose() - s).norm() <= 1e-10 * s.norm());
  }
  SUBCASE("batch scores match pointwise scores") {
    const auto xs = make_xshaped_target(6);
    const Matrix batch = 2.0 * rng.normal_matrix(9, 6);
    const Matrix s = xs.scores(batch);
    for (Eigen::Index i = 0; i < 9; ++i)
      CHECK((s.row(i).transpose() - xs.score(batch.row(i).transpose())).norm() <= 1e-12);
  }
  SUBCASE("invalid weights") {
    CHECK_THROWS_AS(GaussianMixtureTarget(Vector::Constant(2, 0.6), {Vector::Zero(2), Vector::Zero(2)},
                                          {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}),
                    ConfigError);
  }
}

TEST_CASE("multimodal target construction") {
  const auto mm = make_multimodal_target(5);
  REQUIRE(mm.components() == 4);
  const double r = std::sqrt(5.0);
  CHECK(mm.means()[0](0) == doctest::Approx(r * std::cos(3.0 * std::numbers::pi / 4.0)));
  CHECK(mm.means()[0](1) == doctest::Approx(r * std::sin(3.0 * std::numbers::pi / 4.0)));
  CHECK(mm.means()[0](0) == doctest::Approx(-1.5811388300841898));
  CHECK(mm.means()[0](1) == doctest::Approx(1.5811388300841898));
  for (int k = 0; k < 4; ++k) {
    CHECK(mm.weights()(k) == 0.25);
    CHECK(mm.means()[static_cast<std::size_t>(k)].norm() == doctest::Approx(r));
    CHECK(mm.means()[static_cast<std::size_t>(k)].tail(3).norm() == 0.0);
    CHECK(mm.covariances()[static_cast<std::size_t>(k)] == Matrix::Identity(5, 5));
    // next mean is this one rotated by pi/2
    const Vector& a = mm.means()[static_cast<std::size_t>(k)];
    const Vector& b = mm.means()[static_cast<std::size_t>((k + 1) % 4)];
    CHECK(b(0) == doctest::Approx(-a(1)));
    CHECK(b(1) == doctest::Approx(a(0)));
  }
  CHECK_THROWS_AS(make_multimodal_target(1), ConfigError);
}

TEST_CASE("x-shaped target construction") {
  const auto xs = make_xshaped_target(6);
  REQUIRE(xs.components() == 2);
  Eigen::SelfAdjointEigenSolver<Matrix> es(xs.covariances()[0].topLeftCorner(2, 2));
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.05));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.95));
  CHECK(xs.covariances()[0](0, 1) == 0.95);
  CHECK(xs.covariances()[1](0, 1) == -0.95);
  for (const auto& c : xs.covariances()) {
    CHECK(c.llt().info() == Eigen::Success);
    CHECK(c.bottomRightCorner(4, 4) == Matrix::Identity(4, 4));
    CHECK(c.topRightCorner(2, 4).norm() == 0.0);
  }
  for (const auto& m : xs.means()) {
    CHECK(m(0) == 1.0);
    CHECK(m(1) == 1.0);
    CHECK(m.tail(4).norm() == 0.0);
  }
  // analytic moments: mean (1,1,0..), covariance = average of the two blocks
  const Matrix cov = xs.mixture_covariance();
  CHECK((cov - Matrix::Identity(6, 6)).norm() <= 1e-15);
  CHECK((xs.mixture_mean() - xs.means()[0]).norm() == 0.0);
  CHECK_THROWS_AS(make_xshaped_target(1), ConfigError);
}

TEST_CASE("gmm_sample") {
  SUBCASE("sample mean within three standard errors") {
    const auto mm = make_multimodal_target(3);
    Rng rng(3);
    const int n = 100000;
    const Matrix x = gmm_sample(mm, n, rng);
    const Vector mean = x.colwise().mean();
    const Vector var = (x.rowwise() - mean.transpose()).array().square().colwise().sum() / (n - 1);
    const Vector want = mm.mixture_mean();
    for (Eigen::Index c = 0; c < 3; ++c) CHECK(std::abs(mean(c) - want(c)) <= 3.0 * std::sqrt(var(c) / n));
    const Matrix cov = ((x.rowwise() - mean.transpose()).transpose() * (x.rowwise() - mean.transpose())) / (n - 1);
    CHECK((cov - mm.mixture_covariance()).norm() <= 0.05 * mm.mixture_covariance().norm());
  }
  SUBCASE("standard normal variance") {
    const GaussianMixtureTarget one(Vector::Ones(1), {Vector::Zero(4)}, {Matrix::Identity(4, 4)});
    Rng rng(4);
    const Matrix x = gmm_sample(one, 100000, rng);
    const Vector mean = x.colwise().mean();
    const Vector var = (x.rowwise() - mean.transpose()).array().square().colwise().sum() / (x.rows() - 1);
    for (Eigen::Index c = 0; c < 4; ++c) CHECK(std::abs(var(c) - 1.0) <= 0.05);
  }
  SUBCASE("x-shaped samples reproduce the analytic covariance") {
    const auto xs = make_xshaped_target(3);
    Rng rng(5);
    const Matrix x = gmm_sample(xs, 100000, rng);
    const Vector mean = x.colwise().mean();
    const Matrix cov = ((x.rowwise() - mean.transpose()).transpose() * (x.rowwise() - mean.transpose())) / (x.rows() - 1);
    CHECK((cov - xs.mixture_covariance()).norm() <= 0.03);
  }
  SUBCASE("reproducible") {
    const auto mm = make_multimodal_target(4);
    Rng a(9), b(9);
    CHECK(gmm_sample(mm, 50, a) == gmm_sample(mm, 50, b));
    Rng c(9), d(9);
    CHECK(mm.sample_ground_truth(50, c) == gmm_sample(mm, 50, d));
  }
  SUBCASE("gaussian target sampler") {
    Rng rng(6);
    Matrix cov(2, 2);
    cov << 2.0, 0.6, 0.6, 1.0;
    const GaussianTarget g(Vector::Constant(2, 1.0), cov);
    const Matrix x = g.sample_ground_truth(100000, rng);
    const Vector mean = x.colwise().mean();
    const Matrix c = ((x.rowwise() - mean.transpose()).transpose() * (x.rowwise() - mean.transpose())) / (x.rows() - 1);
    CHECK((mean - Vector::Constant(2, 1.0)).norm() <= 0.02);
    CHECK((c - cov).norm() <= 0.05);
  }
}

TEST_CASE("diffusion forward solve") {
  using D = ConditionedDiffusionModel;
  CHECK(D::forward(Vector::Zero(100)).norm() == 0.0);

  Vector w = Vector::Zero(100);
  w(0) = 0.1;
  const Vector u = D::forward(w);
  CHECK(u(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(u(1) == doctest::Approx(0.1 + 10.0 * 0.1 * 0.99 / 1.01 * 0.01).epsilon(1e-15));

  // causality: changing w_j leaves u_1..u_j untouched
  Rng rng(7);
  const Vector w1 = 0.1 * rng.normal_matrix(100, 1).col(0);
  Vector w2 = w1;
  w2(60) += 0.5;
  const Vector p1 = D::forward(w1), p2 = D::forward(w2);
  CHECK(p1.head(60) == p2.head(60));
  CHECK(p1(60) != p2(60));

  for (Eigen::Index i = 1; i <= 20; ++i) CHECK(D::observation_grid_index(i) == 5 * i);
  CHECK(D::observe(p1)(19) == p1(99));
  CHECK(D::observe(p1)(0) == p1(4));
  CHECK_THROWS_AS(D::forward(Vector::Zero(99)), DimensionError);
}

TEST_CASE("diffusion drift derivative matches finite differences") {
  using D = ConditionedDiffusionModel;
  for (double u : {-2.3, -1.0, -0.4, 0.0, 0.1, 0.7, 1.5, 3.0}) {
    const double h = 1e-6;
    const double fd = (D::drift(u + h) - D::drift(u - h)) / (2 * h);
    CHECK(std::abs(D::drift_derivative(u) - fd) <= 1e-8 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("diffusion score") {
  using D = ConditionedDiffusionModel;
  Rng rng(8);

  SUBCASE("zero residuals leave only the prior") {
    const Vector w = std::sqrt(D::kDt) * rng.normal_matrix(100, 1).col(0);
    const D model(D::observe(D::forward(w)), 0.1);
    CHECK((model.score(w) + w / D::kDt).norm() <= 1e-12 * (w / D::kDt).norm());
  }
  SUBCASE("large observation noise") {
    const D model(Vector::Constant(20, 0.7), 1e6);
    const Vector w = std::sqrt(D::kDt) * rng.normal_matrix(100, 1).col(0);
    CHECK(rel_error(model.score(w), -w / D::kDt) <= 1e-6);
  }
  SUBCASE("finite differences of the log posterior") {
    for (int t = 0; t < 20; ++t) {
      const Vector y = rng.normal_matrix(20, 1).col(0);
      const D model(y, 0.1);
      const Vector w = std::sqrt(D::kDt) * rng.normal_matrix(100, 1).col(0);
      CHECK(rel_error(model.score(w), fd_score(model, w)) <= 1e-4);
    }
  }
  SUBCASE("likelihood part alone matches finite differences") {
    const D model = D::with_reference_observations();
    const Vector w = 0.3 * rng.normal_matrix(100, 1).col(0);
    const Vector lik = model.score(w) + w / D::kDt;
    const Vector fd = fd_score(model, w) + w / D::kDt;
    CHECK(rel_error(lik, fd) <= 1e-4);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(D(Vector::Zero(19), 0.1), DimensionError);
    CHECK_THROWS_AS(D(Vector::Zero(20), 0.0), ConfigError);
  }
}

TEST_CASE("diffusion observations") {
  using D = ConditionedDiffusionModel;
  Rng a(11), b(11);
  const auto [w1, y1] = diffusion_generate_observations(a, 0.1);
  const auto [w2, y2] = diffusion_generate_observations(b, 0.1);
  CHECK(w1 == w2);
  CHECK(y1 == y2);
  CHECK(w1.size() == 100);
  CHECK(y1.size() == 20);

  Rng c(12);
  const auto [w3, y3] = diffusion_generate_observations(c, 0.0);
  CHECK(y3 == D::observe(D::forward(w3)));

  SUBCASE("shipped observation set regenerates from seed 0") {
    Rng rng(0);
    const Vector regenerated = diffusion_generate_observations(rng, 0.1).second;
    CHECK(regenerated == reference_diffusion_observations());
    CHECK(D::with_reference_observations().observations() == reference_diffusion_observations());
  }
  SUBCASE("prior draws have variance dt") {
    const D model = D::with_reference_observations();
    Rng rng(13);
    const Matrix w = model.sample_prior(2000, rng);
    CHECK(w.rows() == 2000);
    CHECK(w.cols() == 100);
    const double var = w.array().square().mean();
    CHECK(std::abs(var / D::kDt - 1.0) <= 0.02);
  }
}
