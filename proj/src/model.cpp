#include "gsvgd/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gsvgd/errors.hpp"

namespace gsvgd::model {

namespace {

struct SpdFactor {
  Matrix precision;
  Matrix chol;  // lower triangular L with Sigma = L L^T
  double log_det;
};

SpdFactor factor_spd(const Matrix& cov, const std::string& key) {
  if (cov.rows() != cov.cols()) throw DimensionError(key + ": covariance must be square");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError(key, "covariance is not symmetric");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw ConfigError(key, "covariance is not positive definite");
  Matrix l = llt.matrixL();
  double log_det = 2.0 * l.diagonal().array().log().sum();
  return {llt.solve(Matrix::Identity(cov.rows(), cov.cols())), std::move(l), log_det};
}

bool is_diagonal(const Matrix& m) {
  return (m - Matrix(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

Matrix ScoreModel::scores(const ParticleSet& x) const {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = score(x.row(i).transpose()).transpose();
  return out;
}

ParticleSet ScoreModel::sample_ground_truth(Eigen::Index, Rng&) const {
  throw Error("this target has no exact sampler");
}

// ---------------------------------------------------------------------------

GaussianTarget::GaussianTarget(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw DimensionError("GaussianTarget: mean and covariance sizes differ");
  auto f = factor_spd(cov_, "covariance");
  precision_ = std::move(f.precision);
  chol_ = std::move(f.chol);
  diagonal_ = is_diagonal(cov_);
}

GaussianTarget GaussianTarget::standard(Eigen::Index d) {
  return GaussianTarget(Vector::Zero(d), Matrix::Identity(d, d));
}

Vector GaussianTarget::score(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("GaussianTarget::score: wrong length");
  if (diagonal_) return -(precision_.diagonal().array() * (x - mean_).array()).matrix();
  return -precision_ * (x - mean_);
}

Matrix GaussianTarget::scores(const ParticleSet& x) const {
  if (x.cols() != dim()) throw DimensionError("GaussianTarget::scores: wrong dimension");
  Matrix centered = x.rowwise() - mean_.transpose();
  if (diagonal_) return -(centered.array().rowwise() * precision_.diagonal().transpose().array()).matrix();
  return -centered * precision_;
}

std::optional<double> GaussianTarget::log_density_unnormalized(const Vector& x) const {
  const Vector c = x - mean_;
  return -0.5 * c.dot(precision_ * c);
}

ParticleSet GaussianTarget::sample_ground_truth(Eigen::Index n, Rng& rng) const {
  Matrix z = rng.normal_matrix(dim(), n);
  Matrix out = (chol_ * z).transpose();
  out.rowwise() += mean_.transpose();
  return out;
}

// ---------------------------------------------------------------------------

GaussianMixtureTarget::GaussianMixtureTarget(Vector weights, std::vector<Vector> means,
                                             std::vector<Matrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covs_(std::move(covariances)) {
  const auto k = static_cast<std::size_t>(weights_.size());
  if (k == 0 || means_.size() != k || covs_.size() != k)
    throw DimensionError("GaussianMixtureTarget: need matching, nonempty weights/means/covariances");
  if (std::abs(weights_.sum() - 1.0) > 1e-12 || (weights_.array() < 0.0).any())
    throw ConfigError("weights", "mixture weights must lie on the simplex");
  const Eigen::Index d = means_.front().size();
  log_norm_.resize(weights_.size());
  for (std::size_t c = 0; c < k; ++c) {
    if (means_[c].size() != d || covs_[c].rows() != d)
      throw DimensionError("GaussianMixtureTarget: component " + std::to_string(c) + " has wrong dimension");
    auto f = factor_spd(covs_[c], "covariances[" + std::to_string(c) + "]");
    precisions_.push_back(std::move(f.precision));
    chols_.push_back(std::move(f.chol));
    const auto ci = static_cast<Eigen::Index>(c);
    log_norm_(ci) = std::log(weights_(ci)) - 0.5 * f.log_det;
  }
}

Vector GaussianMixtureTarget::score(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("GaussianMixtureTarget::score: wrong length");
  Matrix row = x.transpose();
  return scores(row).row(0).transpose();
}

Matrix GaussianMixtureTarget::scores(const ParticleSet& x) const {
  if (x.cols() != dim()) throw DimensionError("GaussianMixtureTarget::scores: wrong dimension");
  const Eigen::Index n = x.rows();
  const Eigen::Index k = components();
  Matrix logits(n, k);
  std::vector<Matrix> grads(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    Matrix centered = x.rowwise() - means_[cu].transpose();
    grads[cu] = centered * precisions_[cu];
    logits.col(c) = (-0.5 * (centered.array() * grads[cu].array()).rowwise().sum()).matrix();
    logits.col(c).array() += log_norm_(c);
  }
  // responsibilities via log-sum-exp
  Vector row_max = logits.rowwise().maxCoeff();
  Matrix resp = (logits.colwise() - row_max).array().exp().matrix();
  Vector denom = resp.rowwise().sum();
  resp = resp.array().colwise() / denom.array();
  Matrix out = Matrix::Zero(n, dim());
  for (Eigen::Index c = 0; c < k; ++c)
    out -= (grads[static_cast<std::size_t>(c)].array().colwise() * resp.col(c).array()).matrix();
  return out;
}

std::optional<double> GaussianMixtureTarget::log_density_unnormalized(const Vector& x) const {
  const Eigen::Index k = components();
  Vector logits(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const Vector centered = x - means_[cu];
    logits(c) = log_norm_(c) - 0.5 * centered.dot(precisions_[cu] * centered);
  }
  const double mx = logits.maxCoeff();
  return mx + std::log((logits.array() - mx).exp().sum());
}

ParticleSet GaussianMixtureTarget::sample_ground_truth(Eigen::Index n, Rng& rng) const {
  if (n < 1) throw DimensionError("gmm_sample: n must be positive");
  ParticleSet out(n, dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    Eigen::Index c = 0;
    double acc = weights_(0);
    while (u >= acc && c + 1 < components()) acc += weights_(++c);
    Vector z(dim());
    for (Eigen::Index j = 0; j < dim(); ++j) z(j) = rng.normal();
    const auto cu = static_cast<std::size_t>(c);
    out.row(i) = (means_[cu] + chols_[cu] * z).transpose();
  }
  return out;
}

Vector GaussianMixtureTarget::mixture_mean() const {
  Vector mu = Vector::Zero(dim());
  for (Eigen::Index c = 0; c < components(); ++c) mu += weights_(c) * means_[static_cast<std::size_t>(c)];
  return mu;
}

Matrix GaussianMixtureTarget::mixture_covariance() const {
  const Vector mu = mixture_mean();
  Matrix second = Matrix::Zero(dim(), dim());
  for (Eigen::Index c = 0; c < components(); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    second += weights_(c) * (covs_[cu] + means_[cu] * means_[cu].transpose());
  }
  return second - mu * mu.transpose();
}

ParticleSet gmm_sample(const GaussianMixtureTarget& target, Eigen::Index n, Rng& rng) {
  return target.sample_ground_truth(n, rng);
}

GaussianMixtureTarget make_multimodal_target(Eigen::Index d) {
  if (d < 2) throw ConfigError("d", "multimodal target needs d >= 2");
  constexpr int kComponents = 4;
  const double radius = std::sqrt(5.0);
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (int k = 1; k <= kComponents; ++k) {
    const double angle = 2.0 * k * std::numbers::pi / kComponents + std::numbers::pi / 4.0;
    Vector mu = Vector::Zero(d);
    mu(0) = radius * std::cos(angle);
    mu(1) = radius * std::sin(angle);
    means.push_back(std::move(mu));
    covs.push_back(Matrix::Identity(d, d));
  }
  return GaussianMixtureTarget(Vector::Constant(kComponents, 1.0 / kComponents), std::move(means),
                               std::move(covs));
}

GaussianMixtureTarget make_xshaped_target(Eigen::Index d, double delta) {
  if (d < 2) throw ConfigError("d", "x-shaped target needs d >= 2");
  if (!(std::abs(delta) < 1.0)) throw ConfigError("xshaped.delta", "correlation must satisfy |delta| < 1");
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (double sign : {1.0, -1.0}) {
    Vector mu = Vector::Zero(d);
    mu(0) = 1.0;
    mu(1) = 1.0;
    Matrix cov = Matrix::Identity(d, d);
    cov(0, 1) = cov(1, 0) = sign * delta;
    means.push_back(std::move(mu));
    covs.push_back(std::move(cov));
  }
  return GaussianMixtureTarget(Vector::Constant(2, 0.5), std::move(means), std::move(covs));
}

// ---------------------------------------------------------------------------

ConditionedDiffusionModel::ConditionedDiffusionModel(Vector observations, double sigma_obs)
    : y_(std::move(observations)), sigma_obs_(sigma_obs) {
  if (y_.size() != kObservations)
    throw DimensionError("ConditionedDiffusionModel: expected 20 observations");
  if (!(sigma_obs_ > 0.0)) throw ConfigError("diffusion.sigma_obs", "observation noise must be positive");
}

ConditionedDiffusionModel ConditionedDiffusionModel::with_reference_observations(double sigma_obs) {
  return ConditionedDiffusionModel(reference_diffusion_observations(), sigma_obs);
}

double ConditionedDiffusionModel::drift(double u) {
  const double u2 = u * u;
  return 10.0 * u * (1.0 - u2) / (1.0 + u2);
}

double ConditionedDiffusionModel::drift_derivative(double u) {
  const double u2 = u * u;
  const double den = 1.0 + u2;
  return 10.0 * (1.0 - 4.0 * u2 - u2 * u2) / (den * den);
}

Vector ConditionedDiffusionModel::forward(const Vector& w) {
  if (w.size() != kSteps) throw DimensionError("diffusion_forward: expected 100 increments");
  Vector path(kSteps);
  double u = 0.0;
  for (Eigen::Index j = 0; j < kSteps; ++j) {
    u = u + drift(u) * kDt + w(j);
    path(j) = u;
  }
  return path;
}

Vector ConditionedDiffusionModel::observe(const Vector& path) {
  Vector out(kObservations);
  for (Eigen::Index i = 1; i <= kObservations; ++i) out(i - 1) = path(observation_grid_index(i) - 1);
  return out;
}

std::optional<double> ConditionedDiffusionModel::log_density_unnormalized(const Vector& w) const {
  const Vector resid = y_ - observe(forward(w));
  return -w.squaredNorm() / (2.0 * kDt) - resid.squaredNorm() / (2.0 * sigma_obs_ * sigma_obs_);
}

Vector ConditionedDiffusionModel::score(const Vector& w) const {
  const Vector path = forward(w);
  const double inv_var = 1.0 / (sigma_obs_ * sigma_obs_);
  // adjoint[j] = d loglik / d path(j), accumulated backwards through
  // path(j+1) = path(j) + f(path(j)) dt + w(j+1).
  Vector out = -w / kDt;
  double adjoint = 0.0;
  for (Eigen::Index j = kSteps - 1; j >= 0; --j) {
    if (j + 1 < kSteps) adjoint *= 1.0 + drift_derivative(path(j)) * kDt;
    if ((j + 1) % kObservationStride == 0) {
      const Eigen::Index obs = (j + 1) / kObservationStride - 1;
      adjoint += (y_(obs) - path(j)) * inv_var;
    }
    out(j) += adjoint;
  }
  return out;
}

ParticleSet ConditionedDiffusionModel::sample_prior(Eigen::Index n, Rng& rng) const {
  return std::sqrt(kDt) * rng.normal_matrix(kSteps, n).transpose();
}

std::pair<Vector, Vector> diffusion_generate_observations(Rng& rng, double sigma_obs) {
  using M = ConditionedDiffusionModel;
  Vector w(M::kSteps);
  for (Eigen::Index j = 0; j < M::kSteps; ++j) w(j) = std::sqrt(M::kDt) * rng.normal();
  Vector y = M::observe(M::forward(w));
  for (Eigen::Index i = 0; i < M::kObservations; ++i) y(i) += sigma_obs * rng.normal();
  return {std::move(w), std::move(y)};
}

}  // namespace gsvgd::model
