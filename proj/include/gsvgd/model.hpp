#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gsvgd/rng.hpp"
#include "gsvgd/types.hpp"

namespace gsvgd::model {

/// Target density exposed through its score s_p(x) = grad log p(x).
/// Implementations are immutable after construction and safe to share across
/// threads.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual Eigen::Index dim() const = 0;
  virtual Vector score(const Vector& x) const = 0;

  /// Scores for every row of `x`; the default loops over score().
  virtual Matrix scores(const ParticleSet& x) const;

  /// Log density up to an additive constant, when available.
  virtual std::optional<double> log_density_unnormalized(const Vector& x) const {
    (void)x;
    return std::nullopt;
  }

  virtual bool can_sample() const { return false; }

  /// Exact draws from the target; throws Error when can_sample() is false.
  virtual ParticleSet sample_ground_truth(Eigen::Index n, Rng& rng) const;
};

class GaussianTarget final : public ScoreModel {
 public:
  /// Throws DimensionError on shape mismatch and ConfigError when the
  /// covariance is not symmetric positive definite.
  GaussianTarget(Vector mean, Matrix covariance);

  static GaussianTarget standard(Eigen::Index d);

  Eigen::Index dim() const override { return mean_.size(); }
  Vector score(const Vector& x) const override;
  Matrix scores(const ParticleSet& x) const override;
  std::optional<double> log_density_unnormalized(const Vector& x) const override;
  bool can_sample() const override { return true; }
  ParticleSet sample_ground_truth(Eigen::Index n, Rng& rng) const override;

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }

 private:
  Vector mean_;
  Matrix cov_;
  Matrix precision_;
  Matrix chol_;
  bool diagonal_ = false;
};

class GaussianMixtureTarget final : public ScoreModel {
 public:
  /// Weights must sum to 1 within 1e-12 and every covariance must be SPD.
  GaussianMixtureTarget(Vector weights, std::vector<Vector> means, std::vector<Matrix> covariances);

  Eigen::Index dim() const override { return means_.front().size(); }
  Eigen::Index components() const { return weights_.size(); }
  Vector score(const Vector& x) const override;
  Matrix scores(const ParticleSet& x) const override;
  std::optional<double> log_density_unnormalized(const Vector& x) const override;
  bool can_sample() const override { return true; }
  ParticleSet sample_ground_truth(Eigen::Index n, Rng& rng) const override;

  const Vector& weights() const { return weights_; }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<Matrix>& covariances() const { return covs_; }

  /// sum_k w_k mu_k
  Vector mixture_mean() const;
  /// sum_k w_k (Sigma_k + mu_k mu_k^T) - mean mean^T
  Matrix mixture_covariance() const;

 private:
  Vector weights_;
  std::vector<Vector> means_;
  std::vector<Matrix> covs_;
  std::vector<Matrix> precisions_;
  std::vector<Matrix> chols_;
  Vector log_norm_;  // log w_k - 0.5 log det Sigma_k
};

/// Four unit-covariance components with equal weights, means on a circle of
/// radius sqrt(5) in the first two coordinates.
GaussianMixtureTarget make_multimodal_target(Eigen::Index d);

/// Two equally weighted components with means (1, 1, 0, ...) and leading 2x2
/// covariance blocks [[1, +-delta], [+-delta, 1]].
GaussianMixtureTarget make_xshaped_target(Eigen::Index d, double delta = 0.95);

/// Same as GaussianMixtureTarget::sample_ground_truth.
ParticleSet gmm_sample(const GaussianMixtureTarget& target, Eigen::Index n, Rng& rng);

/// Discretized conditioned diffusion du = f(u) dt + dx on (0, 1], observed at
/// t_i = 0.05 i. Parameterized by the Brownian increments w in R^100 with
/// prior N(0, dt I).
class ConditionedDiffusionModel final : public ScoreModel {
 public:
  static constexpr Eigen::Index kSteps = 100;
  static constexpr double kDt = 1e-2;
  static constexpr Eigen::Index kObservations = 20;
  static constexpr Eigen::Index kObservationStride = 5;

  ConditionedDiffusionModel(Vector observations, double sigma_obs);

  /// Model over the observation set shipped with the library.
  static ConditionedDiffusionModel with_reference_observations(double sigma_obs = 0.1);

  Eigen::Index dim() const override { return kSteps; }
  Vector score(const Vector& w) const override;
  std::optional<double> log_density_unnormalized(const Vector& w) const override;

  const Vector& observations() const { return y_; }
  double sigma_obs() const { return sigma_obs_; }

  /// Draws from the N(0, dt I) prior over increments.
  ParticleSet sample_prior(Eigen::Index n, Rng& rng) const;

  static double drift(double u);
  static double drift_derivative(double u);

  /// Path (u_1, ..., u_100) from u_0 = 0 by Euler-Maruyama with the given increments.
  static Vector forward(const Vector& w);

  /// Grid index (1-based time step) of observation i in 1..20.
  static constexpr Eigen::Index observation_grid_index(Eigen::Index i) { return kObservationStride * i; }

  /// Path values at the 20 observation times.
  static Vector observe(const Vector& path);

 private:
  Vector y_;
  double sigma_obs_;
};

/// (w_true, y) with w_true ~ N(0, dt I) and y = u(w_true) at the observation
/// times plus N(0, sigma_obs^2) noise.
std::pair<Vector, Vector> diffusion_generate_observations(Rng& rng, double sigma_obs = 0.1);

/// Observation vector generated from seed 0 and stored with the library.
const Vector& reference_diffusion_observations();

}  // namespace gsvgd::model
