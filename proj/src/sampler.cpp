#include "gsvgd/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsvgd/discrepancy.hpp"
#include "gsvgd/errors.hpp"

namespace gsvgd::sampler {

namespace {

constexpr Eigen::Index kMaxProjectors = 20;

// Stream key for projector noise within a run.
constexpr std::uint64_t kNoiseStream = 0x70726f6aULL;

void require_finite(const Matrix& x, std::size_t iteration) {
  if (!x.allFinite()) throw DivergenceError(iteration, "non-finite particle coordinates");
}

}  // namespace

Eigen::Index default_num_projectors(Eigen::Index d, Eigen::Index m) {
  if (m < 1) throw ConfigError("m", "must be at least 1");
  return std::min(kMaxProjectors, d / m);
}

void SamplerConfig::validate(Eigen::Index d) const {
  if (d < 1) throw ConfigError("d", "must be at least 1");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon", "must be a finite value >= 0");
  if (method == Method::Svgd) return;
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta", "must be a finite value >= 0");
  if (m < 1 || m > d) throw ConfigError("m", "must satisfy 1 <= m <= d");
  const Eigen::Index count = num_projectors > 0 ? num_projectors : default_num_projectors(d, m);
  if (count < 1) throw ConfigError("M", "must be at least 1");
  if (count * m > d) throw ConfigError("M", "M*m must not exceed d");
  if (!(anneal.t0 >= 0.0)) throw ConfigError("anneal.t0", "must be >= 0");
  if (!(anneal.t0 <= anneal.t_large)) throw ConfigError("anneal.t_large", "must be >= anneal.t0");
  if (!(anneal.factor >= 1.0)) throw ConfigError("anneal.factor", "must be >= 1");
  if (anneal.threshold && !(*anneal.threshold >= 0.0)) throw ConfigError("anneal.threshold", "must be >= 0");
}

Matrix AdagradState::scale(const Matrix& phi) {
  if (history.size() == 0) {
    history = phi.array().square().matrix();
  } else {
    history = (kDecay * history.array() + (1.0 - kDecay) * phi.array().square()).matrix();
  }
  return (phi.array() / (kFudge + history.array().sqrt())).matrix();
}

kernel::RadialKernelSpec resolve_kernel(const KernelPolicy& policy, const Matrix& points) {
  if (policy.fixed_bandwidth) return policy.base.with_bandwidth(*policy.fixed_bandwidth);
  // one particle: no pairs, and the bandwidth never enters (only Phi(0) is used)
  if (points.rows() < 2) return policy.base;
  const double n = std::max<double>(2.0, static_cast<double>(points.rows()));
  return policy.base.with_bandwidth(kernel::median_heuristic(points, n).sigma2);
}

Matrix svgd_update(const ParticleSet& x, const Matrix& scores, const kernel::RadialKernelSpec& k) {
  if (scores.rows() != x.rows() || scores.cols() != x.cols())
    throw DimensionError("svgd_update: scores must match particle shape");
  // Dense form: K S + 2 (B X - diag(B 1) X) with B = Phi'(||x_i - x_j||^2),
  // since grad_{x_j} k(x_j, x_i) = 2 Phi' (x_j - x_i).
  const Vector sq = x.rowwise().squaredNorm();
  Eigen::ArrayXXd dist = ((sq.replicate(1, x.rows()) + sq.transpose().replicate(x.rows(), 1)) -
                          2.0 * x * x.transpose())
                             .array()
                             .max(0.0);
  dist.matrix().diagonal().setZero();
  const Matrix kmat = kernel::phi_array(k, dist, 0).matrix();
  const Matrix bmat = kernel::phi_array(k, dist, 1).matrix();
  const Vector b1 = bmat.rowwise().sum();
  const Matrix phi = kmat * scores + 2.0 * (bmat * x - b1.asDiagonal() * x);
  return phi / static_cast<double>(x.rows());
}

ParticleSet svgd_step(const ParticleSet& x, const model::ScoreModel& target, const KernelPolicy& policy,
                      double epsilon, std::size_t iteration) {
  const Matrix scores = target.scores(x);
  ParticleSet out = x + epsilon * svgd_update(x, scores, resolve_kernel(policy, x));
  require_finite(out, iteration);
  return out;
}

Matrix gsvgd_phi(const ParticleSet& x, const Matrix& scores, const Projector& a,
                 const kernel::RadialKernelSpec& k) {
  return discrepancy::KsdWorkspace(x, scores, a.matrix(), k, false).update();
}

double particle_avg_magnitude(const Matrix& updates) {
  if (updates.rows() == 0) return 0.0;
  return updates.cwiseAbs().rowwise().maxCoeff().mean();
}

AnnealState anneal_update(const AnnealState& state, double gamma, const AnnealConfig& config,
                          Eigen::Index num_projectors) {
  const double threshold = config.threshold.value_or(1e-4 * static_cast<double>(num_projectors));
  AnnealState out = state;
  if (state.previous_magnitude && std::abs(gamma - *state.previous_magnitude) < threshold)
    out.temperature = std::min(state.temperature * config.factor, config.t_large);
  out.previous_magnitude = gamma;
  return out;
}

GsvgdState make_initial_state(ParticleSet particles, const SamplerConfig& config) {
  const Eigen::Index d = particles.cols();
  config.validate(d);
  GsvgdState state;
  state.particles = std::move(particles);
  if (config.method == Method::Gsvgd) {
    const Eigen::Index count = config.num_projectors > 0 ? config.num_projectors : default_num_projectors(d, config.m);
    state.projectors = manifold::init_projectors(d, config.m, count);
  }
  state.anneal.temperature = config.anneal.t0;
  if (config.adagrad) state.adagrad.emplace();
  return state;
}

GsvgdState gsvgd_step(const GsvgdState& state, const model::ScoreModel& target, const SamplerConfig& config,
                      Rng& rng) {
  const ParticleSet& x = state.particles;
  if (x.cols() != target.dim()) throw DimensionError("gsvgd_step: particle dimension does not match the target");
  const std::size_t it = state.iteration + 1;
  const Matrix scores = target.scores(x);
  const bool with_noise = config.delta > 0.0 && state.anneal.temperature > 0.0;
  const bool need_gradient = config.delta > 0.0;

  Matrix total = Matrix::Zero(x.rows(), x.cols());
  std::vector<Matrix> gradients;
  gradients.reserve(state.projectors.size());
  for (const auto& a : state.projectors) {
    const auto k = resolve_kernel(config.kernel, x * a.matrix());
    discrepancy::KsdWorkspace ws(x, scores, a.matrix(), k, need_gradient);
    total += ws.update();
    if (need_gradient) gradients.push_back(ws.gradient());
  }

  GsvgdState next;
  next.iteration = it;
  next.adagrad = state.adagrad;
  const Matrix step = next.adagrad ? next.adagrad->scale(total) : total;
  next.particles = x + config.epsilon * step;
  require_finite(next.particles, it);

  // Projector SDE, Euler-Maruyama in the tangent space, pre-update temperature.
  next.projectors.reserve(state.projectors.size());
  const double noise_scale = std::sqrt(2.0 * state.anneal.temperature * config.delta);
  for (std::size_t l = 0; l < state.projectors.size(); ++l) {
    const Projector& a = state.projectors[l];
    if (!need_gradient) {
      next.projectors.push_back(a);
      continue;
    }
    Matrix drift = config.delta * gradients[l];
    if (with_noise) drift += noise_scale * rng.normal_matrix(a.dim(), a.rank());
    next.projectors.push_back(manifold::polar_retract(a, manifold::tangent_project(a, drift).delta));
  }

  next.anneal = anneal_update(state.anneal, particle_avg_magnitude(total), config.anneal,
                              static_cast<Eigen::Index>(state.projectors.size()));

  if (config.reorthonormalize_every > 0 && it % config.reorthonormalize_every == 0 && !next.projectors.empty())
    next.projectors = manifold::reorthonormalize(next.projectors);
  return next;
}

RunResult run(const model::ScoreModel& target, const SamplerConfig& config, ParticleSet initial,
              std::uint64_t seed, const Hook& hook, std::size_t stride) {
  if (initial.cols() != target.dim()) throw DimensionError("run: initial particles do not match target dimension");
  Rng noise = Rng::stream(seed, {kNoiseStream});
  GsvgdState state = make_initial_state(std::move(initial), config);
  auto observe = [&](std::size_t it) {
    if (hook) hook(it, state.particles);
  };
  observe(0);
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    if (config.method == Method::Svgd) {
      const Matrix scores = target.scores(state.particles);
      const Matrix phi = svgd_update(state.particles, scores, resolve_kernel(config.kernel, state.particles));
      const Matrix step = state.adagrad ? state.adagrad->scale(phi) : phi;
      state.particles += config.epsilon * step;
      require_finite(state.particles, it);
      state.iteration = it;
    } else {
      state = gsvgd_step(state, target, config, noise);
    }
    if ((stride > 0 && it % stride == 0) || it == config.iterations) observe(it);
  }
  return {std::move(state.particles), std::move(state.projectors), state.anneal.temperature};
}

}  // namespace gsvgd::sampler
