#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gsvgd/kernel.hpp"
#include "gsvgd/manifold.hpp"
#include "gsvgd/model.hpp"
#include "gsvgd/rng.hpp"
#include "gsvgd/types.hpp"

namespace gsvgd::sampler {

using manifold::Projector;

enum class Method { Svgd, Gsvgd };

/// Kernel family plus bandwidth rule. Without a fixed bandwidth the median
/// heuristic is applied every iteration (to projected particles for GSVGD).
struct KernelPolicy {
  kernel::RadialKernelSpec base = kernel::RadialKernelSpec::gaussian(1.0);
  std::optional<double> fixed_bandwidth;
};

struct AnnealConfig {
  double t0 = 1e-4;
  double t_large = 1e6;
  double factor = 10.0;
  /// Defaults to 1e-4 * M when unset.
  std::optional<double> threshold;
};

struct SamplerConfig {
  Method method = Method::Gsvgd;
  double epsilon = 0.1;
  double delta = 0.05;
  Eigen::Index m = 1;
  /// 0 selects min(20, floor(d / m)).
  Eigen::Index num_projectors = 0;
  AnnealConfig anneal;
  std::size_t reorthonormalize_every = 1000;
  std::size_t iterations = 2000;
  /// Per-coordinate AdaGrad scaling of the particle step (original SVGD recipe).
  bool adagrad = false;
  KernelPolicy kernel;

  /// Throws ConfigError naming the offending field.
  void validate(Eigen::Index d) const;
};

/// min(20, floor(d / m)).
Eigen::Index default_num_projectors(Eigen::Index d, Eigen::Index m);

struct AnnealState {
  double temperature = 1e-4;
  std::optional<double> previous_magnitude;
};

/// Running second-moment estimate for AdaGrad scaling.
struct AdagradState {
  Matrix history;
  static constexpr double kDecay = 0.9;
  static constexpr double kFudge = 1e-6;

  /// Scaled step direction for raw update `phi`; updates the history.
  Matrix scale(const Matrix& phi);
};

struct GsvgdState {
  ParticleSet particles;
  std::vector<Projector> projectors;
  AnnealState anneal;
  std::size_t iteration = 0;
  std::optional<AdagradState> adagrad;
};

/// Bandwidth for `points` under `policy`, with log(N) in the median rule.
kernel::RadialKernelSpec resolve_kernel(const KernelPolicy& policy, const Matrix& points);

/// SVGD direction (1/N) sum_j [ k(x_j, x_i) s_j + grad_{x_j} k(x_j, x_i) ].
Matrix svgd_update(const ParticleSet& x, const Matrix& scores, const kernel::RadialKernelSpec& k);

/// One plain SVGD step with the median-heuristic bandwidth on the raw particles.
ParticleSet svgd_step(const ParticleSet& x, const model::ScoreModel& target, const KernelPolicy& policy,
                      double epsilon, std::size_t iteration = 0);

/// Projected update for one projector, N x d with rows in span(A).
Matrix gsvgd_phi(const ParticleSet& x, const Matrix& scores, const Projector& a, const kernel::RadialKernelSpec& k);

/// mean_i ||updates.row(i)||_inf
double particle_avg_magnitude(const Matrix& updates);

/// Multiplies T by the anneal factor (capped at t_large) when the change in
/// particle-averaged magnitude falls below the threshold; stores gamma.
AnnealState anneal_update(const AnnealState& state, double gamma, const AnnealConfig& config,
                          Eigen::Index num_projectors);

/// Fresh state: one-hot projectors, T = t0.
GsvgdState make_initial_state(ParticleSet particles, const SamplerConfig& config);

/// One iteration: scores once, particle update summed over projectors, an
/// Euler-Maruyama projector step through the polar retraction, annealing, and
/// periodic joint re-orthonormalization.
GsvgdState gsvgd_step(const GsvgdState& state, const model::ScoreModel& target, const SamplerConfig& config,
                      Rng& rng);

/// Observer called with (iteration, particles) at iteration 0, every `stride`
/// iterations and after the final iteration.
using Hook = std::function<void(std::size_t, const ParticleSet&)>;

struct RunResult {
  ParticleSet particles;
  std::vector<Projector> projectors;
  double final_temperature = 0.0;
};

/// Evolves `initial` for config.iterations steps. The projector-noise stream
/// is derived from `seed`, so equal inputs give bit-identical results.
RunResult run(const model::ScoreModel& target, const SamplerConfig& config, ParticleSet initial,
              std::uint64_t seed, const Hook& hook = {}, std::size_t stride = 0);

}  // namespace gsvgd::sampler
