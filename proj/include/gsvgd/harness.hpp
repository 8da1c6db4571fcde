#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsvgd/metrics.hpp"
#include "gsvgd/sampler.hpp"

namespace gsvgd::harness {

inline constexpr const char* kVersion = "1.0.0";

enum class Target { Gaussian, Multimodal, Xshaped, Diffusion };

/// Fully resolved experiment description. parse_config applies every default,
/// so serialize_config(cfg) lists every field and replays to the same run.
struct ExperimentConfig {
  sampler::Method method = sampler::Method::Gsvgd;
  Target target = Target::Gaussian;
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  std::size_t iterations = 0;
  Eigen::Index m = 1;
  Eigen::Index num_projectors = 0;
  double epsilon = 0.1;
  double delta = 0.05;
  sampler::AnnealConfig anneal;
  std::size_t reorthonormalize_every = 1000;
  bool adagrad = false;
  kernel::Family kernel_family = kernel::Family::GaussianRbf;
  double kernel_beta = -0.5;
  double kernel_c = 1.0;
  std::optional<double> fixed_bandwidth;
  std::uint64_t seed = 0;
  std::size_t repetitions = 1;
  std::size_t metric_stride = 100;
  std::string output = "out";
  double init_mean = 0.0;
  double init_variance = 1.0;
  double xshaped_delta = 0.95;
  double sigma_obs = 0.1;
  Eigen::Index ground_truth_samples = 2000;

  sampler::SamplerConfig sampler_config() const;
};

/// Parses `key = value` lines (`#` starts a comment, nested keys are dotted).
/// Throws ConfigError naming the key on unknown keys, duplicates, malformed
/// or out-of-range values and missing required fields.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses a config file; IoError if it cannot be read.
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Short hex digest of serialize_config(config).
std::string config_digest(const ExperimentConfig& config);

/// Posterior summary of the diffusion path u(w) at the final iteration.
struct PathSummary {
  Vector mean;
  Vector lower;  // 2.5% particle quantile per time step
  Vector upper;  // 97.5%
};

struct RunRecord {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  ParticleSet final_particles;
  std::vector<metrics::MetricSeries> series;
  std::optional<PathSummary> path;
  std::optional<std::string> divergence;
  double wall_seconds = 0.0;
  std::string config_echo;
  std::string version = kVersion;
};

struct MetricSummary {
  std::string name;
  double mean;
  double ci_low;
  double ci_high;
  std::size_t count;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<MetricSummary> summary;

  std::size_t diverged() const;
};

/// Runs one repetition (seed + rep) and returns its record; divergence is
/// captured in the record rather than thrown.
RunRecord run_repetition(const ExperimentConfig& config, std::size_t rep);

/// Runs all repetitions (in parallel up to GSVGD_THREADS workers) and
/// computes the final-iteration summary. Does not touch the filesystem.
ExperimentResult run_all(const ExperimentConfig& config);

/// Mean and mean +- 1.96 standard errors of the final value of each metric.
std::vector<MetricSummary> summarize(const std::vector<RunRecord>& runs);

/// `rep,iteration,metric,value` rows.
std::string metrics_csv(const std::vector<RunRecord>& runs);

/// Parses metrics_csv output back into per-rep series.
std::vector<RunRecord> parse_metrics_csv(const std::string& csv);

/// `{metric: {mean, ci_low, ci_high}, ..., "diverged_reps": [...]}`
std::string summary_json(const ExperimentResult& result);

/// Runs the experiment and writes metrics.csv, summary.json, config.echo,
/// runs.json and (diffusion) diffusion_path.csv into config.output.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

}  // namespace gsvgd::harness
