#include "gsvgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gsvgd/errors.hpp"
#include "gsvgd/model.hpp"

namespace gsvgd::harness {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kGroundTruthStream = 0x74727574ULL;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

long long parse_positive(const std::string& key, const std::string& v) {
  const long long out = parse_int(key, v);
  if (out < 1) throw ConfigError(key, "must be a positive integer");
  return out;
}

double parse_positive_double(const std::string& key, const std::string& v) {
  const double out = parse_double(key, v);
  if (!(out > 0.0)) throw ConfigError(key, "must be positive");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

const char* method_name(sampler::Method m) { return m == sampler::Method::Svgd ? "svgd" : "gsvgd"; }

const char* target_name(Target t) {
  switch (t) {
    case Target::Gaussian: return "gaussian";
    case Target::Multimodal: return "multimodal";
    case Target::Xshaped: return "xshaped";
    case Target::Diffusion: return "diffusion";
  }
  return "?";
}

// Raw key/value pairs before defaults are applied.
using RawConfig = std::map<std::string, std::string>;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "method",         "target",          "d",
      "N",              "iterations",      "m",
      "M",              "epsilon",         "delta",
      "anneal.t0",      "anneal.t_large",  "anneal.factor",
      "anneal.threshold", "reorthonormalize_every", "adagrad",
      "kernel",         "kernel.beta",     "kernel.c",
      "kernel.bandwidth", "seed",          "repetitions",
      "metric_stride",  "output",          "init.mean",
      "init.variance",  "xshaped.delta",   "diffusion.sigma_obs",
      "ground_truth_samples"};
  return keys;
}

std::unique_ptr<model::ScoreModel> make_model(const ExperimentConfig& c) {
  switch (c.target) {
    case Target::Gaussian: return std::make_unique<model::GaussianTarget>(model::GaussianTarget::standard(c.d));
    case Target::Multimodal:
      return std::make_unique<model::GaussianMixtureTarget>(model::make_multimodal_target(c.d));
    case Target::Xshaped:
      return std::make_unique<model::GaussianMixtureTarget>(model::make_xshaped_target(c.d, c.xshaped_delta));
    case Target::Diffusion:
      return std::make_unique<model::ConditionedDiffusionModel>(
          model::ConditionedDiffusionModel::with_reference_observations(c.sigma_obs));
  }
  throw ConfigError("target", "unsupported target");
}

// Ground truth shared by all repetitions of one experiment.
struct Evaluation {
  std::unique_ptr<model::ScoreModel> target;
  std::optional<metrics::EnergyDistanceReference> energy;
  std::optional<Matrix> covariance;
};

Evaluation make_evaluation(const ExperimentConfig& c) {
  Evaluation ev;
  ev.target = make_model(c);
  if (c.target == Target::Diffusion) return ev;
  Rng rng = Rng::stream(c.seed, {kGroundTruthStream});
  ev.energy.emplace(ev.target->sample_ground_truth(c.ground_truth_samples, rng));
  if (const auto* g = dynamic_cast<const model::GaussianTarget*>(ev.target.get())) {
    ev.covariance = g->covariance();
  } else if (const auto* mix = dynamic_cast<const model::GaussianMixtureTarget*>(ev.target.get())) {
    ev.covariance = mix->mixture_covariance();
  }
  return ev;
}

double quantile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

PathSummary summarize_paths(const ParticleSet& w) {
  using M = model::ConditionedDiffusionModel;
  Matrix paths(w.rows(), M::kSteps);
  for (Eigen::Index i = 0; i < w.rows(); ++i) paths.row(i) = M::forward(w.row(i).transpose()).transpose();
  PathSummary out{paths.colwise().mean().transpose(), Vector(M::kSteps), Vector(M::kSteps)};
  std::vector<double> col(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index t = 0; t < M::kSteps; ++t) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) col[static_cast<std::size_t>(i)] = paths(i, t);
    out.lower(t) = quantile(col, 0.025);
    out.upper(t) = quantile(col, 0.975);
  }
  return out;
}

RunRecord run_with(const ExperimentConfig& c, const Evaluation& ev, std::size_t rep) {
  RunRecord rec;
  rec.rep = rep;
  rec.seed = c.seed + rep;
  rec.config_echo = serialize_config(c);
  const std::string digest = config_digest(c);

  std::vector<metrics::MetricSeries> series;
  auto add_series = [&](const char* name) {
    metrics::MetricSeries s;
    s.name = name;
    s.seed = rec.seed;
    s.config_digest = digest;
    series.push_back(std::move(s));
  };
  if (ev.energy) add_series(metrics::kEnergyDistance);
  if (ev.covariance) add_series(metrics::kCovarianceError);
  add_series(metrics::kDimAvgVariance);

  auto hook = [&](std::size_t it, const ParticleSet& x) {
    std::size_t k = 0;
    if (ev.energy) series[k++].append(it, (*ev.energy)(x));
    if (ev.covariance) series[k++].append(it, metrics::covariance_error(x, *ev.covariance));
    series[k].append(it, metrics::dim_avg_marginal_variance(x));
  };

  Rng init = Rng::stream(rec.seed, {kInitStream});
  ParticleSet x0 = (c.init_mean + std::sqrt(c.init_variance) * init.normal_matrix(c.d, c.n).array()).matrix().transpose();

  const auto start = std::chrono::steady_clock::now();
  try {
    auto result = sampler::run(*ev.target, c.sampler_config(), std::move(x0), rec.seed, hook, c.metric_stride);
    rec.final_particles = std::move(result.particles);
    if (c.target == Target::Diffusion) rec.path = summarize_paths(rec.final_particles);
  } catch (const DivergenceError& e) {
    rec.divergence = e.what();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.series = std::move(series);
  return rec;
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GSVGD_THREADS")) {
    long long cap = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

sampler::SamplerConfig ExperimentConfig::sampler_config() const {
  sampler::SamplerConfig s;
  s.method = method;
  s.epsilon = epsilon;
  s.delta = delta;
  s.m = m;
  s.num_projectors = num_projectors;
  s.anneal = anneal;
  s.reorthonormalize_every = reorthonormalize_every;
  s.iterations = iterations;
  s.adagrad = adagrad;
  s.kernel.base.family = kernel_family;
  s.kernel.base.beta = kernel_beta;
  s.kernel.base.c = kernel_c;
  s.kernel.fixed_bandwidth = fixed_bandwidth;
  return s;
}

ExperimentConfig parse_config(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) throw ConfigError(key, "unknown key");
    if (value.empty()) throw ConfigError(key, "missing value");
    if (!raw.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }

  auto require = [&](const char* key) -> const std::string& {
    auto it = raw.find(key);
    if (it == raw.end()) throw ConfigError(key, "required field is missing");
    return it->second;
  };
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = raw.find(key);
    if (it == raw.end()) return std::nullopt;
    return it->second;
  };

  ExperimentConfig c;
  const std::string& method = require("method");
  if (method == "svgd") c.method = sampler::Method::Svgd;
  else if (method == "gsvgd") c.method = sampler::Method::Gsvgd;
  else throw ConfigError("method", "expected svgd or gsvgd, got '" + method + "'");

  const std::string& target = require("target");
  if (target == "gaussian") c.target = Target::Gaussian;
  else if (target == "multimodal") c.target = Target::Multimodal;
  else if (target == "xshaped") c.target = Target::Xshaped;
  else if (target == "diffusion") c.target = Target::Diffusion;
  else throw ConfigError("target", "expected gaussian, multimodal, xshaped or diffusion, got '" + target + "'");

  c.d = parse_positive("d", require("d"));
  c.n = parse_positive("N", require("N"));
  if (c.n < 2) throw ConfigError("N", "need at least 2 particles");
  {
    const long long it = parse_int("iterations", require("iterations"));
    if (it < 0) throw ConfigError("iterations", "must be >= 0");
    c.iterations = static_cast<std::size_t>(it);
  }
  {
    const long long s = parse_int("seed", require("seed"));
    if (s < 0) throw ConfigError("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (c.target == Target::Diffusion && c.d != model::ConditionedDiffusionModel::kSteps)
    throw ConfigError("d", "the diffusion target has d = 100");
  if ((c.target == Target::Multimodal || c.target == Target::Xshaped) && c.d < 2)
    throw ConfigError("d", "mixture targets need d >= 2");

  if (c.method == sampler::Method::Gsvgd) {
    c.m = parse_positive("m", require("m"));
  } else if (auto v = get("m")) {
    c.m = parse_positive("m", *v);
  }
  if (c.m > c.d) throw ConfigError("m", "must not exceed d");
  if (auto v = get("M"); v && *v != "auto") {
    c.num_projectors = parse_positive("M", *v);
  } else {
    c.num_projectors = sampler::default_num_projectors(c.d, c.m);
  }
  if (c.num_projectors * c.m > c.d) throw ConfigError("M", "M*m must not exceed d");

  if (auto v = get("epsilon")) c.epsilon = parse_positive_double("epsilon", *v);
  if (auto v = get("delta")) {
    c.delta = parse_double("delta", *v);
    if (c.delta < 0.0) throw ConfigError("delta", "must be >= 0");
  }
  if (auto v = get("anneal.t0")) {
    c.anneal.t0 = parse_double("anneal.t0", *v);
    if (c.anneal.t0 < 0.0) throw ConfigError("anneal.t0", "must be >= 0");
  }
  if (auto v = get("anneal.t_large")) c.anneal.t_large = parse_positive_double("anneal.t_large", *v);
  if (c.anneal.t0 > c.anneal.t_large) throw ConfigError("anneal.t_large", "must be >= anneal.t0");
  if (auto v = get("anneal.factor")) {
    c.anneal.factor = parse_double("anneal.factor", *v);
    if (c.anneal.factor < 1.0) throw ConfigError("anneal.factor", "must be >= 1");
  }
  if (auto v = get("anneal.threshold"); v && *v != "auto") {
    c.anneal.threshold = parse_double("anneal.threshold", *v);
    if (*c.anneal.threshold < 0.0) throw ConfigError("anneal.threshold", "must be >= 0");
  } else {
    c.anneal.threshold = 1e-4 * static_cast<double>(c.num_projectors);
  }
  if (auto v = get("reorthonormalize_every")) {
    const long long r = parse_int("reorthonormalize_every", *v);
    if (r < 0) throw ConfigError("reorthonormalize_every", "must be >= 0");
    c.reorthonormalize_every = static_cast<std::size_t>(r);
  }
  if (auto v = get("adagrad")) c.adagrad = parse_bool("adagrad", *v);

  if (auto v = get("kernel")) {
    if (*v == "gaussian_rbf") c.kernel_family = kernel::Family::GaussianRbf;
    else if (*v == "imq") c.kernel_family = kernel::Family::Imq;
    else throw ConfigError("kernel", "expected gaussian_rbf or imq, got '" + *v + "'");
  }
  if (auto v = get("kernel.beta")) {
    c.kernel_beta = parse_double("kernel.beta", *v);
    if (!(c.kernel_beta > -1.0 && c.kernel_beta < 0.0)) throw ConfigError("kernel.beta", "must lie in (-1, 0)");
  }
  if (auto v = get("kernel.c")) c.kernel_c = parse_positive_double("kernel.c", *v);
  if (auto v = get("kernel.bandwidth"); v && *v != "median")
    c.fixed_bandwidth = parse_positive_double("kernel.bandwidth", *v);

  if (auto v = get("repetitions")) c.repetitions = static_cast<std::size_t>(parse_positive("repetitions", *v));
  if (auto v = get("metric_stride")) c.metric_stride = static_cast<std::size_t>(parse_positive("metric_stride", *v));
  if (auto v = get("output")) c.output = *v;

  switch (c.target) {
    case Target::Gaussian:
      c.init_mean = 2.0;
      c.init_variance = 2.0;
      break;
    case Target::Multimodal:
    case Target::Xshaped:
      c.init_mean = 0.0;
      c.init_variance = 1.0;
      break;
    case Target::Diffusion:
      c.init_mean = 0.0;
      c.init_variance = model::ConditionedDiffusionModel::kDt;
      break;
  }
  if (auto v = get("init.mean")) c.init_mean = parse_double("init.mean", *v);
  if (auto v = get("init.variance")) c.init_variance = parse_positive_double("init.variance", *v);
  if (auto v = get("xshaped.delta")) {
    c.xshaped_delta = parse_double("xshaped.delta", *v);
    if (!(std::abs(c.xshaped_delta) < 1.0)) throw ConfigError("xshaped.delta", "must satisfy |delta| < 1");
  }
  if (auto v = get("diffusion.sigma_obs")) c.sigma_obs = parse_positive_double("diffusion.sigma_obs", *v);
  if (auto v = get("ground_truth_samples"))
    c.ground_truth_samples = parse_positive("ground_truth_samples", *v);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& v) { out << key << " = " << v << '\n'; };
  auto num = [&](const char* key, double v) { kv(key, format_double(v)); };
  auto integer = [&](const char* key, auto v) { kv(key, std::to_string(v)); };
  kv("method", method_name(c.method));
  kv("target", target_name(c.target));
  integer("d", c.d);
  integer("N", c.n);
  integer("iterations", c.iterations);
  integer("m", c.m);
  integer("M", c.num_projectors);
  num("epsilon", c.epsilon);
  num("delta", c.delta);
  num("anneal.t0", c.anneal.t0);
  num("anneal.t_large", c.anneal.t_large);
  num("anneal.factor", c.anneal.factor);
  num("anneal.threshold", c.anneal.threshold.value_or(1e-4 * static_cast<double>(c.num_projectors)));
  integer("reorthonormalize_every", c.reorthonormalize_every);
  kv("adagrad", c.adagrad ? "true" : "false");
  kv("kernel", c.kernel_family == kernel::Family::GaussianRbf ? "gaussian_rbf" : "imq");
  num("kernel.beta", c.kernel_beta);
  num("kernel.c", c.kernel_c);
  kv("kernel.bandwidth", c.fixed_bandwidth ? format_double(*c.fixed_bandwidth) : "median");
  integer("seed", c.seed);
  integer("repetitions", c.repetitions);
  integer("metric_stride", c.metric_stride);
  kv("output", c.output);
  num("init.mean", c.init_mean);
  num("init.variance", c.init_variance);
  num("xshaped.delta", c.xshaped_delta);
  num("diffusion.sigma_obs", c.sigma_obs);
  integer("ground_truth_samples", c.ground_truth_samples);
  return out.str();
}

std::string config_digest(const ExperimentConfig& config) {
  // FNV-1a over the canonical text
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t ExperimentResult::diverged() const {
  return static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return r.divergence.has_value(); }));
}

RunRecord run_repetition(const ExperimentConfig& config, std::size_t rep) {
  return run_with(config, make_evaluation(config), rep);
}

ExperimentResult run_all(const ExperimentConfig& config) {
  config.sampler_config().validate(config.d);
  const Evaluation ev = make_evaluation(config);
  ExperimentResult result;
  result.runs.resize(config.repetitions);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t rep = next++; rep < config.repetitions; rep = next++) {
      try {
        result.runs[rep] = run_with(config, ev, rep);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = worker_count(config.repetitions);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  result.summary = summarize(result.runs);
  return result;
}

std::vector<MetricSummary> summarize(const std::vector<RunRecord>& runs) {
  std::vector<MetricSummary> out;
  const RunRecord* first = nullptr;
  for (const auto& r : runs)
    if (!r.divergence) {
      first = &r;
      break;
    }
  if (!first) return out;
  for (std::size_t s = 0; s < first->series.size(); ++s) {
    const std::string& name = first->series[s].name;
    std::vector<double> finals;
    for (const auto& r : runs) {
      if (r.divergence) continue;
      for (const auto& series : r.series)
        if (series.name == name && !series.points.empty()) finals.push_back(series.points.back().second);
    }
    if (finals.empty()) continue;
    const double n = static_cast<double>(finals.size());
    double mean = 0.0;
    for (double v : finals) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : finals) var += (v - mean) * (v - mean);
    const double se = finals.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    out.push_back({name, mean, mean - 1.96 * se, mean + 1.96 * se, finals.size()});
  }
  return out;
}

std::string metrics_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream out;
  out << "rep,iteration,metric,value\n";
  for (const auto& r : runs) {
    std::map<std::size_t, std::vector<std::pair<std::string, double>>> by_iteration;
    for (const auto& s : r.series)
      for (const auto& [it, v] : s.points) by_iteration[it].emplace_back(s.name, v);
    for (const auto& [it, row] : by_iteration)
      for (const auto& [name, v] : row) out << r.rep << ',' << it << ',' << name << ',' << format_double(v) << '\n';
  }
  return out.str();
}

std::vector<RunRecord> parse_metrics_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "rep,iteration,metric,value")
    throw Error("metrics csv: missing header");
  std::map<std::size_t, RunRecord> reps;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string rep, it, name, value;
    if (!std::getline(fields, rep, ',') || !std::getline(fields, it, ',') || !std::getline(fields, name, ',') ||
        !std::getline(fields, value))
      throw Error("metrics csv: malformed row '" + line + "'");
    const auto r = static_cast<std::size_t>(parse_int("rep", rep));
    RunRecord& rec = reps[r];
    rec.rep = r;
    auto found = std::find_if(rec.series.begin(), rec.series.end(), [&](const auto& s) { return s.name == name; });
    if (found == rec.series.end()) {
      rec.series.push_back({});
      rec.series.back().name = name;
      found = rec.series.end() - 1;
    }
    found->append(static_cast<std::size_t>(parse_int("iteration", it)), parse_double("value", value));
  }
  std::vector<RunRecord> out;
  for (auto& [r, rec] : reps) out.push_back(std::move(rec));
  return out;
}

std::string summary_json(const ExperimentResult& result) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& s : result.summary) j[s.name] = {{"mean", s.mean}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}};
  nlohmann::ordered_json diverged = nlohmann::ordered_json::array();
  for (const auto& r : result.runs)
    if (r.divergence) diverged.push_back({{"rep", r.rep}, {"message", *r.divergence}});
  j["diverged_reps"] = diverged;
  return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result = run_all(config);
  const std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + config.output + "': " + ec.message());

  write_file(dir / "metrics.csv", metrics_csv(result.runs));
  write_file(dir / "summary.json", summary_json(result));
  write_file(dir / "config.echo", serialize_config(config));

  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& r : result.runs) {
    nlohmann::ordered_json entry = {{"rep", r.rep},
                                    {"seed", r.seed},
                                    {"wall_seconds", r.wall_seconds},
                                    {"version", r.version},
                                    {"config_digest", config_digest(config)}};
    entry["divergence"] = r.divergence ? nlohmann::ordered_json(*r.divergence) : nlohmann::ordered_json(nullptr);
    runs.push_back(std::move(entry));
  }
  write_file(dir / "runs.json", runs.dump(2) + "\n");

  if (config.target == Target::Diffusion) {
    std::ostringstream out;
    out << "rep,step,mean,ci_low,ci_high\n";
    for (const auto& r : result.runs) {
      if (!r.path) continue;
      for (Eigen::Index t = 0; t < r.path->mean.size(); ++t)
        out << r.rep << ',' << (t + 1) << ',' << format_double(r.path->mean(t)) << ','
            << format_double(r.path->lower(t)) << ',' << format_double(r.path->upper(t)) << '\n';
    }
    write_file(dir / "diffusion_path.csv", out.str());
  }
  return result;
}

}  // namespace gsvgd::harness
