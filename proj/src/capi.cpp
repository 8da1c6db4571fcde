#include "gsvgd/gsvgd.h"

#include <cstring>
#include <exception>
#include <string>

#include "gsvgd/check.hpp"
#include "gsvgd/errors.hpp"
#include "gsvgd/harness.hpp"
#include "gsvgd/discrepancy.hpp"
#include "gsvgd/manifold.hpp"
#include "gsvgd/metrics.hpp"

struct gsvgd_config {
  gsvgd::harness::ExperimentConfig value;
};

struct gsvgd_result {
  gsvgd::harness::ExperimentResult value;
};

namespace {

thread_local std::string last_error;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

gsvgd::Matrix from_row_major(const double* data, size_t rows, size_t cols) {
  return Eigen::Map<const RowMajor>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

gsvgd_status fail(gsvgd_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Maps library exceptions onto status codes.
template <typename F>
gsvgd_status guarded(F&& f) {
  try {
    f();
    return GSVGD_OK;
  } catch (const gsvgd::DimensionError& e) {
    return fail(GSVGD_ERR_DIMENSION, e.what());
  } catch (const gsvgd::DegenerateError& e) {
    return fail(GSVGD_ERR_DEGENERATE, e.what());
  } catch (const gsvgd::ConfigError& e) {
    return fail(GSVGD_ERR_CONFIG, e.what());
  } catch (const gsvgd::DivergenceError& e) {
    return fail(GSVGD_ERR_DIVERGED, e.what());
  } catch (const gsvgd::IoError& e) {
    return fail(GSVGD_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(GSVGD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GSVGD_ERR_INTERNAL, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* gsvgd_version(void) { return gsvgd::harness::kVersion; }

const char* gsvgd_last_error(void) { return last_error.c_str(); }

gsvgd_status gsvgd_config_parse(const char* text, gsvgd_config** out) {
  if (!text || !out) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new gsvgd_config{gsvgd::harness::parse_config(text)}; });
}

gsvgd_status gsvgd_config_load(const char* path, gsvgd_config** out) {
  if (!path || !out) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new gsvgd_config{gsvgd::harness::load_config(path)}; });
}

void gsvgd_config_free(gsvgd_config* config) { delete config; }

gsvgd_status gsvgd_config_set_seed(gsvgd_config* config, uint64_t seed) {
  if (!config) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null config");
  config->value.seed = seed;
  return GSVGD_OK;
}

gsvgd_status gsvgd_config_set_output(gsvgd_config* config, const char* dir) {
  if (!config || !dir) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null argument");
  if (*dir == '\0') return fail(GSVGD_ERR_CONFIG, "output: must not be empty");
  config->value.output = dir;
  return GSVGD_OK;
}

gsvgd_status gsvgd_config_echo(const gsvgd_config* config, char* buffer, size_t capacity, size_t* needed) {
  if (!config) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null config");
  const std::string text = gsvgd::harness::serialize_config(config->value);
  if (needed) *needed = text.size();
  if (buffer && capacity > 0) {
    const size_t n = std::min(capacity - 1, text.size());
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
  }
  return GSVGD_OK;
}

gsvgd_status gsvgd_run_experiment(const gsvgd_config* config, gsvgd_result** out) {
  if (!config || !out) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  const gsvgd_status status =
      guarded([&] { *out = new gsvgd_result{gsvgd::harness::run_experiment(config->value)}; });
  if (status != GSVGD_OK) return status;
  const auto& res = (*out)->value;
  if (!res.runs.empty() && res.diverged() == res.runs.size())
    return fail(GSVGD_ERR_DIVERGED, "all repetitions diverged: " + *res.runs.front().divergence);
  return GSVGD_OK;
}

void gsvgd_result_free(gsvgd_result* result) { delete result; }

size_t gsvgd_result_repetitions(const gsvgd_result* result) { return result ? result->value.runs.size() : 0; }

size_t gsvgd_result_diverged(const gsvgd_result* result) { return result ? result->value.diverged() : 0; }

size_t gsvgd_result_metric_count(const gsvgd_result* result) { return result ? result->value.summary.size() : 0; }

gsvgd_status gsvgd_result_metric(const gsvgd_result* result, size_t index, const char** name, double* mean,
                                 double* ci_low, double* ci_high) {
  if (!result) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null result");
  if (index >= result->value.summary.size()) return fail(GSVGD_ERR_INVALID_ARGUMENT, "metric index out of range");
  const auto& s = result->value.summary[index];
  if (name) *name = s.name.c_str();
  if (mean) *mean = s.mean;
  if (ci_low) *ci_low = s.ci_low;
  if (ci_high) *ci_high = s.ci_high;
  return GSVGD_OK;
}

gsvgd_status gsvgd_check(gsvgd_check_callback callback, void* user, size_t* failures) {
  return guarded([&] {
    size_t failed = 0;
    for (const auto& r : gsvgd::check::run_checks()) {
      if (!r.passed) ++failed;
      if (callback) callback(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
    }
    if (failures) *failures = failed;
  });
}

gsvgd_status gsvgd_energy_distance(const double* x, size_t n, const double* y, size_t k, size_t d, double* out) {
  if (!x || !y || !out) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = gsvgd::metrics::energy_distance(from_row_major(x, n, d), from_row_major(y, k, d)); });
}

gsvgd_status gsvgd_ksd_a(const double* x, const double* scores, size_t n, size_t d, const double* a, size_t m,
                         gsvgd_kernel_family family, double sigma2, double* out) {
  if (!x || !scores || !a || !out) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null argument");
  if (family != GSVGD_KERNEL_GAUSSIAN_RBF && family != GSVGD_KERNEL_IMQ)
    return fail(GSVGD_ERR_INVALID_ARGUMENT, "unknown kernel family");
  return guarded([&] {
    const auto k = family == GSVGD_KERNEL_IMQ ? gsvgd::kernel::RadialKernelSpec::imq(sigma2)
                                              : gsvgd::kernel::RadialKernelSpec::gaussian(sigma2);
    gsvgd::manifold::Projector proj(from_row_major(a, d, m));
    *out = gsvgd::discrepancy::ksd_a_vstat(from_row_major(x, n, d), from_row_major(scores, n, d), proj, k);
  });
}

gsvgd_status gsvgd_polar_retract(const double* a, const double* delta, size_t d, size_t m, double* out) {
  if (!a || !delta || !out) return fail(GSVGD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    gsvgd::manifold::Projector proj(from_row_major(a, d, m));
    const auto next = gsvgd::manifold::polar_retract(proj, from_row_major(delta, d, m));
    Eigen::Map<RowMajor>(out, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m)) = next.matrix();
  });
}

}  // extern "C"
