#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsvgd/types.hpp"

namespace gsvgd::metrics {

inline constexpr const char* kEnergyDistance = "energy_distance";
inline constexpr const char* kCovarianceError = "cov_error_frobenius";
inline constexpr const char* kDimAvgVariance = "dim_avg_var";

struct MetricSeries {
  std::string name;
  std::vector<std::pair<std::size_t, double>> points;  // (iteration, value), iterations increasing
  std::uint64_t seed = 0;
  std::string config_digest;

  /// Throws Error if `iteration` does not exceed the last recorded one.
  void append(std::size_t iteration, double value);
};

/// 2 E||X - Y|| - E||X - X'|| - E||Y - Y'|| over all pairs (V-form).
double energy_distance(const Matrix& x, const Matrix& y);

/// Energy distance against a fixed reference sample, caching the reference self term.
class EnergyDistanceReference {
 public:
  explicit EnergyDistanceReference(Matrix reference);
  double operator()(const Matrix& x) const;
  const Matrix& reference() const { return ref_; }

 private:
  Matrix ref_;
  double self_term_;
};

/// Unbiased (1/(n-1)) sample covariance of the rows of x.
Matrix sample_covariance(const Matrix& x);

/// ||sample_covariance(x) - reference||_F.
double covariance_error(const Matrix& x, const Matrix& reference);

/// Mean over coordinates of the unbiased per-coordinate sample variance.
double dim_avg_marginal_variance(const Matrix& x);

}  // namespace gsvgd::metrics
