#include "gsvgd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gsvgd/errors.hpp"

namespace gsvgd::metrics {

namespace {

// mean over all (i, j) of ||a_i - b_j||, with points stored as columns.
double mean_cross_distance(const Matrix& at, const Matrix& bt) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < at.cols(); ++i)
    for (Eigen::Index j = 0; j < bt.cols(); ++j) sum += (at.col(i) - bt.col(j)).norm();
  return sum / (static_cast<double>(at.cols()) * static_cast<double>(bt.cols()));
}

// Same with a == b, exploiting symmetry; diagonal terms are zero.
double mean_self_distance(const Matrix& at) {
  const Eigen::Index n = at.cols();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) sum += (at.col(i) - at.col(j)).norm();
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n));
}

void require_rows(const Matrix& x, Eigen::Index min_rows, const char* what) {
  if (x.rows() < min_rows)
    throw DimensionError(std::string(what) + ": need at least " + std::to_string(min_rows) + " samples");
}

}  // namespace

void MetricSeries::append(std::size_t iteration, double value) {
  if (!points.empty() && iteration <= points.back().first)
    throw Error("MetricSeries " + name + ": iterations must be strictly increasing");
  points.emplace_back(iteration, value);
}

double energy_distance(const Matrix& x, const Matrix& y) {
  require_rows(x, 1, "energy_distance");
  require_rows(y, 1, "energy_distance");
  if (x.cols() != y.cols()) throw DimensionError("energy_distance: sample dimensions differ");
  // Fixed operand order keeps the result bitwise symmetric in (x, y).
  const bool swap = y.rows() < x.rows() ||
                    (y.rows() == x.rows() && std::lexicographical_compare(y.data(), y.data() + y.size(), x.data(),
                                                                          x.data() + x.size()));
  const Matrix at = swap ? y.transpose() : x.transpose();
  const Matrix bt = swap ? x.transpose() : y.transpose();
  return 2.0 * mean_cross_distance(at, bt) - (mean_self_distance(at) + mean_self_distance(bt));
}

EnergyDistanceReference::EnergyDistanceReference(Matrix reference) : ref_(std::move(reference)) {
  require_rows(ref_, 1, "EnergyDistanceReference");
  self_term_ = mean_self_distance(ref_.transpose());
}

double EnergyDistanceReference::operator()(const Matrix& x) const {
  require_rows(x, 1, "energy_distance");
  if (x.cols() != ref_.cols()) throw DimensionError("energy_distance: sample dimensions differ");
  const Matrix xt = x.transpose();
  return 2.0 * mean_cross_distance(xt, ref_.transpose()) - mean_self_distance(xt) - self_term_;
}

Matrix sample_covariance(const Matrix& x) {
  require_rows(x, 2, "sample_covariance");
  const Matrix centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

double covariance_error(const Matrix& x, const Matrix& reference) {
  if (reference.rows() != x.cols() || reference.cols() != x.cols())
    throw DimensionError("covariance_error: reference covariance has the wrong shape");
  return (sample_covariance(x) - reference).norm();
}

double dim_avg_marginal_variance(const Matrix& x) {
  require_rows(x, 2, "dim_avg_marginal_variance");
  const Matrix centered = x.rowwise() - x.colwise().mean();
  return centered.array().square().colwise().sum().mean() / static_cast<double>(x.rows() - 1);
}

}  // namespace gsvgd::metrics
