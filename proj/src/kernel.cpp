#include "gsvgd/kernel.hpp"

#include <algorithm>
#include <string>

#include "gsvgd/errors.hpp"

namespace gsvgd::kernel {

namespace {

void require_same_length(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw DimensionError("kernel arguments differ in length: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
}

}  // namespace

RadialKernelSpec RadialKernelSpec::gaussian(double sigma2) {
  RadialKernelSpec k;
  k.family = Family::GaussianRbf;
  k.sigma2 = sigma2;
  k.validate();
  return k;
}

RadialKernelSpec RadialKernelSpec::imq(double sigma2, double beta, double c) {
  RadialKernelSpec k;
  k.family = Family::Imq;
  k.sigma2 = sigma2;
  k.beta = beta;
  k.c = c;
  k.validate();
  return k;
}

void RadialKernelSpec::validate() const {
  if (!(sigma2 > 0.0)) throw ConfigError("kernel.sigma2", "bandwidth must be positive");
  if (family == Family::Imq) {
    if (!(c > 0.0)) throw ConfigError("kernel.c", "imq offset must be positive");
    if (!(beta > -1.0 && beta < 0.0)) throw ConfigError("kernel.beta", "imq exponent must lie in (-1, 0)");
  }
}

Eigen::ArrayXXd phi_array(const RadialKernelSpec& k, const Eigen::ArrayXXd& s, int order) {
  if (k.family == Family::GaussianRbf) {
    const double a = 1.0 / (2.0 * k.sigma2);
    Eigen::ArrayXXd p = (-a * s).exp();
    const double scale = std::pow(-a, order);
    return order == 0 ? p : Eigen::ArrayXXd(scale * p);
  }
  const double inv = 1.0 / k.sigma2;
  Eigen::ArrayXXd b = k.c + s * inv;
  double coeff = 1.0;
  for (int r = 0; r < order; ++r) coeff *= (k.beta - r) * inv;
  return coeff * b.pow(k.beta - order);
}

double phi(const RadialKernelSpec& k, double s) { return derivatives(k, s).phi; }

double phi_prime(const RadialKernelSpec& k, double s) {
  if (s < 0.0) throw DimensionError("phi_prime: squared distance must be nonnegative");
  return derivatives(k, s).d1;
}

double eval(const RadialKernelSpec& k, const Vector& u, const Vector& v) {
  require_same_length(u, v);
  return derivatives(k, (u - v).squaredNorm()).phi;
}

Vector grad2(const RadialKernelSpec& k, const Vector& u, const Vector& v) {
  require_same_length(u, v);
  const Vector r = u - v;
  return -2.0 * derivatives(k, r.squaredNorm()).d1 * r;
}

double trace_grad12(const RadialKernelSpec& k, const Vector& u, const Vector& v) {
  require_same_length(u, v);
  const double s = (u - v).squaredNorm();
  const auto dk = derivatives(k, s);
  return -2.0 * static_cast<double>(u.size()) * dk.d1 - 4.0 * s * dk.d2;
}

Bandwidth median_heuristic_from_squared(std::vector<double>& sq, double n_for_log) {
  if (sq.empty()) throw DimensionError("median_heuristic: need at least two points");
  if (!(n_for_log >= 2.0)) throw DimensionError("median_heuristic: n_for_log must be >= 2");
  const auto mid = sq.begin() + static_cast<std::ptrdiff_t>((sq.size() - 1) / 2);
  std::nth_element(sq.begin(), mid, sq.end());
  const double med2 = std::max(*mid, 0.0);
  const double sigma2 = med2 / (2.0 * std::log(n_for_log));
  if (med2 == 0.0 || sigma2 < kBandwidthFloor) return {kBandwidthFloor, med2 == 0.0};
  return {sigma2, false};
}

Bandwidth median_heuristic(const Matrix& points, double n_for_log) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw DimensionError("median_heuristic: need at least two points");
  std::vector<double> sq(static_cast<std::size_t>(n * (n - 1) / 2));
  Eigen::ArrayXd row(n);
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Eigen::Index len = n - i - 1;
    auto r = row.head(len);
    r.setZero();
    for (Eigen::Index c = 0; c < points.cols(); ++c)
      r += (points.col(c).segment(i + 1, len).array() - points(i, c)).square();
    std::copy(r.data(), r.data() + len, sq.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += static_cast<std::size_t>(len);
  }
  return median_heuristic_from_squared(sq, n_for_log);
}

}  // namespace gsvgd::kernel
