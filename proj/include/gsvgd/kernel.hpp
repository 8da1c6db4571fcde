#pragma once

#include <cmath>
#include <vector>

#include "gsvgd/types.hpp"

namespace gsvgd::kernel {

enum class Family { GaussianRbf, Imq };

inline constexpr double kBandwidthFloor = 1e-8;

/// Radial kernel k(u, v) = Phi(||u - v||^2).
///   gaussian_rbf: Phi(s) = exp(-s / (2 sigma2))
///   imq:          Phi(s) = (c + s / sigma2)^beta,  beta in (-1, 0), c > 0
struct RadialKernelSpec {
  Family family = Family::GaussianRbf;
  double sigma2 = 1.0;
  double beta = -0.5;
  double c = 1.0;

  static RadialKernelSpec gaussian(double sigma2);
  static RadialKernelSpec imq(double sigma2, double beta = -0.5, double c = 1.0);

  /// Throws ConfigError on sigma2 <= 0, c <= 0 or beta outside (-1, 0).
  void validate() const;

  RadialKernelSpec with_bandwidth(double s2) const {
    RadialKernelSpec out = *this;
    out.sigma2 = s2;
    return out;
  }
};

/// Phi and its first three derivatives at one squared distance.
struct RadialDerivatives {
  double phi;
  double d1;
  double d2;
  double d3;
};

inline RadialDerivatives derivatives(const RadialKernelSpec& k, double s) {
  if (k.family == Family::GaussianRbf) {
    const double a = 1.0 / (2.0 * k.sigma2);
    const double p = std::exp(-a * s);
    return {p, -a * p, a * a * p, -a * a * a * p};
  }
  const double inv = 1.0 / k.sigma2;
  const double b = k.c + s * inv;
  const double p = std::pow(b, k.beta);
  const double d1 = k.beta * inv * p / b;
  const double d2 = (k.beta - 1.0) * inv * d1 / b;
  const double d3 = (k.beta - 2.0) * inv * d2 / b;
  return {p, d1, d2, d3};
}

/// Elementwise Phi^(order)(s) for an array of squared distances, order in 0..3.
Eigen::ArrayXXd phi_array(const RadialKernelSpec& k, const Eigen::ArrayXXd& s, int order);

double eval(const RadialKernelSpec& k, const Vector& u, const Vector& v);

/// Gradient of eval with respect to its second argument.
Vector grad2(const RadialKernelSpec& k, const Vector& u, const Vector& v);

/// sum_i d^2 k / du_i dv_i.
double trace_grad12(const RadialKernelSpec& k, const Vector& u, const Vector& v);

double phi(const RadialKernelSpec& k, double s);

/// Phi'(s); throws DimensionError for s < 0.
double phi_prime(const RadialKernelSpec& k, double s);

struct Bandwidth {
  double sigma2;
  bool degenerate;
};

/// sigma2 = med^2 / (2 log n_for_log) with med the lower median of the pairwise
/// Euclidean distances between rows of `points`; floored at kBandwidthFloor.
Bandwidth median_heuristic(const Matrix& points, double n_for_log);

/// Same rule from a list of pairwise squared distances; the list is reordered.
Bandwidth median_heuristic_from_squared(std::vector<double>& squared_distances, double n_for_log);

}  // namespace gsvgd::kernel
