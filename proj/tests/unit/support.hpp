#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "gsvgd/types.hpp"

namespace test_support {

using gsvgd::Matrix;
using gsvgd::Vector;

inline double rel_error(const Matrix& got, const Matrix& want) {
  const double scale = std::max(want.norm(), 1e-12);
  return (got - want).norm() / scale;
}

inline double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

// Central differences of f with respect to every entry of x.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix xp = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double orig = xp(i, j);
      xp(i, j) = orig + h;
      const double fp = f(xp);
      xp(i, j) = orig - h;
      const double fm = f(xp);
      xp(i, j) = orig;
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace test_support
