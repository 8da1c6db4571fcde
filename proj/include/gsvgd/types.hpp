#pragma once

#include <Eigen/Dense>

namespace gsvgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// N x d matrix, one particle per row.
using ParticleSet = Eigen::MatrixXd;

}  // namespace gsvgd
