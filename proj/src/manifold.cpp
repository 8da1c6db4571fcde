#include "gsvgd/manifold.hpp"

#include <cmath>
#include <string>

#include "gsvgd/errors.hpp"

namespace gsvgd::manifold {

namespace {

void require_same_shape(const Matrix& a, const Matrix& g, const char* what) {
  if (a.rows() != g.rows() || a.cols() != g.cols()) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", got " + std::to_string(g.rows()) + "x" +
                         std::to_string(g.cols()));
  }
}

// Thin QR with the diagonal of R made nonnegative; returns the Q factor.
Matrix signed_thin_q(const Matrix& x, const char* what) {
  const Eigen::Index d = x.rows();
  const Eigen::Index k = x.cols();
  if (k > d) throw DegenerateError(std::string(what) + ": total rank exceeds ambient dimension");
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix q = qr.householderQ() * Matrix::Identity(d, k);
  const Matrix& r = qr.matrixQR();
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < k; ++j) {
    if (std::abs(r(j, j)) < kRankTol * scale)
      throw DegenerateError(std::string(what) + ": rank-deficient column block");
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

Projector::Projector(Matrix a) : a_(std::move(a)) {
  if (a_.cols() < 1 || a_.cols() > a_.rows())
    throw DimensionError("projector rank must satisfy 1 <= m <= d");
  if (orthonormality_error(a_) > kOrthonormalityTol)
    throw DegenerateError("projector columns are not orthonormal");
}

double orthonormality_error(const Matrix& a) {
  return (a.transpose() * a - Matrix::Identity(a.cols(), a.cols())).norm();
}

TangentVector tangent_project(const Projector& a, const Matrix& g) {
  require_same_shape(a.matrix(), g, "tangent_project");
  const Matrix& am = a.matrix();
  return {g - am * (am.transpose() * g)};
}

Projector polar_retract(const Projector& a, const Matrix& delta) {
  require_same_shape(a.matrix(), delta, "polar_retract");
  Eigen::JacobiSVD<Matrix> svd(a.matrix() + delta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) < kRankTol)
    throw DegenerateError("polar_retract: A + delta is rank deficient");
  Matrix u = svd.matrixU();
  Matrix v = svd.matrixV();
  // Largest-magnitude entry of each U column is made positive.
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index imax = 0;
    u.col(j).cwiseAbs().maxCoeff(&imax);
    if (u(imax, j) < 0.0) {
      u.col(j) = -u.col(j);
      v.col(j) = -v.col(j);
    }
  }
  return Projector(u * v.transpose());
}

TangentVector sample_tangent_noise(const Projector& a, Rng& rng) {
  Matrix xi = rng.normal_matrix(a.dim(), a.rank());
  return tangent_project(a, xi);
}

std::vector<Projector> init_projectors(Eigen::Index d, Eigen::Index m, Eigen::Index count) {
  if (d < 1 || m < 1 || count < 1)
    throw ConfigError("M", "d, m and M must be positive");
  if (count * m > d)
    throw ConfigError("M", "M*m = " + std::to_string(count * m) + " exceeds d = " + std::to_string(d));
  std::vector<Projector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index l = 0; l < count; ++l) {
    Matrix a = Matrix::Zero(d, m);
    for (Eigen::Index c = 0; c < m; ++c) a(l * m + c, c) = 1.0;
    out.emplace_back(std::move(a));
  }
  return out;
}

Matrix concatenate(std::span<const Projector> projectors) {
  if (projectors.empty()) return Matrix();
  const Eigen::Index d = projectors.front().dim();
  Eigen::Index total = 0;
  for (const auto& p : projectors) {
    if (p.dim() != d) throw DimensionError("concatenate: projectors have different ambient dimensions");
    total += p.rank();
  }
  Matrix out(d, total);
  Eigen::Index col = 0;
  for (const auto& p : projectors) {
    out.middleCols(col, p.rank()) = p.matrix();
    col += p.rank();
  }
  return out;
}

std::vector<Projector> reorthonormalize(std::span<const Projector> projectors) {
  if (projectors.empty()) return {};
  Matrix q = signed_thin_q(concatenate(projectors), "reorthonormalize");
  std::vector<Projector> out;
  out.reserve(projectors.size());
  Eigen::Index col = 0;
  for (const auto& p : projectors) {
    out.emplace_back(q.middleCols(col, p.rank()));
    col += p.rank();
  }
  return out;
}

double subspace_distance(const Projector& a, const Projector& b) {
  if (a.dim() != b.dim() || a.rank() != b.rank())
    throw DimensionError("subspace_distance: projectors must share d and m");
  const Matrix& am = a.matrix();
  const Matrix& bm = b.matrix();
  return (am * am.transpose() - bm * bm.transpose()).norm();
}

Projector random_projector(Eigen::Index d, Eigen::Index m, Rng& rng) {
  if (m < 1 || m > d) throw DimensionError("random_projector: need 1 <= m <= d");
  return Projector(signed_thin_q(rng.normal_matrix(d, m), "random_projector"));
}

Matrix random_orthogonal(Eigen::Index m, Rng& rng) {
  return signed_thin_q(rng.normal_matrix(m, m), "random_orthogonal");
}

}  // namespace gsvgd::manifold
