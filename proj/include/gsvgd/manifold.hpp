#pragma once

#include <span>
#include <vector>

#include "gsvgd/rng.hpp"
#include "gsvgd/types.hpp"

namespace gsvgd::manifold {

/// Tolerance on ||A^T A - I||_F accepted for a projector.
inline constexpr double kOrthonormalityTol = 1e-10;
/// Smallest singular value of A + Delta below which a retraction is refused.
inline constexpr double kRankTol = 1e-12;

/// Column-orthonormal d x m matrix A representing the subspace [A] in Gr(d, m).
class Projector {
 public:
  /// Throws DimensionError if m == 0 or m > d, and DegenerateError if the
  /// columns are not orthonormal to kOrthonormalityTol.
  explicit Projector(Matrix a);

  const Matrix& matrix() const noexcept { return a_; }
  Eigen::Index dim() const noexcept { return a_.rows(); }
  Eigen::Index rank() const noexcept { return a_.cols(); }

 private:
  Matrix a_;
};

/// Element of the tangent space at some base projector A, i.e. A^T delta = 0.
struct TangentVector {
  Matrix delta;
};

/// ||A^T A - I||_F.
double orthonormality_error(const Matrix& a);

/// (I - A A^T) G.
TangentVector tangent_project(const Projector& a, const Matrix& g);

/// Polar retraction: U V^T from the thin SVD A + delta = U S V^T.
Projector polar_retract(const Projector& a, const Matrix& delta);

/// (I - A A^T) xi with xi a d x m matrix of i.i.d. N(0, 1) entries.
TangentVector sample_tangent_noise(const Projector& a, Rng& rng);

/// M projectors built from consecutive blocks of m canonical basis vectors.
std::vector<Projector> init_projectors(Eigen::Index d, Eigen::Index m, Eigen::Index count);

/// Jointly re-orthonormalizes a batch through a Householder QR of the
/// column-wise concatenation, then splits the Q columns back into projectors
/// of the original ranks. Diagonal of R is made nonnegative.
std::vector<Projector> reorthonormalize(std::span<const Projector> projectors);

/// ||A A^T - B B^T||_F.
double subspace_distance(const Projector& a, const Projector& b);

/// Projector drawn uniformly from Gr(d, m) (QR of a Gaussian matrix).
Projector random_projector(Eigen::Index d, Eigen::Index m, Rng& rng);

/// Haar-random m x m orthogonal matrix.
Matrix random_orthogonal(Eigen::Index m, Rng& rng);

/// Column-wise concatenation [A_1 ... A_M].
Matrix concatenate(std::span<const Projector> projectors);

}  // namespace gsvgd::manifold
