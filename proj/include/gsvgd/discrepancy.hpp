#pragma once

#include <functional>
#include <utility>

#include "gsvgd/kernel.hpp"
#include "gsvgd/manifold.hpp"
#include "gsvgd/rng.hpp"
#include "gsvgd/types.hpp"

namespace gsvgd::discrepancy {

using manifold::Projector;
using kernel::RadialKernelSpec;

/// Everything one projector contributes in a single pass over particle pairs:
/// the KSD_A V-statistic, the projected Stein update, and the Euclidean
/// gradient of the V-statistic with respect to the entries of A.
///
/// The workspace is immutable; build a new one whenever particles, scores, A
/// or the bandwidth change.
class KsdWorkspace {
 public:
  /// x, scores: N x d (row i is x_i and s_p(x_i)); a: d x m.
  KsdWorkspace(const ParticleSet& x, const Matrix& scores, const Matrix& a, const RadialKernelSpec& k,
               bool with_gradient);

  double value() const { return value_; }

  /// N x m matrix whose row i is
  /// (1/N) sum_j [ t_j k(u_j, u_i) + grad_1 k(u_j, u_i) ],  u = A^T x, t = A^T s.
  const Matrix& projected_update() const { return proj_update_; }

  /// projected_update() mapped back through A (N x d, rows in span A).
  Matrix update() const { return proj_update_ * a_.transpose(); }

  /// d x m; only available when constructed with_gradient.
  const Matrix& gradient() const;

  const Matrix& projected_particles() const { return u_; }
  const Matrix& projected_scores() const { return t_; }

 private:
  Matrix a_;
  Matrix u_;
  Matrix t_;
  double value_ = 0.0;
  Matrix proj_update_;
  Matrix gradient_;
  bool has_gradient_ = false;
};

/// (1/N^2) sum_ij u_p(A^T x_i, A^T x_j) with the projected Stein kernel.
double ksd_a_vstat(const ParticleSet& x, const Matrix& scores, const Projector& a, const RadialKernelSpec& k);

/// Euclidean gradient of ksd_a_vstat with respect to A (bandwidth held fixed).
Matrix grad_a_ksd(const ParticleSet& x, const Matrix& scores, const Projector& a, const RadialKernelSpec& k);

/// Pi_A G.
manifold::TangentVector riemannian_grad(const Projector& a, const Matrix& g);

struct GksdOptions {
  int ascent_steps = 200;
  double step = 0.05;
  /// Total starts: the first min(restarts, floor(d/m)) are one-hot blocks,
  /// the remainder uniformly random projectors.
  int restarts = 0;  // 0 selects floor(d/m) + 4
};

struct GksdResult {
  double value;
  Projector argmax;
};

/// Riemannian gradient ascent of KSD_A over Gr(d, m) from several starts;
/// returns the best value seen and the projector that attained it.
GksdResult gksd_estimate(const ParticleSet& x, const Matrix& scores, const RadialKernelSpec& k,
                         Eigen::Index m, const GksdOptions& options, Rng& rng);

using ScoreFn = std::function<Matrix(const ParticleSet&)>;

/// V-statistic of (A^T d_i) . (A^T d_j) k(A^T x_i, A^T x_j) with d = s_p - s_q.
double ksd_a_two_sample_oracle(const ParticleSet& samples, const ScoreFn& score_p, const ScoreFn& score_q,
                               const Projector& a, const RadialKernelSpec& k);

/// Riemannian gradient of the two-sample form,
/// 2 Pi_A (1/N^2) sum_ij [ k d_j d_i^T A + Phi'(||A^T w||^2) (d_j^T A A^T d_i) w w^T A ],
/// w = x_i - x_j.
Matrix grad_alpha_oracle(const ParticleSet& samples, const ScoreFn& score_p, const ScoreFn& score_q,
                         const Projector& a, const RadialKernelSpec& k);

/// Dense N x N projected Stein kernel matrix (entries averaged give ksd_a_vstat).
Matrix stein_kernel_matrix(const ParticleSet& x, const Matrix& scores, const Projector& a,
                           const RadialKernelSpec& k);

/// Dense N x N matrix of the two-sample quadratic form.
Matrix two_sample_kernel_matrix(const ParticleSet& x, const Matrix& score_diff, const Projector& a,
                                const RadialKernelSpec& k);

/// Nonparametric bootstrap of the V-statistic w^T H w / N^2 with multinomial
/// resample counts w. Returns (mean of replicates, standard deviation).
std::pair<double, double> bootstrap_vstat(const Matrix& h, int resamples, Rng& rng);

}  // namespace gsvgd::discrepancy
