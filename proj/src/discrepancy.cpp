#include "gsvgd/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gsvgd/errors.hpp"

namespace gsvgd::discrepancy {

namespace {

void check_inputs(const ParticleSet& x, const Matrix& scores, const Matrix& a) {
  if (x.rows() == 0) throw DimensionError("empty particle set");
  if (scores.rows() != x.rows() || scores.cols() != x.cols())
    throw DimensionError("scores must have the same shape as the particles");
  if (a.rows() != x.cols())
    throw DimensionError("projector has " + std::to_string(a.rows()) + " rows, particles have dimension " +
                         std::to_string(x.cols()));
}

}  // namespace

KsdWorkspace::KsdWorkspace(const ParticleSet& x, const Matrix& scores, const Matrix& a,
                           const RadialKernelSpec& k, bool with_gradient)
    : a_(a), has_gradient_(with_gradient) {
  check_inputs(x, scores, a);
  const Eigen::Index n = x.rows();
  const Eigen::Index m = a.cols();
  const double dm = static_cast<double>(m);
  u_ = x * a;
  t_ = scores * a;

  // Accumulators, one row per particle. For each i the pairs j > i are
  // processed as contiguous column segments so the kernel evaluations vectorize.
  Matrix kt = Matrix::Zero(n, m);
  Matrix bu = Matrix::Zero(n, m);
  Matrix bt;
  Matrix cu;
  Vector b1 = Vector::Zero(n);
  Vector c1;
  if (with_gradient) {
    bt = Matrix::Zero(n, m);
    cu = Matrix::Zero(n, m);
    c1 = Vector::Zero(n);
  }

  const auto d0 = kernel::derivatives(k, 0.0);
  double diag_sum = 0.0;
  double off_sum = 0.0;
  Eigen::ArrayXd rho(n), tdot(n), dtr(n), phi(n), d1(n), d2(n), d3(n), cij(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tii = t_.row(i).squaredNorm();
    kt.row(i) += d0.phi * t_.row(i);
    diag_sum += tii * d0.phi - 2.0 * dm * d0.d1;

    const Eigen::Index len = n - i - 1;
    if (len == 0) continue;
    const Eigen::Index j0 = i + 1;
    auto r_rho = rho.head(len);
    auto r_tdot = tdot.head(len);
    auto r_dtr = dtr.head(len);
    r_rho.setZero();
    r_tdot.setZero();
    r_dtr.setZero();
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto uc = u_.col(c).segment(j0, len).array();
      const auto tc = t_.col(c).segment(j0, len).array();
      const double uic = u_(i, c);
      const double tic = t_(i, c);
      r_rho += (uic - uc).square();
      r_tdot += tic * tc;
      r_dtr += (tic - tc) * (uic - uc);
    }
    auto p = phi.head(len);
    auto p1 = d1.head(len);
    auto p2 = d2.head(len);
    if (k.family == kernel::Family::GaussianRbf) {
      const double g = 1.0 / (2.0 * k.sigma2);
      p = (-g * r_rho).exp();
      p1 = -g * p;
      p2 = (g * g) * p;
      if (with_gradient) d3.head(len) = (-g * g * g) * p;
    } else {
      const double inv = 1.0 / k.sigma2;
      const Eigen::ArrayXd base = k.c + inv * r_rho;
      p = base.pow(k.beta);
      p1 = (k.beta * inv) * p / base;
      p2 = ((k.beta - 1.0) * inv) * p1 / base;
      if (with_gradient) d3.head(len) = ((k.beta - 2.0) * inv) * p2 / base;
    }
    off_sum += (r_tdot * p - 2.0 * p1 * r_dtr - 2.0 * dm * p1 - 4.0 * p2 * r_rho).sum();

    for (Eigen::Index c = 0; c < m; ++c) {
      const auto uc = u_.col(c).segment(j0, len).array();
      const auto tc = t_.col(c).segment(j0, len).array();
      kt(i, c) += (p * tc).sum();
      kt.col(c).segment(j0, len).array() += p * t_(i, c);
      bu(i, c) += (p1 * uc).sum();
      bu.col(c).segment(j0, len).array() += p1 * u_(i, c);
    }
    b1(i) += p1.sum();
    b1.segment(j0, len).array() += p1;

    if (with_gradient) {
      auto cc = cij.head(len);
      cc = 2.0 * r_tdot * p1 - 4.0 * p2 * r_dtr - (4.0 * dm + 8.0) * p2 - 8.0 * d3.head(len) * r_rho;
      for (Eigen::Index c = 0; c < m; ++c) {
        const auto uc = u_.col(c).segment(j0, len).array();
        const auto tc = t_.col(c).segment(j0, len).array();
        bt(i, c) += (p1 * tc).sum();
        bt.col(c).segment(j0, len).array() += p1 * t_(i, c);
        cu(i, c) += (cc * uc).sum();
        cu.col(c).segment(j0, len).array() += cc * u_(i, c);
      }
      c1(i) += cc.sum();
      c1.segment(j0, len).array() += cc;
    }
  }

  const double nn = static_cast<double>(n);
  value_ = (diag_sum + 2.0 * off_sum) / (nn * nn);

  // sum_j B_ij (u_i - u_j) per particle, as N x m.
  const Matrix b_spread = (u_.array().colwise() * b1.array()).matrix() - bu;
  proj_update_ = (kt - 2.0 * b_spread) / nn;

  if (with_gradient) {
    const Matrix bt_spread = (t_.array().colwise() * b1.array()).matrix() - bt;
    const Matrix c_spread = (u_.array().colwise() * c1.array()).matrix() - cu;
    gradient_ = (2.0 * scores.transpose() * kt - 4.0 * scores.transpose() * b_spread -
                 4.0 * x.transpose() * bt_spread + 2.0 * x.transpose() * c_spread) /
                (nn * nn);
  }
}

const Matrix& KsdWorkspace::gradient() const {
  if (!has_gradient_) throw Error("KsdWorkspace built without gradient");
  return gradient_;
}

double ksd_a_vstat(const ParticleSet& x, const Matrix& scores, const Projector& a, const RadialKernelSpec& k) {
  return KsdWorkspace(x, scores, a.matrix(), k, false).value();
}

Matrix grad_a_ksd(const ParticleSet& x, const Matrix& scores, const Projector& a, const RadialKernelSpec& k) {
  return KsdWorkspace(x, scores, a.matrix(), k, true).gradient();
}

manifold::TangentVector riemannian_grad(const Projector& a, const Matrix& g) {
  return manifold::tangent_project(a, g);
}

GksdResult gksd_estimate(const ParticleSet& x, const Matrix& scores, const RadialKernelSpec& k, Eigen::Index m,
                         const GksdOptions& options, Rng& rng) {
  const Eigen::Index d = x.cols();
  if (m < 1 || m > d) throw ConfigError("m", "projection dimension must satisfy 1 <= m <= d");
  if (options.ascent_steps < 1) throw ConfigError("ascent_steps", "must be at least 1");
  const Eigen::Index blocks = d / m;
  const Eigen::Index starts = options.restarts > 0 ? options.restarts : blocks + 4;
  const Eigen::Index one_hot = std::min(starts, blocks);
  const auto basis = manifold::init_projectors(d, m, blocks);

  double best = -std::numeric_limits<double>::infinity();
  Projector best_a = basis.front();
  for (Eigen::Index s = 0; s < starts; ++s) {
    Projector a = s < one_hot ? basis[static_cast<std::size_t>(s)] : manifold::random_projector(d, m, rng);
    for (int step = 0; step <= options.ascent_steps; ++step) {
      const bool last = step == options.ascent_steps;
      KsdWorkspace ws(x, scores, a.matrix(), k, !last);
      if (ws.value() > best) {
        best = ws.value();
        best_a = a;
      }
      if (last) break;
      a = manifold::polar_retract(a, options.step * riemannian_grad(a, ws.gradient()).delta);
    }
  }
  return {best, best_a};
}

namespace {

// Shared pass for the two-sample form; returns value and (optionally) the
// Euclidean gradient.
std::pair<double, Matrix> two_sample_pass(const ParticleSet& x, const Matrix& diff, const Matrix& a,
                                          const RadialKernelSpec& k, bool with_gradient) {
  check_inputs(x, diff, a);
  const Eigen::Index n = x.rows();
  const Eigen::Index m = a.cols();
  const Matrix u = x * a;
  const Matrix e = diff * a;
  const Matrix ut = u.transpose();
  const Matrix et = e.transpose();
  Matrix ke = Matrix::Zero(m, n);
  Matrix cu = Matrix::Zero(m, n);
  Vector c1 = Vector::Zero(n);
  const double phi0 = kernel::phi(k, 0.0);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += et.col(i).squaredNorm() * phi0;
    ke.col(i) += phi0 * et.col(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double rho = (ut.col(i) - ut.col(j)).squaredNorm();
      const double edot = et.col(i).dot(et.col(j));
      const auto dk = kernel::derivatives(k, rho);
      sum += 2.0 * edot * dk.phi;
      if (with_gradient) {
        ke.col(i) += dk.phi * et.col(j);
        ke.col(j) += dk.phi * et.col(i);
        const double c = dk.d1 * edot;
        cu.col(i) += c * ut.col(j);
        cu.col(j) += c * ut.col(i);
        c1(i) += c;
        c1(j) += c;
      }
    }
  }
  const double nn = static_cast<double>(n);
  Matrix grad;
  if (with_gradient) {
    const Matrix c_spread = (u.array().colwise() * c1.array()).matrix() - cu.transpose();
    grad = (2.0 * diff.transpose() * ke.transpose() + 4.0 * x.transpose() * c_spread) / (nn * nn);
  }
  return {sum / (nn * nn), grad};
}

}  // namespace

double ksd_a_two_sample_oracle(const ParticleSet& samples, const ScoreFn& score_p, const ScoreFn& score_q,
                               const Projector& a, const RadialKernelSpec& k) {
  const Matrix diff = score_p(samples) - score_q(samples);
  return two_sample_pass(samples, diff, a.matrix(), k, false).first;
}

Matrix grad_alpha_oracle(const ParticleSet& samples, const ScoreFn& score_p, const ScoreFn& score_q,
                         const Projector& a, const RadialKernelSpec& k) {
  const Matrix diff = score_p(samples) - score_q(samples);
  return manifold::tangent_project(a, two_sample_pass(samples, diff, a.matrix(), k, true).second).delta;
}

Matrix stein_kernel_matrix(const ParticleSet& x, const Matrix& scores, const Projector& a,
                           const RadialKernelSpec& k) {
  check_inputs(x, scores, a.matrix());
  const Eigen::Index n = x.rows();
  const double dm = static_cast<double>(a.rank());
  const Matrix ut = (x * a.matrix()).transpose();
  const Matrix tt = (scores * a.matrix()).transpose();
  Matrix h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double rho = (ut.col(i) - ut.col(j)).squaredNorm();
      const double dtr = (tt.col(i) - tt.col(j)).dot(ut.col(i) - ut.col(j));
      const auto dk = kernel::derivatives(k, rho);
      const double v =
          tt.col(i).dot(tt.col(j)) * dk.phi - 2.0 * dk.d1 * dtr - 2.0 * dm * dk.d1 - 4.0 * dk.d2 * rho;
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

Matrix two_sample_kernel_matrix(const ParticleSet& x, const Matrix& score_diff, const Projector& a,
                                const RadialKernelSpec& k) {
  check_inputs(x, score_diff, a.matrix());
  const Eigen::Index n = x.rows();
  const Matrix ut = (x * a.matrix()).transpose();
  const Matrix et = (score_diff * a.matrix()).transpose();
  Matrix h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = et.col(i).dot(et.col(j)) * kernel::phi(k, (ut.col(i) - ut.col(j)).squaredNorm());
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

std::pair<double, double> bootstrap_vstat(const Matrix& h, int resamples, Rng& rng) {
  const Eigen::Index n = h.rows();
  if (n == 0 || h.cols() != n) throw DimensionError("bootstrap_vstat: expected a nonempty square matrix");
  if (resamples < 2) throw ConfigError("resamples", "need at least two bootstrap resamples");
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  // multinomial resample counts, one column per resample
  Matrix w = Matrix::Zero(n, resamples);
  for (int b = 0; b < resamples; ++b)
    for (Eigen::Index i = 0; i < n; ++i) w(pick(rng.engine()), b) += 1.0;
  const double nn = static_cast<double>(n);
  const Matrix hw = h.selfadjointView<Eigen::Upper>() * w;
  const Vector reps = (w.array() * hw.array()).colwise().sum().transpose() / (nn * nn);
  const double mean = reps.mean();
  const double var = (reps.array() - mean).square().sum() / (resamples - 1);
  return {mean, std::sqrt(var)};
}

}  // namespace gsvgd::discrepancy
