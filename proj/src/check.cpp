#include "gsvgd/check.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "gsvgd/discrepancy.hpp"
#include "gsvgd/errors.hpp"
#include "gsvgd/harness.hpp"
#include "gsvgd/manifold.hpp"
#include "gsvgd/metrics.hpp"
#include "gsvgd/model.hpp"
#include "gsvgd/sampler.hpp"

namespace gsvgd::check {

namespace {

using manifold::Projector;

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

CheckResult within(const std::string& name, double value, double tol) {
  return {name, std::isfinite(value) && value <= tol, "max error " + fmt(value) + " (tol " + fmt(tol) + ")"};
}

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-12, b.norm());
}

CheckResult retraction_closure() {
  Rng rng(1);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Projector a = manifold::random_projector(7, 3, rng);
    Matrix delta = 0.5 * rng.normal_matrix(7, 3);
    worst = std::max(worst, manifold::orthonormality_error(manifold::polar_retract(a, delta).matrix()));
  }
  return within("retraction_closure", worst, 1e-10);
}

CheckResult tangent_idempotence() {
  Rng rng(2);
  Projector a = manifold::random_projector(6, 2, rng);
  Matrix g = rng.normal_matrix(6, 2);
  Matrix once = manifold::tangent_project(a, g).delta;
  Matrix twice = manifold::tangent_project(a, once).delta;
  return within("tangent_idempotence", (once - twice).cwiseAbs().maxCoeff(), 1e-12);
}

CheckResult kernel_finite_differences() {
  Rng rng(3);
  const auto k = kernel::RadialKernelSpec::gaussian(0.7);
  const double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Vector u = rng.normal_matrix(3, 1);
    Vector v = rng.normal_matrix(3, 1);
    Vector fd(3);
    for (int c = 0; c < 3; ++c) {
      Vector vp = v, vm = v;
      vp(c) += h;
      vm(c) -= h;
      fd(c) = (kernel::eval(k, u, vp) - kernel::eval(k, u, vm)) / (2 * h);
    }
    worst = std::max(worst, rel_err(kernel::grad2(k, u, v), fd));
  }
  return within("kernel_grad2_fd", worst, 1e-6);
}

CheckResult score_finite_differences() {
  Rng rng(4);
  const auto target = model::make_xshaped_target(4);
  const auto diffusion = model::ConditionedDiffusionModel::with_reference_observations();
  double worst = 0.0;
  auto probe = [&](const model::ScoreModel& m, const Vector& x) {
    const double h = 1e-5;
    Vector fd(x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      Vector xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      fd(c) = (*m.log_density_unnormalized(xp) - *m.log_density_unnormalized(xm)) / (2 * h);
    }
    worst = std::max(worst, rel_err(m.score(x), fd));
  };
  for (int t = 0; t < 5; ++t) {
    probe(target, rng.normal_matrix(4, 1));
    probe(diffusion, 0.1 * rng.normal_matrix(100, 1));
  }
  return within("score_fd", worst, 1e-4);
}

CheckResult ksd_projector_invariance() {
  Rng rng(5);
  const auto k = kernel::RadialKernelSpec::gaussian(1.3);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    Matrix x = rng.normal_matrix(12, 5);
    Matrix s = rng.normal_matrix(12, 5);
    Projector a = manifold::random_projector(5, 2, rng);
    Projector ac(a.matrix() * manifold::random_orthogonal(2, rng));
    worst = std::max(worst, std::abs(discrepancy::ksd_a_vstat(x, s, a, k) - discrepancy::ksd_a_vstat(x, s, ac, k)));
  }
  return within("ksd_projector_invariance", worst, 1e-10);
}

CheckResult ksd_gradient_fd() {
  Rng rng(6);
  const auto k = kernel::RadialKernelSpec::gaussian(1.1);
  Matrix x = rng.normal_matrix(10, 6);
  Matrix s = rng.normal_matrix(10, 6);
  Projector a = manifold::random_projector(6, 2, rng);
  Matrix g = discrepancy::grad_a_ksd(x, s, a, k);
  Matrix fd(6, 2);
  const double h = 1e-5;
  auto value = [&](const Matrix& am) { return discrepancy::KsdWorkspace(x, s, am, k, false).value(); };
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) {
      Matrix ap = a.matrix(), am = a.matrix();
      ap(i, j) += h;
      am(i, j) -= h;
      fd(i, j) = (value(ap) - value(am)) / (2 * h);
    }
  return within("ksd_gradient_fd", rel_err(g, fd), 1e-5);
}

CheckResult svgd_reduction() {
  Rng rng(7);
  const auto target = model::GaussianTarget::standard(3);
  sampler::SamplerConfig cfg;
  cfg.m = 3;
  cfg.num_projectors = 1;
  cfg.delta = 0.0;
  cfg.anneal.t0 = 0.0;
  Matrix x = rng.normal_matrix(15, 3);
  auto state = sampler::make_initial_state(x, cfg);
  Matrix y = x;
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    state = sampler::gsvgd_step(state, target, cfg, rng);
    y = sampler::svgd_step(y, target, cfg.kernel, cfg.epsilon);
    worst = std::max(worst, (state.particles - y).cwiseAbs().maxCoeff());
  }
  return within("svgd_reduction", worst, 1e-8);
}

CheckResult image_confinement() {
  Rng rng(8);
  const auto target = model::make_multimodal_target(8);
  sampler::SamplerConfig cfg;
  cfg.m = 2;
  cfg.num_projectors = 2;
  auto state = sampler::make_initial_state(rng.normal_matrix(20, 8), cfg);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    Matrix basis = manifold::concatenate(state.projectors);
    auto next = sampler::gsvgd_step(state, target, cfg, rng);
    Matrix disp = (next.particles - state.particles).transpose();
    Matrix q = Eigen::HouseholderQR<Matrix>(basis).householderQ() * Matrix::Identity(8, basis.cols());
    worst = std::max(worst, (disp - q * (q.transpose() * disp)).cwiseAbs().maxCoeff());
    state = std::move(next);
  }
  return within("image_confinement", worst, 1e-10);
}

CheckResult energy_distance_symmetry() {
  Rng rng(9);
  Matrix x = rng.normal_matrix(30, 3);
  Matrix y = rng.normal_matrix(25, 3);
  const double a = metrics::energy_distance(x, y);
  const double b = metrics::energy_distance(y, x);
  return {"energy_distance_symmetry", a == b && a >= 0.0, "ED(x,y) = " + fmt(a) + ", ED(y,x) = " + fmt(b)};
}

CheckResult config_round_trip() {
  const auto c = harness::parse_config("method = gsvgd\ntarget = gaussian\nd = 50\nN = 500\niterations = 2000\nm = 1\nseed = 0\n");
  const std::string echo = harness::serialize_config(c);
  const bool ok = harness::serialize_config(harness::parse_config(echo)) == echo && c.num_projectors == 20;
  return {"config_round_trip", ok, "M = " + std::to_string(c.num_projectors)};
}

}  // namespace

std::vector<CheckResult> run_checks() {
  const std::vector<std::function<CheckResult()>> checks = {
      retraction_closure,      tangent_idempotence, kernel_finite_differences, score_finite_differences,
      ksd_projector_invariance, ksd_gradient_fd,    svgd_reduction,            image_confinement,
      energy_distance_symmetry, config_round_trip};
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    try {
      out.push_back(c());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace gsvgd::check
