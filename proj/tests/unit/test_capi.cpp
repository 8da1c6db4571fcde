#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "gsvgd/gsvgd.h"

extern "C" int gsvgd_c_header_probe(void);

TEST_CASE("version and header") {
  CHECK(std::string(gsvgd_version()) == "1.0.0");
  CHECK(gsvgd_c_header_probe() == 1);
}

TEST_CASE("config parse errors carry the key") {
  gsvgd_config* cfg = nullptr;
  CHECK(gsvgd_config_parse("method = gsvgd\nfoo = 1\n", &cfg) == GSVGD_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(gsvgd_last_error()).find("foo") != std::string::npos);
  CHECK(gsvgd_config_parse(nullptr, &cfg) == GSVGD_ERR_INVALID_ARGUMENT);
  CHECK(gsvgd_config_load("/nonexistent.cfg", &cfg) == GSVGD_ERR_IO);
}

TEST_CASE("config echo and overrides") {
  gsvgd_config* cfg = nullptr;
  REQUIRE(gsvgd_config_parse("method = svgd\ntarget = gaussian\nd = 3\nN = 10\niterations = 4\nseed = 1\n", &cfg) ==
          GSVGD_OK);
  CHECK(gsvgd_config_set_seed(cfg, 77) == GSVGD_OK);
  size_t needed = 0;
  CHECK(gsvgd_config_echo(cfg, nullptr, 0, &needed) == GSVGD_OK);
  std::vector<char> buf(needed + 1);
  CHECK(gsvgd_config_echo(cfg, buf.data(), buf.size(), &needed) == GSVGD_OK);
  const std::string text(buf.data());
  CHECK(text.size() == needed);
  CHECK(text.find("seed = 77\n") != std::string::npos);
  char tiny[5];
  CHECK(gsvgd_config_echo(cfg, tiny, sizeof tiny, &needed) == GSVGD_OK);
  CHECK(std::strlen(tiny) == 4);
  CHECK(gsvgd_config_set_output(cfg, "") == GSVGD_ERR_CONFIG);
  gsvgd_config_free(cfg);
  gsvgd_config_free(nullptr);
}

TEST_CASE("run through the C API") {
  const auto dir = std::filesystem::temp_directory_path() / "gsvgd_capi_run";
  std::filesystem::remove_all(dir);
  gsvgd_config* cfg = nullptr;
  REQUIRE(gsvgd_config_parse("method = gsvgd\ntarget = xshaped\nd = 4\nN = 20\niterations = 6\nm = 2\nseed = 3\n"
                             "repetitions = 2\nground_truth_samples = 50\n",
                             &cfg) == GSVGD_OK);
  REQUIRE(gsvgd_config_set_output(cfg, dir.string().c_str()) == GSVGD_OK);
  gsvgd_result* res = nullptr;
  REQUIRE(gsvgd_run_experiment(cfg, &res) == GSVGD_OK);
  CHECK(gsvgd_result_repetitions(res) == 2);
  CHECK(gsvgd_result_diverged(res) == 0);
  REQUIRE(gsvgd_result_metric_count(res) == 3);
  const char* name = nullptr;
  double mean = 0, lo = 0, hi = 0;
  CHECK(gsvgd_result_metric(res, 1, &name, &mean, &lo, &hi) == GSVGD_OK);
  CHECK(std::string(name) == "cov_error_frobenius");
  CHECK(lo <= mean);
  CHECK(mean <= hi);
  CHECK(gsvgd_result_metric(res, 3, &name, &mean, &lo, &hi) == GSVGD_ERR_INVALID_ARGUMENT);
  CHECK(std::filesystem::exists(dir / "metrics.csv"));
  gsvgd_result_free(res);

  // every repetition diverging is an error, but the result is still returned
  gsvgd_config* bad = nullptr;
  REQUIRE(gsvgd_config_parse("method = svgd\ntarget = gaussian\nd = 3\nN = 10\niterations = 4\nseed = 1\n"
                             "epsilon = 1e300\n",
                             &bad) == GSVGD_OK);
  gsvgd_config_set_output(bad, dir.string().c_str());
  gsvgd_result* diverged = nullptr;
  CHECK(gsvgd_run_experiment(bad, &diverged) == GSVGD_ERR_DIVERGED);
  REQUIRE(diverged != nullptr);
  CHECK(gsvgd_result_diverged(diverged) == 1);
  gsvgd_result_free(diverged);
  gsvgd_config_free(bad);
  gsvgd_config_free(cfg);
  std::filesystem::remove_all(dir);
}

TEST_CASE("numerical entry points") {
  const double x[] = {0.0};
  const double y[] = {2.0};
  double out = -1.0;
  CHECK(gsvgd_energy_distance(x, 1, y, 1, 1, &out) == GSVGD_OK);
  CHECK(out == doctest::Approx(4.0));

  // row-major 2x1 inputs
  const double a[] = {1.0, 0.0};
  const double delta[] = {0.0, 1.0};
  double retracted[2];
  CHECK(gsvgd_polar_retract(a, delta, 2, 1, retracted) == GSVGD_OK);
  CHECK(retracted[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(retracted[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  const double back[] = {-1.0, 0.0};
  CHECK(gsvgd_polar_retract(a, back, 2, 1, retracted) == GSVGD_ERR_DEGENERATE);

  // single particle: ||A^T s||^2 + m / sigma2; row-major 3x2 projector
  const double p[] = {0.3, -0.2, 1.0};
  const double s[] = {1.0, 2.0, 3.0};
  const double proj[] = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  CHECK(gsvgd_ksd_a(p, s, 1, 3, proj, 2, GSVGD_KERNEL_GAUSSIAN_RBF, 0.5, &out) == GSVGD_OK);
  CHECK(out == doctest::Approx(1.0 + 4.0 + 2.0 / 0.5));
  const double not_orthonormal[] = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(gsvgd_ksd_a(p, s, 1, 3, not_orthonormal, 2, GSVGD_KERNEL_GAUSSIAN_RBF, 0.5, &out) == GSVGD_ERR_DEGENERATE);
  CHECK(gsvgd_ksd_a(p, s, 1, 3, proj, 2, GSVGD_KERNEL_GAUSSIAN_RBF, -1.0, &out) == GSVGD_ERR_CONFIG);
  CHECK(gsvgd_energy_distance(nullptr, 1, y, 1, 1, &out) == GSVGD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("check suite through the C API") {
  size_t failures = 99;
  int count = 0;
  auto cb = [](const char* name, int passed, const char* detail, void* user) {
    (void)detail;
    CHECK(name != nullptr);
    CHECK(passed == 1);
    ++*static_cast<int*>(user);
  };
  CHECK(gsvgd_check(cb, &count, &failures) == GSVGD_OK);
  CHECK(failures == 0);
  CHECK(count >= 10);
}
