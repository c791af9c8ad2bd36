#include <doctest.h>

#include <cmath>

#include "fdbreak/detect.hpp"
#include "fdbreak/errors.hpp"
#include "fdbreak/report_json.hpp"
#include "test_helpers.hpp"

using fdbreak::DetectionReport;
using fdbreak::JumpBand;
using fdbreak::PipelineConfig;

namespace {

PipelineConfig small_config() {
  PipelineConfig config;
  config.mc_draws = 300;
  config.interior_knots = 1;
  config.order = 3;
  config.grid_size = 201;
  config.seed = 42;
  return config;
}

}  // namespace

TEST_SUITE_BEGIN("inference");

TEST_CASE("a deterministic jump is detected with the smallest possible p-value") {
  const auto data = testutil::make_dense_dataset(
      30, 12, [](int i, double x) { return std::sin(2 * x) + (i >= 15 ? 1.0 : 0.0); });
  const PipelineConfig config = small_config();
  const DetectionReport report = fdbreak::run_detection(data, config);

  CHECK(report.reject_l2);
  CHECK(report.reject_sup);
  CHECK(report.k_hat_l2 == 15);
  CHECK(report.k_hat_sup == 15);
  CHECK(report.p_l2 == doctest::Approx(1.0 / (config.mc_draws + 1)).epsilon(1e-12));
  CHECK(report.p_sup == doctest::Approx(1.0 / (config.mc_draws + 1)).epsilon(1e-12));
}

TEST_CASE("report decisions are recomputable and p-values lie in (0, 1]") {
  const auto data = testutil::make_dataset(
      40, 3, 7, 201, [](int i, double x) { return x + (i >= 20 ? 0.4 : 0.0); }, 0.8);
  const DetectionReport report = fdbreak::run_detection(data, small_config());
  CHECK(report.reject_l2 == (report.stat_l2 > report.q_l2));
  CHECK(report.reject_sup == (report.stat_sup > report.q_sup));
  CHECK(report.p_l2 > 0.0);
  CHECK(report.p_l2 <= 1.0);
  CHECK(report.p_sup > 0.0);
  CHECK(report.p_sup <= 1.0);
  CHECK(report.sigma_diagnostics.lag_window == 2);  // floor(40^(1/5))
  CHECK(report.j_n == 1);
}

TEST_CASE("reports are reproducible bit for bit across thread counts") {
  const auto data = testutil::make_dataset(
      36, 2, 6, 203, [](int i, double x) { return x * i * 0.02; }, 0.6);
  PipelineConfig c1 = small_config();
  c1.threads = 1;
  PipelineConfig c2 = small_config();
  c2.threads = 4;
  // The worker count never enters the serialized report, so runs with
  // different thread counts must serialize to identical bytes.
  const std::string r1 = fdbreak::to_json(fdbreak::run_detection(data, c1)).dump();
  const std::string r2 = fdbreak::to_json(fdbreak::run_detection(data, c2)).dump();
  CHECK(r1 == r2);
  const std::string r1b = fdbreak::to_json(fdbreak::run_detection(data, c1)).dump();
  CHECK(r1 == r1b);
}

TEST_CASE("jump estimate of identical segments is zero and the band covers zero") {
  const auto data = testutil::make_dense_dataset(
      20, 15, [](int, double x) { return std::cos(x); });
  PipelineConfig config = small_config();
  const JumpBand band = fdbreak::estimate_jump(data, 10, config);
  CHECK(band.delta_hat.cwiseAbs().maxCoeff() < 1e-10);
  for (Eigen::Index i = 0; i < band.xgrid.size(); ++i) {
    CHECK(band.lower[i] <= 0.0);
    CHECK(band.upper[i] >= 0.0);
    CHECK(band.lower[i] <= band.delta_hat[i]);
    CHECK(band.upper[i] >= band.delta_hat[i]);
  }
}

TEST_CASE("a level shift of +c is estimated as -c") {
  const double c = 0.75;
  const auto data = testutil::make_dense_dataset(
      24, 15, [&](int i, double x) { return std::sin(x) + (i >= 12 ? c : 0.0); });
  const JumpBand band = fdbreak::estimate_jump(data, 12, small_config());
  CHECK((band.delta_hat.array() + c).abs().maxCoeff() < 1e-9);
  CHECK(band.tau_hat == doctest::Approx(0.5));
}

TEST_CASE("band width rules differ by the announced factor") {
  const auto data = testutil::make_dataset(
      32, 3, 6, 207, [](int i, double x) { return x + (i >= 16 ? 0.5 : 0.0); }, 0.5);
  PipelineConfig tau_rule = small_config();
  tau_rule.width_rule = fdbreak::WidthRule::tau_scaled;
  PipelineConfig flat_rule = small_config();
  flat_rule.width_rule = fdbreak::WidthRule::flat_root_n;

  const JumpBand b1 = fdbreak::estimate_jump(data, 16, tau_rule);
  const JumpBand b2 = fdbreak::estimate_jump(data, 16, flat_rule);
  // tau = 1/2: the tau-scaled width is exactly twice the flat width.
  const Eigen::VectorXd w1 = b1.upper - b1.lower;
  const Eigen::VectorXd w2 = b2.upper - b2.lower;
  for (Eigen::Index i = 0; i < w1.size(); ++i) {
    if (w2[i] > 1e-14) CHECK(w1[i] / w2[i] == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("band is equivariant under spline-space shifts of the data") {
  const auto data = testutil::make_dataset(
      28, 3, 6, 209, [](int i, double x) { return x + (i >= 14 ? 0.6 : 0.0); }, 0.4);
  PipelineConfig config = small_config();
  const fdbreak::SplineBasis basis(config.order, *config.interior_knots);
  Eigen::VectorXd g_coeffs(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) g_coeffs[i] = 0.2 * i;
  const auto shifted = testutil::transform_dataset(
      data, 1.0, [&](double x) { return basis.eval(x).dot(g_coeffs); });

  const JumpBand b1 = fdbreak::estimate_jump(data, 14, config);
  const JumpBand b2 = fdbreak::estimate_jump(shifted, 14, config);
  CHECK((b1.delta_hat - b2.delta_hat).cwiseAbs().maxCoeff() < 1e-9);
  const Eigen::VectorXd w1 = b1.upper - b1.lower;
  const Eigen::VectorXd w2 = b2.upper - b2.lower;
  CHECK((w1 - w2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("statistics are invariant under positive scaling and spline shifts") {
  // A shared x-grid keeps the locator's design sums balanced, so the shift
  // cancels through the entire chain including the break estimate feeding
  // the covariance.
  const auto data = testutil::make_common_grid_dataset(
      30, 8, 211, [](int i, double x) { return std::sin(3 * x) + (i >= 15 ? 0.5 : 0.0); },
      0.7);
  PipelineConfig config = small_config();
  const DetectionReport base = fdbreak::run_detection(data, config);

  const auto scaled = testutil::transform_dataset(data, 7.0, [](double) { return 0.0; });
  const DetectionReport rs = fdbreak::run_detection(scaled, config);
  CHECK(std::abs(rs.stat_l2 - base.stat_l2) < 1e-8 * std::max(1.0, base.stat_l2));
  CHECK(std::abs(rs.stat_sup - base.stat_sup) < 1e-8 * std::max(1.0, base.stat_sup));
  CHECK(rs.k_hat_l2 == base.k_hat_l2);
  CHECK(rs.k_hat_sup == base.k_hat_sup);

  const fdbreak::SplineBasis basis(config.order, *config.interior_knots);
  Eigen::VectorXd g_coeffs(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) g_coeffs[i] = std::cos(0.9 * i);
  const auto shifted = testutil::transform_dataset(
      data, 1.0, [&](double x) { return basis.eval(x).dot(g_coeffs); });
  const DetectionReport rh = fdbreak::run_detection(shifted, config);
  CHECK(std::abs(rh.stat_l2 - base.stat_l2) < 1e-8 * std::max(1.0, base.stat_l2));
  CHECK(std::abs(rh.stat_sup - base.stat_sup) < 1e-8 * std::max(1.0, base.stat_sup));
}

TEST_CASE("boundary splits and invalid configs are rejected") {
  const auto data = testutil::make_dataset(10, 2, 4, 213, [](int, double) { return 0.0; }, 1.0);
  CHECK_THROWS_AS(fdbreak::estimate_jump(data, 1, small_config()), fdbreak::ArgumentError);
  CHECK_THROWS_AS(fdbreak::estimate_jump(data, 9, small_config()), fdbreak::ArgumentError);

  PipelineConfig bad = small_config();
  bad.epsilon = 0.5;
  CHECK_THROWS_AS(fdbreak::run_detection(data, bad), fdbreak::ArgumentError);
  bad = small_config();
  bad.mc_draws = 50;
  CHECK_THROWS_AS(fdbreak::run_detection(data, bad), fdbreak::ArgumentError);
  bad = small_config();
  bad.grid_size = 200;
  CHECK_THROWS_AS(fdbreak::run_detection(data, bad), fdbreak::ArgumentError);
}

TEST_SUITE_END();
