#ifndef FDBREAK_DETECT_HPP
#define FDBREAK_DETECT_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "fdbreak/dataset.hpp"

namespace fdbreak {

/// Jump-band width rule. `tau_scaled` divides by sqrt(n tau (1 - tau)) and is
/// the default; `flat_root_n` divides by sqrt(n) only and is kept for
/// comparison.
enum class WidthRule { tau_scaled, flat_root_n };

std::string to_string(WidthRule rule);
WidthRule width_rule_from_string(const std::string& s);

/// Resolved pipeline configuration. Optional fields select the data-driven
/// defaults: interior_knots empty means BIC selection, lag empty means
/// L = floor(n^(1/5)) (or with the log log n factor when lag_loglog is set).
struct PipelineConfig {
  int order = 4;
  std::optional<int> interior_knots;
  double epsilon = 0.1;
  double alpha = 0.05;
  int mc_draws = 2000;
  std::optional<int> lag;
  bool lag_loglog = false;
  int grid_size = 401;
  WidthRule width_rule = WidthRule::tau_scaled;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = resolve from FDBREAK_THREADS / hardware

  void validate() const;
  int resolve_lag(int n) const;
};

struct SigmaDiagnostics {
  int lag_window = 0;
  double psd_clip_mass = 0.0;
};

/// Full two-test detection output. reject_* holds exactly when the statistic
/// exceeds its simulated upper-alpha quantile; k_hat_* are the locators
/// (meaningful as break estimates only under rejection).
struct DetectionReport {
  int n = 0;
  int j_n = 0;
  double epsilon = 0.0;
  double stat_sup = 0.0;
  double stat_l2 = 0.0;
  double q_sup = 0.0;
  double q_l2 = 0.0;
  double p_sup = 0.0;
  double p_l2 = 0.0;
  bool reject_sup = false;
  bool reject_l2 = false;
  int k_hat_l2 = 0;
  int k_hat_sup = 0;
  SigmaDiagnostics sigma_diagnostics;
  PipelineConfig config;
};

/// Runs the whole pipeline: knot selection, both locators, two-segment
/// residuals split at the L2 locator, plug-in covariance, the CUSUM field and
/// both statistics, simulated quantiles, and the decisions. Numerical errors
/// carry a [stage ...] label.
DetectionReport run_detection(const FunctionalDataset& data, const PipelineConfig& config);

/// Jump curve with its simultaneous confidence band.
struct JumpBand {
  int k_hat = 0;
  double tau_hat = 0.0;
  Eigen::VectorXd xgrid;
  Eigen::VectorXd delta_hat;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double alpha = 0.0;
  WidthRule width_rule = WidthRule::tau_scaled;
  double quantile = 0.0;
};

/// Estimates the jump as the pre-fit minus the post-fit at the given split
/// (so a data shift of +c across the break estimates -c) and wraps it in the
/// simultaneous band delta_hat(x) +- w(x) Q, with w(x) the width rule applied
/// to sqrt(B^T(x) Sigma B(x)). Both segments need at least 2 curves.
JumpBand estimate_jump(const FunctionalDataset& data, int k_hat, const PipelineConfig& config);

}  // namespace fdbreak

#endif
