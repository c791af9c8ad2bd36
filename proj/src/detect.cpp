#include "fdbreak/detect.hpp"

#include <cmath>
#include <utility>

#include "fdbreak/cusum.hpp"
#include "fdbreak/errors.hpp"
#include "fdbreak/mc_quantiles.hpp"
#include "fdbreak/mean_fit.hpp"
#include "fdbreak/quadrature.hpp"

namespace fdbreak {

std::string to_string(WidthRule rule) {
  return rule == WidthRule::tau_scaled ? "tau_scaled" : "flat_root_n";
}

WidthRule width_rule_from_string(const std::string& s) {
  if (s == "tau_scaled") return WidthRule::tau_scaled;
  if (s == "flat_root_n") return WidthRule::flat_root_n;
  throw ArgumentError("unknown width rule '" + s + "' (expected tau_scaled or flat_root_n)");
}

void PipelineConfig::validate() const {
  if (order < 1) throw ArgumentError("spline order must be >= 1");
  if (interior_knots && *interior_knots < 0) throw ArgumentError("interior knots must be >= 0");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ArgumentError("epsilon must lie in (0, 1/2)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in (0, 1]");
  if (mc_draws < 100) throw ArgumentError("mc_draws must be >= 100");
  if (lag && *lag < 0) throw ArgumentError("lag window must be >= 0");
  if (grid_size < 3 || grid_size % 2 == 0)
    throw ArgumentError("grid size must be odd and >= 3");
}

int PipelineConfig::resolve_lag(int n) const {
  if (lag) return *lag;
  double v = std::pow(static_cast<double>(n), 0.2);
  if (lag_loglog) v *= std::log(std::log(static_cast<double>(n)));
  return static_cast<int>(std::floor(v));
}

namespace {

// Re-raises numerical errors with the pipeline stage in the message.
template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SingularDesignError& e) {
    throw SingularDesignError(std::string("[stage ") + stage + "] " + e.what());
  } catch (const DegenerateVarianceError& e) {
    throw DegenerateVarianceError(std::string("[stage ") + stage + "] " + e.what());
  }
}

int resolve_knots(const FunctionalDataset& data, const PipelineConfig& config) {
  if (config.interior_knots) return *config.interior_knots;
  return select_knots_bic(data, config.order, config.alpha, config.mc_draws, config.seed,
                          config.epsilon, config.grid_size);
}

}  // namespace

DetectionReport run_detection(const FunctionalDataset& data, const PipelineConfig& config) {
  config.validate();
  const int n = data.n();
  if (n < 3) throw ArgumentError("detection needs n >= 3 curves");

  DetectionReport report;
  report.n = n;
  report.epsilon = config.epsilon;
  report.config = config;

  const Eigen::VectorXd xgrid = uniform_grid(config.grid_size);

  report.j_n = with_stage("knots", [&] { return resolve_knots(data, config); });
  const SplineBasis basis(config.order, report.j_n);

  const LocatorPair locators = with_stage(
      "locate", [&] { return locate_break_both(data, basis, config.epsilon, xgrid); });
  report.k_hat_l2 = locators.k_l2;
  report.k_hat_sup = locators.k_sup;

  const SigmaEstimate sigma = with_stage(
      "sigma", [&] { return sigma_total(data, basis, report.k_hat_l2, config.resolve_lag(n)); });
  report.sigma_diagnostics = {sigma.lag_window, sigma.psd_clip_mass};

  const CusumField field = with_stage(
      "cusum", [&] { return cusum_field(data, basis, sigma, config.epsilon, xgrid); });
  report.stat_sup = stat_sup(field);
  report.stat_l2 = stat_l2(field);

  const TestQuantiles q = with_stage("quantiles", [&] {
    const KernelEigen eig = kernel_eigen(sigma, basis, xgrid);
    return quantiles_test(eig, field.k_values, n, config.mc_draws, config.alpha, config.seed,
                          report.stat_l2, report.stat_sup, config.threads);
  });
  report.q_l2 = q.l2.value;
  report.q_sup = q.sup.value;
  report.p_l2 = q.l2.p_value();
  report.p_sup = q.sup.p_value();
  report.reject_l2 = report.stat_l2 > report.q_l2;
  report.reject_sup = report.stat_sup > report.q_sup;
  return report;
}

JumpBand estimate_jump(const FunctionalDataset& data, int k_hat, const PipelineConfig& config) {
  config.validate();
  const int n = data.n();
  if (k_hat < 2 || n - k_hat < 2)
    throw ArgumentError("jump estimation needs at least 2 curves per segment, got split " +
                        std::to_string(k_hat) + "/" + std::to_string(n - k_hat));

  const Eigen::VectorXd xgrid = uniform_grid(config.grid_size);
  const int j_n = with_stage("knots", [&] { return resolve_knots(data, config); });
  const SplineBasis basis(config.order, j_n);

  const MeanFit pre = with_stage("jump", [&] { return fit_mean(data, basis, {0, k_hat}); });
  const MeanFit post = with_stage("jump", [&] { return fit_mean(data, basis, {k_hat, n}); });

  const SigmaEstimate sigma =
      with_stage("sigma", [&] { return sigma_total(data, basis, k_hat, config.resolve_lag(n)); });

  const QuantileResult q = with_stage("quantiles", [&] {
    return quantile_jump(sigma, basis, xgrid, config.mc_draws, config.alpha, config.seed, 0.0,
                         config.threads);
  });

  JumpBand band;
  band.k_hat = k_hat;
  band.tau_hat = static_cast<double>(k_hat) / n;
  band.xgrid = xgrid;
  band.alpha = config.alpha;
  band.width_rule = config.width_rule;
  band.quantile = q.value;

  const double factor =
      config.width_rule == WidthRule::tau_scaled
          ? 1.0 / std::sqrt(n * band.tau_hat * (1.0 - band.tau_hat))
          : 1.0 / std::sqrt(static_cast<double>(n));

  band.delta_hat.resize(xgrid.size());
  band.lower.resize(xgrid.size());
  band.upper.resize(xgrid.size());
  // Band width uses the raw (un-floored) variance proxy; it vanishes only
  // where the proxy does.
  for (Eigen::Index i = 0; i < xgrid.size(); ++i) {
    const double x = xgrid[i];
    band.delta_hat[i] = pre.evaluate(x) - post.evaluate(x);
    const Eigen::VectorXd b = basis.eval(x);
    const double r = std::max(b.dot(sigma.sigma * b), 0.0);
    const double half_width = factor * std::sqrt(r) * q.value;
    band.lower[i] = band.delta_hat[i] - half_width;
    band.upper[i] = band.delta_hat[i] + half_width;
  }
  return band;
}

}  // namespace fdbreak
