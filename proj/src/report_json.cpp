#include "fdbreak/report_json.hpp"

#include <vector>

namespace fdbreak {

using nlohmann::ordered_json;

ordered_json to_json(const PipelineConfig& config) {
  ordered_json j;
  j["p"] = config.order;
  if (config.interior_knots)
    j["j_n"] = *config.interior_knots;
  else
    j["j_n"] = "bic";
  j["epsilon"] = config.epsilon;
  j["alpha"] = config.alpha;
  j["mc_draws"] = config.mc_draws;
  if (config.lag)
    j["lag"] = *config.lag;
  else
    j["lag"] = "auto";
  j["lag_loglog"] = config.lag_loglog;
  j["xgrid_size"] = config.grid_size;
  j["width_rule"] = to_string(config.width_rule);
  j["seed"] = config.seed;
  return j;
}

ordered_json to_json(const DetectionReport& report) {
  ordered_json j;
  j["n"] = report.n;
  j["j_n"] = report.j_n;
  j["epsilon"] = report.epsilon;
  j["stat_sup"] = report.stat_sup;
  j["stat_l2"] = report.stat_l2;
  j["q_sup"] = report.q_sup;
  j["q_l2"] = report.q_l2;
  j["p_sup"] = report.p_sup;
  j["p_l2"] = report.p_l2;
  j["reject_sup"] = report.reject_sup;
  j["reject_l2"] = report.reject_l2;
  j["k_hat_l2"] = report.k_hat_l2;
  j["k_hat_sup"] = report.k_hat_sup;
  j["k_hat_significant"] = report.reject_sup || report.reject_l2;
  j["sigma_diagnostics"] = {{"lag_window", report.sigma_diagnostics.lag_window},
                            {"psd_clip_mass", report.sigma_diagnostics.psd_clip_mass}};
  j["config"] = to_json(report.config);
  return j;
}

ordered_json to_json(const JumpBand& band) {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  ordered_json j;
  j["k_hat"] = band.k_hat;
  j["tau_hat"] = band.tau_hat;
  j["alpha"] = band.alpha;
  j["width_rule"] = to_string(band.width_rule);
  j["quantile"] = band.quantile;
  j["xgrid"] = vec(band.xgrid);
  j["delta_hat"] = vec(band.delta_hat);
  j["lower"] = vec(band.lower);
  j["upper"] = vec(band.upper);
  return j;
}

ordered_json input_block(const std::string& path, const IngestResult& ingest) {
  ordered_json j;
  j["path"] = path;
  j["n"] = ingest.data.n();
  j["total_points"] = ingest.data.total_points();
  j["x_rescaled"] = ingest.rescaled;
  if (ingest.rescaled) {
    j["x_min"] = ingest.x_min;
    j["x_max"] = ingest.x_max;
  }
  return j;
}

}  // namespace fdbreak
