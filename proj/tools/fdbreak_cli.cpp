// Command-line front end: break detection, jump bands, Monte Carlo studies
// and knot-selection traces for functional time series in long CSV format.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdbreak/csv_io.hpp"
#include "fdbreak/cusum.hpp"
#include "fdbreak/detect.hpp"
#include "fdbreak/errors.hpp"
#include "fdbreak/mean_fit.hpp"
#include "fdbreak/quadrature.hpp"
#include "fdbreak/report_json.hpp"
#include "fdbreak/simulate.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string input;
  bool rescale_x = false;
  int p = 4;
  std::string knots = "bic";
  double epsilon = 0.1;
  double alpha = 0.05;
  int draws = 2000;
  std::string lag = "auto";
  bool lag_loglog = false;
  int grid = 401;
  std::string width_rule = "tau_scaled";
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output;
};

void add_pipeline_flags(CLI::App* cmd, CommonOpts& o, bool with_input) {
  if (with_input) {
    cmd->add_option("--input", o.input, "long-format CSV with header curve,x,y")->required();
    cmd->add_flag("--rescale-x", o.rescale_x, "min-max rescale x into [0,1]");
  }
  cmd->add_option("--p", o.p, "spline order (default 4, cubic)");
  cmd->add_option("--knots", o.knots, "interior knot count, or 'bic' (default)");
  cmd->add_option("--epsilon", o.epsilon, "trimming fraction of the time lattice");
  cmd->add_option("--alpha", o.alpha, "significance level");
  cmd->add_option("--draws", o.draws, "Monte Carlo draws for quantiles");
  cmd->add_option("--lag", o.lag, "lag window L, or 'auto' = floor(n^(1/5))");
  cmd->add_flag("--lag-loglog", o.lag_loglog, "scale the auto lag by log(log n)");
  cmd->add_option("--grid", o.grid, "x-grid size (odd)");
  cmd->add_option("--width-rule", o.width_rule, "band width rule: tau_scaled | flat_root_n");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--threads", o.threads, "worker count (default FDBREAK_THREADS or hardware)");
  cmd->add_option("--output", o.output, "output path (default stdout)");
}

fdbreak::PipelineConfig make_config(const CommonOpts& o) {
  fdbreak::PipelineConfig config;
  config.order = o.p;
  if (o.knots != "bic") {
    try {
      config.interior_knots = std::stoi(o.knots);
    } catch (const std::exception&) {
      throw fdbreak::ArgumentError("--knots expects an integer or 'bic', got '" + o.knots + "'");
    }
  }
  config.epsilon = o.epsilon;
  config.alpha = o.alpha;
  config.mc_draws = o.draws;
  if (o.lag != "auto") {
    try {
      config.lag = std::stoi(o.lag);
    } catch (const std::exception&) {
      throw fdbreak::ArgumentError("--lag expects an integer or 'auto', got '" + o.lag + "'");
    }
  }
  config.lag_loglog = o.lag_loglog;
  config.grid_size = o.grid;
  config.width_rule = fdbreak::width_rule_from_string(o.width_rule);
  config.seed = o.seed;
  config.threads = o.threads;
  config.validate();
  return config;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw fdbreak::ArgumentError("cannot write '" + path + "'");
  out << text;
}

std::string format_band_csv(const fdbreak::JumpBand& band) {
  std::string csv = "x,delta_hat,lower,upper\n";
  char buf[160];
  for (Eigen::Index i = 0; i < band.xgrid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", band.xgrid[i], band.delta_hat[i],
                  band.lower[i], band.upper[i]);
    csv += buf;
  }
  return csv;
}

int run_detect(const CommonOpts& o) {
  const fdbreak::PipelineConfig config = make_config(o);
  const fdbreak::IngestResult ingest = fdbreak::ingest_csv(o.input, {o.rescale_x});
  const fdbreak::DetectionReport report = fdbreak::run_detection(ingest.data, config);
  nlohmann::ordered_json j = fdbreak::to_json(report);
  j["input"] = fdbreak::input_block(o.input, ingest);
  emit(o.output, j.dump(2) + "\n");
  return 0;
}

int run_jump(const CommonOpts& o, int k_flag, const std::string& band_csv_path) {
  const fdbreak::PipelineConfig config = make_config(o);
  const fdbreak::IngestResult ingest = fdbreak::ingest_csv(o.input, {o.rescale_x});

  int k_hat = k_flag;
  if (k_hat <= 0) {
    // No explicit split given: use the L2 locator.
    const int j_n = config.interior_knots
                        ? *config.interior_knots
                        : fdbreak::select_knots_bic(ingest.data, config.order, config.alpha,
                                                    config.mc_draws, config.seed, config.epsilon,
                                                    config.grid_size);
    const fdbreak::SplineBasis basis(config.order, j_n);
    k_hat = fdbreak::locate_break(ingest.data, basis, fdbreak::LocatorNorm::l2, config.epsilon,
                                  fdbreak::uniform_grid(config.grid_size));
  }

  const fdbreak::JumpBand band = fdbreak::estimate_jump(ingest.data, k_hat, config);
  nlohmann::ordered_json j = fdbreak::to_json(band);
  j["input"] = fdbreak::input_block(o.input, ingest);
  j["config"] = fdbreak::to_json(config);
  emit(o.output, j.dump(2) + "\n");
  if (!band_csv_path.empty()) emit(band_csv_path, format_band_csv(band));
  return 0;
}

int run_simulate(const CommonOpts& o, const std::vector<int>& settings,
                 const std::vector<std::string>& jumps, const std::vector<double>& amplitudes,
                 const std::vector<int>& sizes, int reps, const std::vector<std::string>& dists,
                 int k0) {
  fdbreak::PipelineConfig config = make_config(o);
  if (o.draws == 2000) config.mc_draws = 500;  // study default; override with --draws

  // One row per aggregate per cell of the requested grid.
  std::string csv = "setting,jump_type,dist,a,n,stat,value\n";
  char buf[160];
  for (int setting : settings) {
    for (const std::string& jump : jumps) {
      for (const std::string& dist : dists) {
        for (double a : amplitudes) {
          for (int n : sizes) {
            fdbreak::SimConfig sim;
            sim.n = n;
            sim.sampling_scheme = setting;
            sim.jump_type = fdbreak::jump_type_from_string(jump);
            sim.a = a;
            sim.score_dist = fdbreak::score_dist_from_string(dist);
            if (k0 > 0) sim.k0 = k0;
            sim.seed = o.seed;

            const fdbreak::McSummary s = fdbreak::mc_study(sim, reps, config.alpha, config);

            const std::string prefix = std::to_string(setting) + "," +
                                       fdbreak::to_string(sim.jump_type) + "," +
                                       fdbreak::to_string(sim.score_dist) + "," +
                                       std::to_string(a) + "," + std::to_string(n) + ",";
            auto row = [&](const char* stat, double value) {
              std::snprintf(buf, sizeof(buf), "%s%s,%.17g\n", prefix.c_str(), stat, value);
              csv += buf;
            };
            row("rejection_rate_l2", s.rejection_rate_l2);
            row("rejection_rate_sup", s.rejection_rate_sup);
            row("coverage", s.coverage);
            row("mae_l2", s.mae_l2);
            row("mae_sup", s.mae_sup);
            row("reps", s.reps);
          }
        }
      }
    }
  }
  emit(o.output, csv);
  return 0;
}

int run_knots(const CommonOpts& o) {
  const fdbreak::PipelineConfig config = make_config(o);
  const fdbreak::IngestResult ingest = fdbreak::ingest_csv(o.input, {o.rescale_x});
  std::vector<fdbreak::BicTraceRow> trace;
  const int chosen =
      fdbreak::select_knots_bic(ingest.data, config.order, config.alpha, config.mc_draws,
                                config.seed, config.epsilon, config.grid_size, &trace);
  std::string csv = "j_n,bic,k_hat,selected\n";
  char buf[128];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%d\n", row.interior_knots, row.bic, row.k_hat,
                  row.interior_knots == chosen ? 1 : 0);
    csv += buf;
  }
  emit(o.output, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Break detection for sparse-to-dense functional time series"};
  app.require_subcommand(1);

  CommonOpts detect_opts;
  CLI::App* detect = app.add_subcommand("detect", "run both tests and emit a JSON report");
  add_pipeline_flags(detect, detect_opts, true);

  CommonOpts jump_opts;
  int jump_k = 0;
  std::string band_csv;
  CLI::App* jump = app.add_subcommand("jump", "estimate the jump curve with its confidence band");
  add_pipeline_flags(jump, jump_opts, true);
  jump->add_option("--k", jump_k, "break index (pre-segment curve count); default: L2 locator");
  jump->add_option("--band-csv", band_csv, "also write x,delta_hat,lower,upper rows here");

  CommonOpts sim_opts;
  std::vector<int> sim_settings{1};
  std::vector<std::string> sim_jumps{"i"};
  std::vector<double> sim_as{0.0};
  std::vector<int> sim_ns{200};
  int sim_reps = 500;
  std::vector<std::string> sim_dists{"normal"};
  int sim_k0 = 0;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo study over a grid of design cells");
  add_pipeline_flags(simulate, sim_opts, false);
  simulate->add_option("--setting", sim_settings, "sampling scheme(s) 1..4");
  simulate->add_option("--jump", sim_jumps, "jump type(s): i, ii or iii");
  simulate->add_option("--a", sim_as, "jump amplitude(s) (L2 norm)");
  simulate->add_option("--n", sim_ns, "number(s) of curves");
  simulate->add_option("--reps", sim_reps, "Monte Carlo replicates per cell");
  simulate->add_option("--dist", sim_dists, "score distribution(s): normal, uniform, laplace");
  simulate->add_option("--k0", sim_k0, "break position (default n/2)");

  CommonOpts knots_opts;
  CLI::App* knots = app.add_subcommand("knots", "BIC trace over the knot candidates");
  add_pipeline_flags(knots, knots_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitValidation;
  }

  try {
    if (detect->parsed()) return run_detect(detect_opts);
    if (jump->parsed()) return run_jump(jump_opts, jump_k, band_csv);
    if (simulate->parsed())
      return run_simulate(sim_opts, sim_settings, sim_jumps, sim_as, sim_ns, sim_reps, sim_dists,
                          sim_k0);
    if (knots->parsed()) return run_knots(knots_opts);
  } catch (const fdbreak::SingularDesignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fdbreak::DegenerateVarianceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fdbreak::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fdbreak::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
