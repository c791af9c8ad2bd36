#include "fdbreak/simulate.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "fdbreak/errors.hpp"
#include "fdbreak/parallel.hpp"
#include "fdbreak/quadrature.hpp"
#include "fdbreak/rng.hpp"

namespace fdbreak {

std::string to_string(JumpType t) {
  switch (t) {
    case JumpType::constant: return "i";
    case JumpType::parabola: return "ii";
    case JumpType::peaks: return "iii";
  }
  return "?";
}

JumpType jump_type_from_string(const std::string& s) {
  if (s == "i" || s == "constant") return JumpType::constant;
  if (s == "ii" || s == "parabola") return JumpType::parabola;
  if (s == "iii" || s == "peaks") return JumpType::peaks;
  throw ArgumentError("unknown jump type '" + s + "' (expected i, ii or iii)");
}

std::string to_string(ScoreDist d) {
  switch (d) {
    case ScoreDist::normal: return "normal";
    case ScoreDist::uniform: return "uniform";
    case ScoreDist::laplace: return "laplace";
  }
  return "?";
}

ScoreDist score_dist_from_string(const std::string& s) {
  if (s == "normal") return ScoreDist::normal;
  if (s == "uniform") return ScoreDist::uniform;
  if (s == "laplace") return ScoreDist::laplace;
  throw ArgumentError("unknown score distribution '" + s + "'");
}

void SimConfig::validate() const {
  if (n < 4) throw ArgumentError("simulation needs n >= 4");
  if (sampling_scheme < 1 || sampling_scheme > 4)
    throw ArgumentError("sampling scheme must be 1..4");
  if (a < 0.0) throw ArgumentError("jump amplitude must be >= 0");
  const int k = resolve_k0();
  if (k < 1 || k >= n) throw ArgumentError("k0 must lie strictly inside 1..n-1");
}

namespace {

// log density of Beta(a, b) at x in (0, 1).
double beta_pdf(double a, double b, double x) {
  if (x <= 0.0 || x >= 1.0) {
    // Density limits at the boundary: zero whenever the corresponding shape
    // parameter exceeds one (all shapes used here do).
    return 0.0;
  }
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return std::exp(log_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x));
}

}  // namespace

double jump_function(JumpType type, double a, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("jump function argument outside [0,1]");
  if (a < 0.0) throw ArgumentError("jump amplitude must be >= 0");
  switch (type) {
    case JumpType::constant:
      return a;
    case JumpType::parabola:
      return 4.0 * std::sqrt(5.0) * a * (x - 0.5) * (x - 0.5);
    case JumpType::peaks: {
      const double s = beta_pdf(10, 1000, x) + beta_pdf(1000, 1000, x) + beta_pdf(1000, 10, x);
      return a * std::sqrt(s / 3.0);
    }
  }
  throw ArgumentError("unknown jump type");
}

double base_mean(double x) {
  return 1.5 * std::sin(3.0 * M_PI * (x + 0.5)) + 2.0 * x * x * x;
}

std::pair<int, int> sampling_count_bounds(int scheme, int n) {
  switch (scheme) {
    case 1: return {3, 6};
    case 2: {
      const int lo = static_cast<int>(std::floor(2.0 * std::pow(n, 0.2)));
      const int hi = static_cast<int>(std::floor(4.0 * std::pow(n, 0.2)));
      return {lo, hi};
    }
    case 3: {
      const int lo = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
      const int hi = static_cast<int>(std::floor(2.0 * std::sqrt(static_cast<double>(n))));
      return {lo, hi};
    }
    case 4: return {n / 8, n / 4};
    default: throw ArgumentError("sampling scheme must be 1..4");
  }
}

namespace {

constexpr int kScoreCount = 4;  // eigenvalues 2^{1-k}, k = 1..4

double draw_innovation(ScoreDist dist, RngStream& rng) {
  switch (dist) {
    case ScoreDist::normal: return rng.normal();
    case ScoreDist::uniform: return rng.uniform(-std::sqrt(3.0), std::sqrt(3.0));
    case ScoreDist::laplace: return rng.laplace_unit();
  }
  return 0.0;
}

double eigenfunction(int k, double x) {
  // psi_{2m-1} = sqrt(2) sin(2 m pi x), psi_{2m} = sqrt(2) cos(2 m pi x).
  const int m = (k + 2) / 2;
  const double arg = 2.0 * m * M_PI * x;
  return std::sqrt(2.0) * (k % 2 == 1 ? std::sin(arg) : std::cos(arg));
}

}  // namespace

FunctionalDataset gen_dataset(const SimConfig& cfg) {
  cfg.validate();
  const int n = cfg.n;
  const int k0 = cfg.resolve_k0();
  const auto [n_lo, n_hi] = sampling_count_bounds(cfg.sampling_scheme, n);
  if (n_lo < 1) throw ArgumentError("sampling scheme yields empty curves at this n");

  RngStream rng(cfg.seed, stream_tag::sim_dataset, 0);

  // MA(1) scores xi_{t,k} = 0.8 zeta_{t,k} + 0.6 zeta_{t-1,k}; drawing
  // zeta_{0,k} makes the sequence stationary from the first curve.
  std::vector<std::array<double, kScoreCount>> scores(static_cast<std::size_t>(n));
  std::array<double, kScoreCount> prev{};
  for (double& z : prev) z = draw_innovation(cfg.score_dist, rng);
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < kScoreCount; ++k) {
      const double z = draw_innovation(cfg.score_dist, rng);
      scores[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] =
          0.8 * z + 0.6 * prev[static_cast<std::size_t>(k)];
      prev[static_cast<std::size_t>(k)] = z;
    }
  }

  std::vector<Curve> curves(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int ni = static_cast<int>(rng.uniform_int(n_lo, n_hi));
    Curve& c = curves[static_cast<std::size_t>(i)];
    c.x.resize(static_cast<std::size_t>(ni));
    c.y.resize(static_cast<std::size_t>(ni));
    for (int j = 0; j < ni; ++j) {
      const double x = rng.uniform01();
      double y = base_mean(x);
      if (i >= k0) y += jump_function(cfg.jump_type, cfg.a, x);
      for (int k = 0; k < kScoreCount; ++k) {
        const double lambda = std::pow(2.0, -k);  // 2^{1-(k+1)}
        y += std::sqrt(lambda) *
             scores[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
             eigenfunction(k + 1, x);
      }
      y += rng.normal();  // measurement error, sigma^2 = 1
      c.x[static_cast<std::size_t>(j)] = x;
      c.y[static_cast<std::size_t>(j)] = y;
    }
  }
  return FunctionalDataset(std::move(curves));
}

McSummary mc_study(const SimConfig& cfg, int reps, double alpha,
                   const PipelineConfig& pipeline_config) {
  cfg.validate();
  if (reps < 1) throw ArgumentError("mc_study needs reps >= 1");

  const int k0 = cfg.resolve_k0();
  const Eigen::VectorXd xgrid = uniform_grid(pipeline_config.grid_size);
  Eigen::VectorXd true_jump(xgrid.size());  // pre-minus-post orientation
  for (Eigen::Index i = 0; i < xgrid.size(); ++i)
    true_jump[i] = -jump_function(cfg.jump_type, cfg.a, xgrid[i]);

  struct RepResult {
    bool reject_l2 = false;
    bool reject_sup = false;
    bool covered = false;
    int err_l2 = 0;
    int err_sup = 0;
  };
  std::vector<RepResult> results(static_cast<std::size_t>(reps));

  // Replicates are independent; each runs its own pipeline serially so the
  // outer loop is the only parallel axis.
  PipelineConfig pc = pipeline_config;
  pc.threads = 1;
  pc.alpha = alpha;

  parallel_for(
      reps,
      [&](int r) {
        try {
          SimConfig rep_cfg = cfg;
          rep_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
          PipelineConfig rep_pc = pc;
          rep_pc.seed = derive_seed(rep_cfg.seed, stream_tag::mc_replicate);

          const FunctionalDataset data = gen_dataset(rep_cfg);
          const DetectionReport report = run_detection(data, rep_pc);
          // Band coverage assesses the interval construction at the simulated
          // break; locator accuracy is reported separately through the MAEs.
          const JumpBand band = estimate_jump(data, k0, rep_pc);

          RepResult& out = results[static_cast<std::size_t>(r)];
          out.reject_l2 = report.reject_l2;
          out.reject_sup = report.reject_sup;
          out.err_l2 = std::abs(report.k_hat_l2 - k0);
          out.err_sup = std::abs(report.k_hat_sup - k0);
          out.covered = true;
          for (Eigen::Index i = 0; i < xgrid.size(); ++i) {
            if (true_jump[i] < band.lower[i] || true_jump[i] > band.upper[i]) {
              out.covered = false;
              break;
            }
          }
        } catch (const Error& e) {
          throw Error("replicate " + std::to_string(r + 1) + " failed: " + e.what());
        }
      },
      pipeline_config.threads);

  McSummary summary;
  summary.reps = reps;
  for (const RepResult& r : results) {
    summary.rejection_rate_l2 += r.reject_l2 ? 1.0 : 0.0;
    summary.rejection_rate_sup += r.reject_sup ? 1.0 : 0.0;
    summary.coverage += r.covered ? 1.0 : 0.0;
    summary.mae_l2 += r.err_l2;
    summary.mae_sup += r.err_sup;
  }
  summary.rejection_rate_l2 /= reps;
  summary.rejection_rate_sup /= reps;
  summary.coverage /= reps;
  summary.mae_l2 /= reps;
  summary.mae_sup /= reps;
  return summary;
}

}  // namespace fdbreak
