#ifndef FDBREAK_SIMULATE_HPP
#define FDBREAK_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "fdbreak/dataset.hpp"
#include "fdbreak/detect.hpp"

namespace fdbreak {

/// Jump shapes: a flat shift, a centered parabola, and a three-peak curve
/// built from beta densities. All are scaled so the L2 norm equals `a`.
enum class JumpType { constant, parabola, peaks };

/// Distribution of the score innovations, standardized to unit variance.
enum class ScoreDist { normal, uniform, laplace };

std::string to_string(JumpType t);
JumpType jump_type_from_string(const std::string& s);
std::string to_string(ScoreDist d);
ScoreDist score_dist_from_string(const std::string& s);

struct SimConfig {
  int n = 200;
  int sampling_scheme = 1;  // 1 (sparse) .. 4 (dense)
  JumpType jump_type = JumpType::constant;
  double a = 0.0;
  ScoreDist score_dist = ScoreDist::normal;
  std::optional<int> k0;  // break position; default floor(n/2)
  std::uint64_t seed = 0;

  int resolve_k0() const { return k0.value_or(n / 2); }
  void validate() const;
};

/// Jump magnitude at x. Beta densities go through log-gamma, so the sharp
/// peaks stay finite and accurate.
double jump_function(JumpType type, double a, double x);

/// The simulated baseline mean (3/2) sin(3 pi (x + 1/2)) + 2 x^3.
double base_mean(double x);

/// Inclusive bounds of the per-curve observation count for a sampling scheme.
std::pair<int, int> sampling_count_bounds(int scheme, int n);

/// Draws one dataset: a rank-4 Karhunen-Loeve process with eigenvalues
/// 2^{1-k}, Fourier eigenfunctions, MA(1) scores 0.8 zeta_t + 0.6 zeta_{t-1},
/// unit-variance measurement noise, uniform locations, and the jump added to
/// curves after k0.
FunctionalDataset gen_dataset(const SimConfig& cfg);

/// Aggregates of a Monte Carlo study cell.
struct McSummary {
  double rejection_rate_l2 = 0.0;
  double rejection_rate_sup = 0.0;
  double coverage = 0.0;
  double mae_l2 = 0.0;
  double mae_sup = 0.0;
  int reps = 0;
};

/// Runs the full pipeline on `reps` independent datasets (per-replicate seeds
/// derived from cfg.seed) and aggregates rejection rates, the coverage of the
/// true jump curve by the simultaneous band, and the mean absolute locator
/// errors. A replicate failure aborts the study with the replicate index in
/// the message.
McSummary mc_study(const SimConfig& cfg, int reps, double alpha,
                   const PipelineConfig& pipeline_config);

}  // namespace fdbreak

#endif
