#ifndef FDBREAK_MEAN_FIT_HPP
#define FDBREAK_MEAN_FIT_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fdbreak/dataset.hpp"
#include "fdbreak/spline_basis.hpp"

namespace fdbreak {

/// Weighted least-squares spline fit of the mean function over a curve range.
struct MeanFit {
  Eigen::VectorXd coeffs;
  SplineBasis basis;
  CurveRange range;

  double evaluate(double x) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& xs) const;
};

/// Fits the spline mean over curves [range.begin, range.end) by solving the
/// weighted normal equations V theta = moment with a banded Cholesky.
/// Throws SingularDesignError when the design stays ill-conditioned after the
/// ridge fallback, naming the offending range.
MeanFit fit_mean(const FunctionalDataset& data, const SplineBasis& basis, CurveRange range);

/// Candidate bracket for the interior-knot search:
///   lower = max(1, floor(min{0.5 (n nbar)^(1/9), 0.5 n^(1/8)})),
///   upper = ceil(max{(n nbar)^(1/7), n^(1/6)}).
/// A degenerate bracket (lower > upper) collapses to {lower}.
std::pair<int, int> knot_candidate_bounds(int n, double mean_points_per_curve);

struct BicTraceRow {
  int interior_knots = 0;
  double bic = 0.0;
  int k_hat = 0;  // L2 locator under this candidate
};

/// Selects the interior-knot count by minimizing
///   log(pooled weighted residual mean square) + (J+p) log(n) / n
/// over the candidate bracket, where residuals come from the two-segment fit
/// split at the L2 locator computed under each candidate. Ties break toward
/// the smaller candidate. `alpha`, `mc_reps` and `seed` are accepted so the
/// signature composes with the pipeline but play no role in the criterion.
int select_knots_bic(const FunctionalDataset& data, int order, double alpha, int mc_reps,
                     std::uint64_t seed, double epsilon = 0.1, int grid_size = 401,
                     std::vector<BicTraceRow>* trace = nullptr);

}  // namespace fdbreak

#endif
