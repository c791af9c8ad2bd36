#include "fdbreak/mean_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fdbreak/cusum.hpp"
#include "fdbreak/design.hpp"
#include "fdbreak/errors.hpp"
#include "fdbreak/quadrature.hpp"

namespace fdbreak {

double MeanFit::evaluate(double x) const {
  double vals[SplineBasis::kMaxOrder];
  int first = 0;
  basis.eval_nonzero(x, vals, first);
  double out = 0.0;
  for (int r = 0; r < basis.order(); ++r) out += vals[r] * coeffs[first + r];
  return out;
}

Eigen::VectorXd MeanFit::evaluate(const Eigen::VectorXd& xs) const {
  Eigen::VectorXd out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) out[i] = evaluate(xs[i]);
  return out;
}

MeanFit fit_mean(const FunctionalDataset& data, const SplineBasis& basis, CurveRange range) {
  data.check_range(range);
  const Eigen::MatrixXd v = gram_weighted(basis, data, range);
  const Eigen::VectorXd moment = moment_weighted(basis, data, range);
  const std::string context =
      "curves " + std::to_string(range.begin + 1) + ".." + std::to_string(range.end);
  GramSolver solver(v, basis.order() - 1, context);
  return MeanFit{solver.solve(moment), basis, range};
}

std::pair<int, int> knot_candidate_bounds(int n, double mean_points_per_curve) {
  const double total = n * mean_points_per_curve;
  const double lo_raw =
      std::min(0.5 * std::pow(total, 1.0 / 9.0), 0.5 * std::pow(static_cast<double>(n), 1.0 / 8.0));
  const double hi_raw =
      std::max(std::pow(total, 1.0 / 7.0), std::pow(static_cast<double>(n), 1.0 / 6.0));
  const int lo = std::max(1, static_cast<int>(std::floor(lo_raw)));
  const int hi = static_cast<int>(std::ceil(hi_raw));
  return {lo, hi};
}

int select_knots_bic(const FunctionalDataset& data, int order, double alpha, int mc_reps,
                     std::uint64_t seed, double epsilon, int grid_size,
                     std::vector<BicTraceRow>* trace) {
  (void)alpha;
  (void)mc_reps;
  (void)seed;
  const int n = data.n();
  if (n < 4) throw ArgumentError("knot selection needs n >= 4 curves");
  if (order < 1) throw ArgumentError("spline order must be >= 1");

  auto [lo, hi] = knot_candidate_bounds(n, data.mean_points_per_curve());
  if (hi < lo) hi = lo;  // degenerate bracket collapses to a single candidate

  const Eigen::VectorXd xgrid = uniform_grid(grid_size);

  int best_j = lo;
  double best_bic = std::numeric_limits<double>::infinity();
  bool any_ok = false;
  std::string last_error;

  for (int j = lo; j <= hi; ++j) {
    try {
      const SplineBasis basis(order, j);
      const int k_hat = locate_break(data, basis, LocatorNorm::l2, epsilon, xgrid);
      const MeanFit pre = fit_mean(data, basis, {0, k_hat});
      const MeanFit post = fit_mean(data, basis, {k_hat, n});

      double rss = 0.0;
      for (int i = 0; i < n; ++i) {
        const Curve& c = data.curve(i);
        const MeanFit& fit = (i < k_hat) ? pre : post;
        double curve_rss = 0.0;
        for (int jj = 0; jj < c.size(); ++jj) {
          const double r = c.y[static_cast<std::size_t>(jj)] -
                           fit.evaluate(c.x[static_cast<std::size_t>(jj)]);
          curve_rss += r * r;
        }
        rss += curve_rss / c.size();
      }
      const double bic = std::log(rss / n) + (j + order) * std::log(n) / n;
      if (trace) trace->push_back({j, bic, k_hat});
      if (bic < best_bic) {
        best_bic = bic;
        best_j = j;
      }
      any_ok = true;
    } catch (const SingularDesignError& e) {
      // A candidate whose design cannot be fit is excluded from the search.
      last_error = e.what();
    }
  }
  if (!any_ok)
    throw SingularDesignError("every knot candidate in [" + std::to_string(lo) + "," +
                              std::to_string(hi) + "] had a singular design: " + last_error);
  return best_j;
}

}  // namespace fdbreak
