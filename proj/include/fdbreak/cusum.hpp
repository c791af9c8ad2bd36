#ifndef FDBREAK_CUSUM_HPP
#define FDBREAK_CUSUM_HPP

#include <vector>

#include <Eigen/Core>

#include "fdbreak/dataset.hpp"
#include "fdbreak/long_run_cov.hpp"
#include "fdbreak/spline_basis.hpp"

namespace fdbreak {

/// The smoothed cumulative-sum contrast evaluated on the time lattice
/// {k/n : ceil(eps n) <= k <= floor((1-eps) n)} and a uniform x-grid.
///
/// numerator(k, x) = (k/sqrt(n)) * {mhat_k(x) - mhat(x)}, where mhat_k is the
/// weighted spline fit over the first k curves and mhat the global fit. The
/// statistics are step functions of t between lattice points, so the lattice
/// supremum is the exact supremum.
struct CusumField {
  int n = 0;
  std::vector<int> k_values;     // pre-segment curve counts
  Eigen::VectorXd tgrid;         // k/n
  Eigen::VectorXd xgrid;
  Eigen::MatrixXd numerator;     // k index x grid index
  Eigen::VectorXd rescale;       // floored B^T Sigma B over xgrid
  // Interior knots join the x-sweep of the sup statistic: the numerator is
  // piecewise-polynomial in x, so extrema cluster near knots.
  Eigen::VectorXd knot_x;
  Eigen::MatrixXd numerator_knots;
  Eigen::VectorXd rescale_knots;
};

/// Builds the field by one pass of rank-N_i design updates over k. epsilon in
/// (0, 1/2) for testing; epsilon = 0 is allowed for diagnostics and then the
/// k = 0 row is identically zero and k runs all the way to n (where the row is
/// exactly zero by construction). Singular designs at some lattice point raise
/// SingularDesignError naming the failing t.
CusumField cusum_field(const FunctionalDataset& data, const SplineBasis& basis,
                       const SigmaEstimate& sigma, double epsilon, const Eigen::VectorXd& xgrid);

/// Sup-norm statistic: max over the lattice and the x-sweep of
/// |numerator| / sqrt(rescale).
double stat_sup(const CusumField& field);

/// L2 statistic: max over the lattice of the Simpson integral of
/// numerator^2 / rescale.
double stat_l2(const CusumField& field);

enum class LocatorNorm { l2, sup };

/// Break-point locator: argmax over k of the chosen norm of
/// B^T(.) V^{-1} {S_k - (k/n) S_n}, where S_k is the un-normalized weighted
/// moment sum of the first k curves and V the global weighted Gram. Ties
/// break toward the smallest k. Returns the pre-segment curve count.
int locate_break(const FunctionalDataset& data, const SplineBasis& basis, LocatorNorm norm,
                 double epsilon, const Eigen::VectorXd& xgrid);

struct LocatorPair {
  int k_l2 = 0;
  int k_sup = 0;
};

/// Both locators from a single scan over k.
LocatorPair locate_break_both(const FunctionalDataset& data, const SplineBasis& basis,
                              double epsilon, const Eigen::VectorXd& xgrid);

}  // namespace fdbreak

#endif
