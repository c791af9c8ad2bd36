#ifndef FDBREAK_LONG_RUN_COV_HPP
#define FDBREAK_LONG_RUN_COV_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fdbreak/dataset.hpp"
#include "fdbreak/mean_fit.hpp"
#include "fdbreak/spline_basis.hpp"

namespace fdbreak {

/// Plug-in covariance matrices in spline coordinates. `sigma1` and `sigma2`
/// hold the raw lag-window and within-observation pieces; `sigma` is their
/// regularized PSD sum (spectral hard-threshold on the lag piece, clip on the
/// rest), and `psd_clip_mass` the total spectral mass the regularization
/// removed.
struct SigmaEstimate {
  Eigen::MatrixXd v_hat;
  Eigen::MatrixXd sigma1;
  Eigen::MatrixXd sigma2;
  Eigen::MatrixXd sigma;
  int lag_window = 0;
  double psd_clip_mass = 0.0;
};

/// Ragged residual table, same shape as the dataset.
using ResidualTable = std::vector<std::vector<double>>;

/// Two-segment residuals: Y_ij minus the pre-break fit for curves before the
/// split and minus the post-break fit after it. `k_hat` is the pre-segment
/// curve count, 1 <= k_hat <= n-1.
ResidualTable residuals(const FunctionalDataset& data, int k_hat, const MeanFit& fit_pre,
                        const MeanFit& fit_post);

/// Lag-h autocovariance estimate in spline coordinates, sandwiched by the
/// inverse global Gram. h = 0 uses the cross-pair form with weight
/// 1/{N_i (N_i - 1)}; curves with a single observation contribute nothing to
/// it. Negative lags are the transposes of the positive ones.
Eigen::MatrixXd sigma1_lag(int h, const ResidualTable& resid, const FunctionalDataset& data,
                           const SplineBasis& basis, const Eigen::MatrixXd& v_hat);

/// Lag-window sum: sum of sigma1_lag over |h| <= L.
Eigen::MatrixXd sigma1_sum(const ResidualTable& resid, const FunctionalDataset& data,
                           const SplineBasis& basis, const Eigen::MatrixXd& v_hat, int lag);

/// Within-observation piece from a given residual table: each squared
/// residual is inflated by the lagged quadratic-form correction
/// sum_{h != 0} B^T(X_ij) Sigma_{1,h} B(X_ij), weighted by N_i^{-2} (the
/// squared fit weight, so the block tracks the variance of the weighted
/// moment sums), then sandwiched by the inverse Gram. Exposed so alternative
/// estimators can be compared on identical residuals.
Eigen::MatrixXd sigma2_from_residuals(const FunctionalDataset& data, const SplineBasis& basis,
                                      const ResidualTable& resid, int lag);

/// Full plug-in estimate: fits the two segments split at `k_hat`, forms the
/// residuals (with the degrees-of-freedom inflation for the fitted segment
/// means), sums sigma1 over lags |h| <= L (default L = floor(n^(1/5))), adds
/// the within-observation piece sigma2, and regularizes each piece onto the
/// PSD cone before summing.
SigmaEstimate sigma_total(const FunctionalDataset& data, const SplineBasis& basis, int k_hat,
                          std::optional<int> lag = std::nullopt);

/// Simplified within-observation estimate for the regular fixed design
/// X_ij = j/N, N_i = N. Out-of-range lagged curves are dropped. Throws
/// ArgumentError when the design is not regular-fixed.
Eigen::MatrixXd sigma2_regular(const FunctionalDataset& data, const SplineBasis& basis,
                               const ResidualTable& resid, int lag);

/// Pointwise variance proxy r(x) = B^T(x) Sigma B(x), floored at
/// 1e-12 * (max over the reference grid) so downstream divisions stay finite.
/// Construction throws DegenerateVarianceError when r vanishes identically.
class RescaleFn {
public:
  RescaleFn(const SigmaEstimate& sigma, const SplineBasis& basis, const Eigen::VectorXd& xgrid);

  double operator()(double x) const;
  const Eigen::VectorXd& grid_values() const { return grid_values_; }
  double floor_value() const { return floor_; }

private:
  SplineBasis basis_;
  Eigen::MatrixXd sigma_;
  Eigen::VectorXd grid_values_;
  double floor_ = 0.0;
};

/// Grid values of the floored rescaling function (convenience wrapper).
Eigen::VectorXd rescale_fn(const SigmaEstimate& sigma, const SplineBasis& basis,
                           const Eigen::VectorXd& xgrid);

}  // namespace fdbreak

#endif
