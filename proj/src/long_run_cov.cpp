#include "fdbreak/long_run_cov.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fdbreak/design.hpp"
#include "fdbreak/errors.hpp"

namespace fdbreak {

// Share of the pooled brace level used as the floor of the smoothed
// within-observation variance profile.
constexpr double kProfileFloorShare = 0.2;

namespace {

// sum_j B(X_ij) * U_ij for one curve.
Eigen::VectorXd weighted_residual_vector(const SplineBasis& basis, const Curve& c,
                                         const std::vector<double>& u) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dim());
  double vals[SplineBasis::kMaxOrder];
  int first = 0;
  for (int j = 0; j < c.size(); ++j) {
    basis.eval_nonzero(c.x[static_cast<std::size_t>(j)], vals, first);
    for (int r = 0; r < basis.order(); ++r)
      out[first + r] += vals[r] * u[static_cast<std::size_t>(j)];
  }
  return out;
}

void check_residual_shape(const FunctionalDataset& data, const ResidualTable& resid) {
  if (static_cast<int>(resid.size()) != data.n())
    throw ArgumentError("residual table has wrong number of curves");
  for (int i = 0; i < data.n(); ++i)
    if (static_cast<int>(resid[static_cast<std::size_t>(i)].size()) != data.curve(i).size())
      throw ArgumentError("residual table shape mismatch at curve " + std::to_string(i + 1));
}

}  // namespace

ResidualTable residuals(const FunctionalDataset& data, int k_hat, const MeanFit& fit_pre,
                        const MeanFit& fit_post) {
  if (k_hat < 1 || k_hat >= data.n())
    throw ArgumentError("break index " + std::to_string(k_hat) + " outside (0, n)");
  ResidualTable out(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) {
    const Curve& c = data.curve(i);
    const MeanFit& fit = (i < k_hat) ? fit_pre : fit_post;
    std::vector<double>& row = out[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(c.size()));
    for (int j = 0; j < c.size(); ++j)
      row[static_cast<std::size_t>(j)] =
          c.y[static_cast<std::size_t>(j)] - fit.evaluate(c.x[static_cast<std::size_t>(j)]);
  }
  return out;
}

Eigen::MatrixXd sigma1_lag(int h, const ResidualTable& resid, const FunctionalDataset& data,
                           const SplineBasis& basis, const Eigen::MatrixXd& v_hat) {
  const int n = data.n();
  if (std::abs(h) > n - 1) throw ArgumentError("lag |h| must be at most n-1");
  check_residual_shape(data, resid);

  if (h < 0) return sigma1_lag(-h, resid, data, basis, v_hat).transpose();

  const int dim = basis.dim();
  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(dim, dim);

  if (h == 0) {
    // Cross-pair form: (1/n) sum_i (1/{N_i (N_i-1)}) sum_{j != j'} B B^T U U'.
    // The pair sum is u_i u_i^T minus its diagonal contribution.
    double vals[SplineBasis::kMaxOrder];
    int first = 0;
    for (int i = 0; i < n; ++i) {
      const Curve& c = data.curve(i);
      const int ni = c.size();
      if (ni < 2) continue;
      const std::vector<double>& u = resid[static_cast<std::size_t>(i)];
      const Eigen::VectorXd ui = weighted_residual_vector(basis, c, u);
      Eigen::MatrixXd pair = ui * ui.transpose();
      for (int j = 0; j < ni; ++j) {
        basis.eval_nonzero(c.x[static_cast<std::size_t>(j)], vals, first);
        const double uj = u[static_cast<std::size_t>(j)];
        for (int a = 0; a < basis.order(); ++a)
          for (int b = 0; b < basis.order(); ++b)
            pair(first + a, first + b) -= vals[a] * vals[b] * uj * uj;
      }
      inner += pair / (static_cast<double>(ni) * (ni - 1));
    }
  } else {
    for (int i = 0; i + h < n; ++i) {
      const Curve& ci = data.curve(i);
      const Curve& cih = data.curve(i + h);
      const Eigen::VectorXd ui =
          weighted_residual_vector(basis, ci, resid[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd uih =
          weighted_residual_vector(basis, cih, resid[static_cast<std::size_t>(i + h)]);
      inner += (ui * uih.transpose()) / (static_cast<double>(ci.size()) * cih.size());
    }
  }
  inner /= n;

  GramSolver solver(v_hat, basis.order() - 1, "global Gram in lag covariance");
  // V^{-1} inner V^{-1} via two banded solves.
  const Eigen::MatrixXd left = solver.solve_matrix(inner);
  return solver.solve_matrix(left.transpose()).transpose();
}

Eigen::MatrixXd sigma1_sum(const ResidualTable& resid, const FunctionalDataset& data,
                           const SplineBasis& basis, const Eigen::MatrixXd& v_hat, int lag) {
  if (lag < 0) throw ArgumentError("lag window must be nonnegative");
  Eigen::MatrixXd sum = sigma1_lag(0, resid, data, basis, v_hat);
  for (int h = 1; h <= lag; ++h) {
    const Eigen::MatrixXd m = sigma1_lag(h, resid, data, basis, v_hat);
    sum += m + m.transpose();
  }
  return sum;
}

Eigen::MatrixXd sigma2_from_residuals(const FunctionalDataset& data, const SplineBasis& basis,
                                      const ResidualTable& resid, int lag) {
  const int n = data.n();
  check_residual_shape(data, resid);
  if (lag < 0 || lag >= n) throw ArgumentError("lag window must be in [0, n)");

  const Eigen::MatrixXd v_hat = gram_weighted(basis, data, data.full_range());
  const int dim = basis.dim();

  // sum_{h != 0, |h| <= L} Sigma_{1,h}; transpose pairs enter symmetrically.
  Eigen::MatrixXd lag_qform = Eigen::MatrixXd::Zero(dim, dim);
  for (int h = 1; h <= lag; ++h) {
    const Eigen::MatrixXd m = sigma1_lag(h, resid, data, basis, v_hat);
    lag_qform += m + m.transpose();
  }

  // Per-observation brace: squared residual plus the lagged quadratic-form
  // correction. Each brace is a one-point, chi-square-noisy evaluation of the
  // smooth profile G(x,x) + sigma^2(x), so the braces are pooled through the
  // same weighted spline smoother before re-weighting; the raw version leaves
  // the variance proxy with near-zero pockets wherever a boundary region
  // collects only a handful of observations, and the sup statistic explodes
  // exactly there.
  std::vector<Curve> brace_curves(static_cast<std::size_t>(n));
  double vals[SplineBasis::kMaxOrder];
  int first = 0;
  for (int i = 0; i < n; ++i) {
    const Curve& c = data.curve(i);
    const std::vector<double>& u = resid[static_cast<std::size_t>(i)];
    Curve& bc = brace_curves[static_cast<std::size_t>(i)];
    bc.x = c.x;
    bc.y.resize(static_cast<std::size_t>(c.size()));
    for (int j = 0; j < c.size(); ++j) {
      basis.eval_nonzero(c.x[static_cast<std::size_t>(j)], vals, first);
      double qform = 0.0;  // B^T(X_ij) [sum_{h != 0} Sigma_{1,h}] B(X_ij)
      for (int a = 0; a < basis.order(); ++a)
        for (int b = 0; b < basis.order(); ++b)
          qform += vals[a] * lag_qform(first + a, first + b) * vals[b];
      const double uij = u[static_cast<std::size_t>(j)];
      bc.y[static_cast<std::size_t>(j)] = uij * uij + qform;
    }
  }
  const FunctionalDataset braces(std::move(brace_curves));
  const MeanFit smooth = fit_mean(braces, basis, braces.full_range());

  // Pooled level of the profile; the target G(x,x) + sigma^2(x) is bounded
  // away from zero, so a fitted value collapsing far below the pooled level
  // is boundary-extrapolation noise, floored here before re-weighting.
  double pooled = 0.0;
  for (int i = 0; i < n; ++i) {
    const Curve& bc = braces.curve(i);
    double curve_sum = 0.0;
    for (double v : bc.y) curve_sum += v;
    pooled += curve_sum / bc.size();
  }
  pooled = std::max(pooled / n, 0.0);
  const double profile_floor = kProfileFloorShare * pooled;

  Eigen::MatrixXd inner2 = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    const Curve& c = data.curve(i);
    const double w = 1.0 / (static_cast<double>(c.size()) * c.size());
    for (int j = 0; j < c.size(); ++j) {
      const double x = c.x[static_cast<std::size_t>(j)];
      basis.eval_nonzero(x, vals, first);
      const double scale = w * std::max(smooth.evaluate(x), profile_floor);
      for (int a = 0; a < basis.order(); ++a)
        for (int b = 0; b < basis.order(); ++b)
          inner2(first + a, first + b) += scale * vals[a] * vals[b];
    }
  }
  inner2 /= n;
  GramSolver solver(v_hat, basis.order() - 1, "global Gram in sigma2");
  return solver.solve_matrix(solver.solve_matrix(inner2).transpose()).transpose();
}

namespace {

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m, double& clip_mass) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < 0.0) {
      clip_mass += -ev[i];
      ev[i] = 0.0;
    }
  }
  Eigen::MatrixXd out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

SigmaEstimate sigma_total(const FunctionalDataset& data, const SplineBasis& basis, int k_hat,
                          std::optional<int> lag) {
  const int n = data.n();
  if (n < 3) throw ArgumentError("covariance estimation needs n >= 3 curves");
  const int L = lag.value_or(static_cast<int>(std::floor(std::pow(n, 0.2))));
  if (L < 0) throw ArgumentError("lag window must be nonnegative");
  if (L >= n) throw ArgumentError("lag window L must be smaller than n");

  const MeanFit pre = fit_mean(data, basis, {0, k_hat});
  const MeanFit post = fit_mean(data, basis, {k_hat, n});
  ResidualTable resid = residuals(data, k_hat, pre, post);

  // Each segment fit absorbs dim coefficients out of a weighted sample of
  // mass one per curve; the usual degrees-of-freedom inflation restores the
  // residual second moments.
  {
    const double dim_d = basis.dim();
    const double pre_scale =
        std::sqrt(k_hat / std::max(k_hat - dim_d, 1.0));
    const double post_scale =
        std::sqrt((n - k_hat) / std::max(n - k_hat - dim_d, 1.0));
    for (int i = 0; i < n; ++i) {
      const double scale = i < k_hat ? pre_scale : post_scale;
      for (double& u : resid[static_cast<std::size_t>(i)]) u *= scale;
    }
  }

  const Eigen::MatrixXd v_hat = gram_weighted(basis, data, data.full_range());
  Eigen::MatrixXd sigma1 = sigma1_sum(resid, data, basis, v_hat, L);
  Eigen::MatrixXd sigma2 = sigma2_from_residuals(data, basis, resid, L);

  // Both pieces estimate PSD targets, so they are regularized separately
  // before the sum; projecting only the sum would let sign-symmetric noise in
  // the lag piece hollow out the variance proxy pointwise. The lag piece gets
  // eigenvalue hard-thresholding with the threshold read off its own negative
  // tail: a PSD target means every negative eigenvalue is estimation noise,
  // and by sign symmetry positive eigenvalues of that scale are noise too, so
  // they are dropped whole while stronger directions stay unbiased. The
  // within-observation piece is PSD by construction (nonnegative profile
  // weights); any residual negativity is clipped.
  double clip_mass = 0.0;
  Eigen::MatrixXd sigma;
  {
    const Eigen::MatrixXd sym1 = 0.5 * (sigma1 + sigma1.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym1);
    const double threshold = std::max(0.0, -es.eigenvalues().minCoeff());
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      // Hard threshold: directions below the noise scale are dropped whole,
      // directions above it are kept unbiased.
      if (ev[i] <= threshold) {
        clip_mass += std::abs(ev[i]);
        ev[i] = 0.0;
      }
    }
    sigma = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
  }
  sigma += psd_project(sigma2, clip_mass);

  SigmaEstimate out;
  out.v_hat = v_hat;
  out.sigma1 = std::move(sigma1);
  out.sigma2 = std::move(sigma2);
  out.sigma = std::move(sigma);
  out.lag_window = L;
  out.psd_clip_mass = clip_mass;
  return out;
}

Eigen::MatrixXd sigma2_regular(const FunctionalDataset& data, const SplineBasis& basis,
                               const ResidualTable& resid, int lag) {
  const int n = data.n();
  check_residual_shape(data, resid);
  const int N = data.curve(0).size();
  for (int i = 0; i < n; ++i) {
    const Curve& c = data.curve(i);
    if (c.size() != N)
      throw ArgumentError("regular design requires a common number of observations per curve");
    for (int j = 0; j < N; ++j) {
      const double expected = static_cast<double>(j + 1) / N;
      if (std::abs(c.x[static_cast<std::size_t>(j)] - expected) > 1e-12)
        throw ArgumentError("regular design requires X_ij = j/N at curve " + std::to_string(i + 1));
    }
  }
  if (lag < 0 || lag >= n) throw ArgumentError("lag window must be in [0, n)");

  const int dim = basis.dim();
  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(dim, dim);
  double vals[SplineBasis::kMaxOrder];
  int first = 0;
  for (int j = 0; j < N; ++j) {
    double lag_sum = 0.0;
    for (int h = -lag; h <= lag; ++h) {
      for (int i = 0; i < n; ++i) {
        const int ih = i + h;
        if (ih < 0 || ih >= n) continue;
        lag_sum += resid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                   resid[static_cast<std::size_t>(ih)][static_cast<std::size_t>(j)];
      }
    }
    basis.eval_nonzero(static_cast<double>(j + 1) / N, vals, first);
    for (int a = 0; a < basis.order(); ++a)
      for (int b = 0; b < basis.order(); ++b)
        inner(first + a, first + b) += vals[a] * vals[b] * lag_sum;
  }
  inner /= static_cast<double>(n) * N;

  const Eigen::MatrixXd v_hat = gram_weighted(basis, data, data.full_range());
  GramSolver solver(v_hat, basis.order() - 1, "global Gram in regular sigma2");
  return solver.solve_matrix(solver.solve_matrix(inner).transpose()).transpose();
}

RescaleFn::RescaleFn(const SigmaEstimate& sigma, const SplineBasis& basis,
                     const Eigen::VectorXd& xgrid)
    : basis_(basis), sigma_(sigma.sigma) {
  grid_values_.resize(xgrid.size());
  double max_val = 0.0;
  for (Eigen::Index i = 0; i < xgrid.size(); ++i) {
    const Eigen::VectorXd b = basis.eval(xgrid[i]);
    grid_values_[i] = b.dot(sigma_ * b);
    max_val = std::max(max_val, grid_values_[i]);
  }
  if (!(max_val > 0.0))
    throw DegenerateVarianceError("rescaling function vanishes on the whole grid");
  floor_ = 1e-12 * max_val;
  for (Eigen::Index i = 0; i < grid_values_.size(); ++i)
    grid_values_[i] = std::max(grid_values_[i], floor_);
}

double RescaleFn::operator()(double x) const {
  const Eigen::VectorXd b = basis_.eval(x);
  return std::max(b.dot(sigma_ * b), floor_);
}

Eigen::VectorXd rescale_fn(const SigmaEstimate& sigma, const SplineBasis& basis,
                           const Eigen::VectorXd& xgrid) {
  return RescaleFn(sigma, basis, xgrid).grid_values();
}

}  // namespace fdbreak
