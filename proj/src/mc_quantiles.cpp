#include "fdbreak/mc_quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fdbreak/errors.hpp"
#include "fdbreak/parallel.hpp"
#include "fdbreak/quadrature.hpp"

namespace fdbreak {

KernelEigen kernel_eigen(const SigmaEstimate& sigma, const SplineBasis& basis,
                         const Eigen::VectorXd& xgrid) {
  const int m = static_cast<int>(xgrid.size());
  const int dim = basis.dim();

  const RescaleFn rescale(sigma, basis, xgrid);
  const Eigen::VectorXd w = simpson_weights(m);

  // The discretized operator has rank <= dim, so its spectrum is computed in
  // spline coordinates: with U = W^{1/2} R^{-1/2} E Sigma^{1/2} (m x dim), the
  // weighted kernel matrix is U U^T and shares nonzero eigenvalues with U^T U.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_sigma(sigma.sigma);
  Eigen::VectorXd sqrt_ev = es_sigma.eigenvalues();
  for (Eigen::Index i = 0; i < sqrt_ev.size(); ++i)
    sqrt_ev[i] = sqrt_ev[i] > 0.0 ? std::sqrt(sqrt_ev[i]) : 0.0;
  const Eigen::MatrixXd sigma_half =
      es_sigma.eigenvectors() * sqrt_ev.asDiagonal() * es_sigma.eigenvectors().transpose();

  Eigen::MatrixXd u(m, dim);
  {
    double vals[SplineBasis::kMaxOrder];
    int first = 0;
    Eigen::RowVectorXd brow(dim);
    for (int i = 0; i < m; ++i) {
      brow.setZero();
      basis.eval_nonzero(xgrid[i], vals, first);
      for (int r = 0; r < basis.order(); ++r) brow[first + r] = vals[r];
      const double scale = std::sqrt(w[i]) / std::sqrt(rescale.grid_values()[i]);
      u.row(i) = scale * (brow * sigma_half);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(u.transpose() * u);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const double ev_max = ev[ev.size() - 1];
  if (!(ev_max > 0.0))
    throw DegenerateVarianceError("covariance kernel has no positive eigenvalues");
  const double cutoff = 1e-10 * ev_max;

  std::vector<int> keep;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
    if (ev[i] > cutoff) keep.push_back(static_cast<int>(i));

  KernelEigen out;
  const int t_count = static_cast<int>(keep.size());
  out.eigenvalues.resize(t_count);
  out.eigenfunctions.resize(m, t_count);
  for (int k = 0; k < t_count; ++k) {
    const int idx = keep[static_cast<std::size_t>(k)];
    out.eigenvalues[k] = ev[idx];
    // phi_k(x_i) = (U v_k)_i / (sqrt(lambda_k) sqrt(w_i)).
    Eigen::VectorXd col = u * es.eigenvectors().col(idx) / std::sqrt(ev[idx]);
    for (int i = 0; i < m; ++i) col[i] /= std::sqrt(w[i]);
    out.eigenfunctions.col(k) = col;
  }

  const double total = out.eigenvalues.sum();
  double cum = 0.0;
  out.kappa = t_count;
  for (int k = 0; k < t_count; ++k) {
    cum += out.eigenvalues[k];
    if (cum / total > 0.99) {
      out.kappa = k + 1;
      break;
    }
  }
  return out;
}

Eigen::VectorXd sim_bridge(int n, RngStream& rng) {
  if (n < 1) throw ArgumentError("bridge lattice needs n >= 1");
  Eigen::VectorXd w(n + 1);
  w[0] = 0.0;
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 1; k <= n; ++k) w[k] = w[k - 1] + sd * rng.normal();
  const double w1 = w[n];
  for (int k = 0; k <= n; ++k) w[k] -= (static_cast<double>(k) / n) * w1;
  return w;
}

double empirical_upper_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw ArgumentError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto b = static_cast<long>(values.size());
  // ceil((1-alpha)(B+1)) is the exact Monte Carlo convention: rejecting when
  // the statistic exceeds this order statistic agrees with the add-one
  // p-value being at most alpha.
  long rank = static_cast<long>(std::ceil((1.0 - alpha) * static_cast<double>(b + 1)));
  rank = std::clamp(rank, 1L, b);
  return values[static_cast<std::size_t>(rank - 1)];
}

TestQuantiles quantiles_test(const KernelEigen& eig, const std::vector<int>& k_values, int n,
                             int draws, double alpha, std::uint64_t seed, double observed_l2,
                             double observed_sup, int threads) {
  if (draws < 100) throw ArgumentError("quantile simulation needs at least 100 draws");
  if (k_values.empty()) throw ArgumentError("empty time lattice");
  const int kappa = eig.kappa;
  const int t_count = static_cast<int>(k_values.size());

  // phi_k scaled by sqrt(vartheta_k) once, outside the replicate loop.
  Eigen::MatrixXd phi_scaled = eig.eigenfunctions.leftCols(kappa);
  for (int k = 0; k < kappa; ++k) phi_scaled.col(k) *= std::sqrt(eig.eigenvalues[k]);

  std::vector<double> sup_l2(static_cast<std::size_t>(draws));
  std::vector<double> sup_inf(static_cast<std::size_t>(draws));

  parallel_for(
      draws,
      [&](int b) {
        RngStream rng(seed, stream_tag::test_quantiles, static_cast<std::uint64_t>(b));
        Eigen::MatrixXd bridges(kappa, t_count);
        for (int k = 0; k < kappa; ++k) {
          const Eigen::VectorXd path = sim_bridge(n, rng);
          for (int t = 0; t < t_count; ++t)
            bridges(k, t) = path[k_values[static_cast<std::size_t>(t)]];
        }
        double best_l2 = 0.0;
        for (int t = 0; t < t_count; ++t) {
          double xi = 0.0;
          for (int k = 0; k < kappa; ++k)
            xi += eig.eigenvalues[k] * bridges(k, t) * bridges(k, t);
          best_l2 = std::max(best_l2, xi);
        }
        sup_l2[static_cast<std::size_t>(b)] = best_l2;
        sup_inf[static_cast<std::size_t>(b)] =
            (phi_scaled * bridges).array().abs().maxCoeff();
      },
      threads);

  TestQuantiles out;
  out.l2.level = alpha;
  out.l2.draws = draws;
  out.l2.value = empirical_upper_quantile(sup_l2, alpha);
  out.l2.exceed_count = std::count_if(sup_l2.begin(), sup_l2.end(),
                                      [&](double v) { return v >= observed_l2; });
  out.sup.level = alpha;
  out.sup.draws = draws;
  out.sup.value = empirical_upper_quantile(sup_inf, alpha);
  out.sup.exceed_count = std::count_if(sup_inf.begin(), sup_inf.end(),
                                       [&](double v) { return v >= observed_sup; });
  return out;
}

QuantileResult quantile_jump(const SigmaEstimate& sigma, const SplineBasis& basis,
                             const Eigen::VectorXd& xgrid, int draws, double alpha,
                             std::uint64_t seed, double observed, int threads) {
  if (draws < 100) throw ArgumentError("quantile simulation needs at least 100 draws");
  const int m = static_cast<int>(xgrid.size());
  const int dim = basis.dim();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.sigma);
  Eigen::VectorXd sqrt_ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < sqrt_ev.size(); ++i)
    sqrt_ev[i] = sqrt_ev[i] > 0.0 ? std::sqrt(sqrt_ev[i]) : 0.0;
  const Eigen::MatrixXd sigma_half =
      es.eigenvectors() * sqrt_ev.asDiagonal() * es.eigenvectors().transpose();

  const bool all_zero = (sqrt_ev.maxCoeff() <= 0.0);

  // Rows B^T(x) / sqrt(r(x)); all-zero Sigma keeps draws at zero.
  Eigen::MatrixXd rows(m, dim);
  if (!all_zero) {
    const RescaleFn rescale(sigma, basis, xgrid);
    double vals[SplineBasis::kMaxOrder];
    int first = 0;
    for (int i = 0; i < m; ++i) {
      rows.row(i).setZero();
      basis.eval_nonzero(xgrid[i], vals, first);
      for (int r = 0; r < basis.order(); ++r) rows(i, first + r) = vals[r];
      rows.row(i) /= std::sqrt(rescale.grid_values()[i]);
    }
  }

  std::vector<double> sups(static_cast<std::size_t>(draws), 0.0);
  if (!all_zero) {
    parallel_for(
        draws,
        [&](int b) {
          RngStream rng(seed, stream_tag::jump_quantiles, static_cast<std::uint64_t>(b));
          Eigen::VectorXd g(dim);
          for (int i = 0; i < dim; ++i) g[i] = rng.normal();
          const Eigen::VectorXd z = sigma_half * g;
          sups[static_cast<std::size_t>(b)] = (rows * z).array().abs().maxCoeff();
        },
        threads);
  }

  QuantileResult out;
  out.level = alpha;
  out.draws = draws;
  out.value = empirical_upper_quantile(sups, alpha);
  out.exceed_count =
      std::count_if(sups.begin(), sups.end(), [&](double v) { return v >= observed; });
  return out;
}

}  // namespace fdbreak
