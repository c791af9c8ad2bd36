#ifndef FDBREAK_MC_QUANTILES_HPP
#define FDBREAK_MC_QUANTILES_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fdbreak/long_run_cov.hpp"
#include "fdbreak/rng.hpp"
#include "fdbreak/spline_basis.hpp"

namespace fdbreak {

/// Eigen-decomposition of the correlation-normalized covariance kernel
///   C(x, x') = r(x)^{-1/2} B^T(x) Sigma B(x') r(x')^{-1/2}
/// discretized on the quadrature grid. Eigenfunctions are orthonormal under
/// Simpson weights; eigenvalues are the positive ones, descending, and sum to
/// about one (the kernel has unit diagonal). `kappa` is the smallest count
/// whose cumulative eigenvalue share exceeds 0.99.
struct KernelEigen {
  Eigen::VectorXd eigenvalues;     // size T
  Eigen::MatrixXd eigenfunctions;  // grid x T
  int kappa = 0;
};

KernelEigen kernel_eigen(const SigmaEstimate& sigma, const SplineBasis& basis,
                         const Eigen::VectorXd& xgrid);

/// Standard Brownian bridge sampled on the lattice {k/n : k = 0..n}: Gaussian
/// increments of a Brownian motion tied down at 1. Exact in distribution on
/// the lattice.
Eigen::VectorXd sim_bridge(int n, RngStream& rng);

/// Empirical upper-alpha quantile of a batch of simulated suprema, plus the
/// exceedance count against an observed statistic.
struct QuantileResult {
  double level = 0.0;      // alpha
  double value = 0.0;      // upper-alpha order statistic
  int draws = 0;           // B
  long exceed_count = 0;   // #{b : sim_b >= observed}

  /// Add-one convention keeps p-values strictly positive.
  double p_value() const { return (1.0 + exceed_count) / (draws + 1.0); }
};

struct TestQuantiles {
  QuantileResult l2;
  QuantileResult sup;
};

/// Simulates the null laws of both statistics: replicate b draws kappa
/// independent bridges restricted to the k-lattice, then takes
///   sup_t sum_k vartheta_k bridge_k^2(t)          (L2 law)
///   sup_{t,x} |sum_k vartheta_k^{1/2} phi_k(x) bridge_k(t)|  (sup law).
/// Draws are keyed by (seed, replicate), so results do not depend on the
/// worker count. Requires draws >= 100; empirical quantiles below that are
/// too noisy to act on.
TestQuantiles quantiles_test(const KernelEigen& eig, const std::vector<int>& k_values, int n,
                             int draws, double alpha, std::uint64_t seed, double observed_l2,
                             double observed_sup, int threads = 0);

/// Quantile of sup_x |B^T(x) Z| / sqrt(r(x)) over the grid for Z ~ N(0, Sigma)
/// drawn through the eigenvalue square root; drives the jump band width.
QuantileResult quantile_jump(const SigmaEstimate& sigma, const SplineBasis& basis,
                             const Eigen::VectorXd& xgrid, int draws, double alpha,
                             std::uint64_t seed, double observed = 0.0, int threads = 0);

/// Upper-alpha empirical quantile: the ceil((1-alpha) B)-th ascending order
/// statistic, clamped to the sample range.
double empirical_upper_quantile(std::vector<double> values, double alpha);

}  // namespace fdbreak

#endif
