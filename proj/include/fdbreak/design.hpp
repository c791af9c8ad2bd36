#ifndef FDBREAK_DESIGN_HPP
#define FDBREAK_DESIGN_HPP

#include <string>

#include <Eigen/Core>

#include "fdbreak/dataset.hpp"
#include "fdbreak/spline_basis.hpp"

namespace fdbreak {

/// Weighted Gram matrix over the curve range:
///   (1/count) * sum_i (1/N_i) * sum_j B(X_ij) B^T(X_ij).
/// Symmetric PSD and banded: entries (a,b) with |a-b| >= p vanish.
Eigen::MatrixXd gram_weighted(const SplineBasis& basis, const FunctionalDataset& data,
                              CurveRange range);

/// Weighted moment vector over the curve range:
///   (1/count) * sum_i (1/N_i) * sum_j B(X_ij) Y_ij.
Eigen::VectorXd moment_weighted(const SplineBasis& basis, const FunctionalDataset& data,
                                CurveRange range);

/// Cholesky factorization of a symmetric positive-definite band matrix,
/// touching only entries within `bandwidth` of the diagonal. O(dim * bw^2)
/// to factor, O(dim * bw) per solve.
class BandedCholesky {
public:
  /// Returns false when a pivot is not strictly positive (not numerically PD).
  bool factor(const Eigen::MatrixXd& a, int bandwidth);

  void solve_in_place(Eigen::VectorXd& b) const;
  Eigen::VectorXd solve(Eigen::VectorXd b) const {
    solve_in_place(b);
    return b;
  }
  /// Column-wise solve.
  Eigen::MatrixXd solve_matrix(const Eigen::MatrixXd& b) const;

private:
  Eigen::MatrixXd band_;  // band_(i, d) = L(i, i-d), d = 0..bw
  int bw_ = 0;
  int dim_ = 0;
};

/// Solver for weighted Gram systems under the ill-conditioning policy:
/// if cond_2(V) exceeds 1e12 (or Cholesky breaks down), add the ridge
/// 1e-8 * trace(V)/dim * I once and retry; if the ridged matrix still
/// exceeds the limit, throw SingularDesignError naming `context`.
class GramSolver {
public:
  static constexpr double kConditionLimit = 1e12;

  GramSolver(const Eigen::MatrixXd& v, int bandwidth, const std::string& context);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return chol_.solve(b); }
  Eigen::MatrixXd solve_matrix(const Eigen::MatrixXd& b) const { return chol_.solve_matrix(b); }

  double condition() const { return condition_; }
  bool ridged() const { return ridged_; }

private:
  BandedCholesky chol_;
  double condition_ = 0.0;
  bool ridged_ = false;
};

/// Running un-normalized Gram and moment sums over a prefix of curves.
/// After absorbing k curves, gram_sum() equals k * gram_weighted over them
/// (one rank-N_i update per curve, never a rescan).
class DesignAccumulator {
public:
  DesignAccumulator(const SplineBasis& basis, const FunctionalDataset& data);

  /// Absorb the next curve in time order.
  void absorb_next();

  int absorbed() const { return next_; }
  const Eigen::MatrixXd& gram_sum() const { return gram_; }
  const Eigen::VectorXd& moment_sum() const { return moment_; }

private:
  const SplineBasis& basis_;
  const FunctionalDataset& data_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
  int next_ = 0;
};

}  // namespace fdbreak

#endif
