#include "fdbreak/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "fdbreak/errors.hpp"

namespace fdbreak {

namespace {

// Adds (1/N_i) * sum_j B(X_ij) B^T(X_ij) and (1/N_i) * sum_j B(X_ij) Y_ij
// for one curve into the running sums.
void accumulate_curve(const SplineBasis& basis, const Curve& c, Eigen::MatrixXd& gram,
                      Eigen::VectorXd& moment) {
  const int p = basis.order();
  const double w = 1.0 / c.size();
  double vals[SplineBasis::kMaxOrder];
  int first = 0;
  for (int j = 0; j < c.size(); ++j) {
    basis.eval_nonzero(c.x[static_cast<std::size_t>(j)], vals, first);
    const double y = c.y[static_cast<std::size_t>(j)];
    for (int a = 0; a < p; ++a) {
      const double wa = w * vals[a];
      moment[first + a] += wa * y;
      for (int b = 0; b < p; ++b) gram(first + a, first + b) += wa * vals[b];
    }
  }
}

}  // namespace

Eigen::MatrixXd gram_weighted(const SplineBasis& basis, const FunctionalDataset& data,
                              CurveRange range) {
  data.check_range(range);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(basis.dim());
  for (int i = range.begin; i < range.end; ++i)
    accumulate_curve(basis, data.curve(i), gram, moment);
  gram /= range.count();
  return gram;
}

Eigen::VectorXd moment_weighted(const SplineBasis& basis, const FunctionalDataset& data,
                                CurveRange range) {
  data.check_range(range);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(basis.dim());
  for (int i = range.begin; i < range.end; ++i)
    accumulate_curve(basis, data.curve(i), gram, moment);
  moment /= range.count();
  return moment;
}

bool BandedCholesky::factor(const Eigen::MatrixXd& a, int bandwidth) {
  dim_ = static_cast<int>(a.rows());
  bw_ = std::min(bandwidth, dim_ - 1);
  band_.setZero(dim_, bw_ + 1);
  for (int j = 0; j < dim_; ++j) {
    double diag = a(j, j);
    for (int d = 1; d <= bw_ && j - d >= 0; ++d) diag -= band_(j, d) * band_(j, d);
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double ljj = std::sqrt(diag);
    band_(j, 0) = ljj;
    for (int i = j + 1; i <= std::min(j + bw_, dim_ - 1); ++i) {
      double s = a(i, j);
      // Overlap of rows i and j within the band.
      for (int k = std::max({0, i - bw_, j - bw_}); k < j; ++k)
        s -= band_(i, i - k) * band_(j, j - k);
      band_(i, i - j) = s / ljj;
    }
  }
  return true;
}

void BandedCholesky::solve_in_place(Eigen::VectorXd& b) const {
  // L z = b
  for (int i = 0; i < dim_; ++i) {
    double s = b[i];
    for (int d = 1; d <= bw_ && i - d >= 0; ++d) s -= band_(i, d) * b[i - d];
    b[i] = s / band_(i, 0);
  }
  // L^T x = z
  for (int i = dim_ - 1; i >= 0; --i) {
    double s = b[i];
    for (int d = 1; d <= bw_ && i + d < dim_; ++d) s -= band_(i + d, d) * b[i + d];
    b[i] = s / band_(i, 0);
  }
}

Eigen::MatrixXd BandedCholesky::solve_matrix(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd out = b;
  Eigen::VectorXd col(dim_);
  for (int c = 0; c < out.cols(); ++c) {
    col = out.col(c);
    solve_in_place(col);
    out.col(c) = col;
  }
  return out;
}

namespace {

double spd_condition(const Eigen::MatrixXd& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

GramSolver::GramSolver(const Eigen::MatrixXd& v, int bandwidth, const std::string& context) {
  condition_ = spd_condition(v);
  if (condition_ <= kConditionLimit && chol_.factor(v, bandwidth)) return;

  const int dim = static_cast<int>(v.rows());
  const double ridge = 1e-8 * v.trace() / dim;
  Eigen::MatrixXd vr = v;
  vr.diagonal().array() += ridge;
  ridged_ = true;
  condition_ = spd_condition(vr);
  if (condition_ > kConditionLimit || !chol_.factor(vr, bandwidth))
    throw SingularDesignError("weighted Gram matrix is singular even after ridge fallback (" +
                              context + ")");
}

DesignAccumulator::DesignAccumulator(const SplineBasis& basis, const FunctionalDataset& data)
    : basis_(basis),
      data_(data),
      gram_(Eigen::MatrixXd::Zero(basis.dim(), basis.dim())),
      moment_(Eigen::VectorXd::Zero(basis.dim())) {}

void DesignAccumulator::absorb_next() {
  if (next_ >= data_.n()) throw ArgumentError("no further curves to absorb");
  accumulate_curve(basis_, data_.curve(next_), gram_, moment_);
  ++next_;
}

}  // namespace fdbreak
