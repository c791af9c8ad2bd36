#ifndef FDBREAK_SPLINE_BASIS_HPP
#define FDBREAK_SPLINE_BASIS_HPP

#include <vector>

#include <Eigen/Core>

namespace fdbreak {

/// Clamped B-spline basis of order p (degree p-1) on J equally spaced interior
/// knots of [0,1]. The basis has dimension J + p, each function is supported on
/// at most p sub-intervals, and the functions sum to one everywhere.
///
/// Sub-intervals follow the half-open convention [t_l, t_{l+1}); x = 1 belongs
/// to the last sub-interval.
class SplineBasis {
public:
  static constexpr int kMaxOrder = 16;

  SplineBasis(int order, int interior_knots);

  int order() const { return order_; }
  int interior_knots() const { return interior_; }
  int dim() const { return interior_ + order_; }

  /// Full clamped knot vector: p copies of 0, the interior knots l/(J+1),
  /// then p copies of 1 (2p + J entries).
  const std::vector<double>& knots() const { return knots_; }

  /// Interior knot positions l/(J+1), l = 1..J.
  std::vector<double> interior_positions() const;

  /// Dense basis vector (B_1(x), ..., B_dim(x)). Throws DomainError outside [0,1].
  Eigen::VectorXd eval(double x) const;

  /// The p possibly-nonzero basis values at x, written to values[0..p-1];
  /// `first` receives the index of the first nonzero function. This is the
  /// cheap inner kernel used by all design-matrix assembly.
  void eval_nonzero(double x, double* values, int& first) const;

private:
  int find_span(double x) const;

  int order_;
  int interior_;
  std::vector<double> knots_;
};

}  // namespace fdbreak

#endif
