#include "fdbreak/spline_basis.hpp"

#include <algorithm>
#include <string>

#include "fdbreak/errors.hpp"

namespace fdbreak {

SplineBasis::SplineBasis(int order, int interior_knots)
    : order_(order), interior_(interior_knots) {
  if (order < 1) throw ArgumentError("spline order must be >= 1, got " + std::to_string(order));
  if (order > kMaxOrder)
    throw ArgumentError("spline order must be <= " + std::to_string(kMaxOrder));
  if (interior_knots < 0)
    throw ArgumentError("interior knot count must be >= 0, got " + std::to_string(interior_knots));

  // p copies of 0, interior knots, p copies of 1.
  knots_.reserve(static_cast<std::size_t>(2 * order_ + interior_));
  for (int i = 0; i < order_; ++i) knots_.push_back(0.0);
  for (int l = 1; l <= interior_; ++l)
    knots_.push_back(static_cast<double>(l) / (interior_ + 1));
  for (int i = 0; i < order_; ++i) knots_.push_back(1.0);
}

std::vector<double> SplineBasis::interior_positions() const {
  std::vector<double> pos(static_cast<std::size_t>(interior_));
  for (int l = 1; l <= interior_; ++l)
    pos[static_cast<std::size_t>(l - 1)] = static_cast<double>(l) / (interior_ + 1);
  return pos;
}

int SplineBasis::find_span(double x) const {
  // Knot spans with index mu in [p-1, p-1+J]; span mu covers [knots[mu], knots[mu+1]).
  const int lo = order_ - 1;
  const int hi = order_ - 1 + interior_;
  if (x >= 1.0) return hi;
  // Interior knots are equally spaced, so the span is a direct computation.
  int mu = lo + static_cast<int>(x * (interior_ + 1));
  mu = std::clamp(mu, lo, hi);
  // Guard against rounding at knot boundaries.
  while (mu > lo && x < knots_[static_cast<std::size_t>(mu)]) --mu;
  while (mu < hi && x >= knots_[static_cast<std::size_t>(mu + 1)]) ++mu;
  return mu;
}

void SplineBasis::eval_nonzero(double x, double* values, int& first) const {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("basis evaluation point " + std::to_string(x) + " outside [0,1]");

  const int span = find_span(x);
  const int degree = order_ - 1;
  first = span - degree;

  // Cox-de Boor triangle for the p nonzero functions on this span.
  values[0] = 1.0;
  double left[kMaxOrder];
  double right[kMaxOrder];
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots_[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = values[r] / (right[r + 1] + left[j - r]);
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
}

Eigen::VectorXd SplineBasis::eval(double x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  double vals[kMaxOrder];
  int first = 0;
  eval_nonzero(x, vals, first);
  for (int r = 0; r < order_; ++r) out[first + r] = vals[r];
  return out;
}

}  // namespace fdbreak
