#include "fdbreak/quadrature.hpp"

#include <string>

#include "fdbreak/errors.hpp"

namespace fdbreak {

Eigen::VectorXd uniform_grid(int m) {
  if (m < 2) throw ArgumentError("grid needs at least 2 points");
  Eigen::VectorXd g(m);
  for (int i = 0; i < m; ++i) g[i] = static_cast<double>(i) / (m - 1);
  return g;
}

Eigen::VectorXd simpson_weights(int m) {
  if (m < 3 || m % 2 == 0)
    throw ArgumentError("Simpson rule needs an odd grid of >= 3 points, got " + std::to_string(m));
  const double h = 1.0 / (m - 1);
  Eigen::VectorXd w(m);
  w[0] = w[m - 1] = h / 3.0;
  for (int i = 1; i < m - 1; ++i) w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  return w;
}

double integrate_grid(const Eigen::VectorXd& values) {
  return simpson_weights(static_cast<int>(values.size())).dot(values);
}

}  // namespace fdbreak
