#ifndef FDBREAK_QUADRATURE_HPP
#define FDBREAK_QUADRATURE_HPP

#include <Eigen/Core>

namespace fdbreak {

/// Uniform grid i/(m-1), i = 0..m-1, on [0,1].
Eigen::VectorXd uniform_grid(int m);

/// Composite Simpson weights for an odd-sized uniform grid on [0,1]; the
/// weights sum to one. Throws ArgumentError if m is even or < 3.
Eigen::VectorXd simpson_weights(int m);

/// Composite Simpson approximation of the integral over [0,1] of values
/// sampled on the uniform grid of matching (odd, >= 3) size.
double integrate_grid(const Eigen::VectorXd& values);

}  // namespace fdbreak

#endif
