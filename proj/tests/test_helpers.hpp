#ifndef FDBREAK_TEST_HELPERS_HPP
#define FDBREAK_TEST_HELPERS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fdbreak/dataset.hpp"
#include "fdbreak/rng.hpp"
#include "fdbreak/spline_basis.hpp"

namespace testutil {

// Independent Cox-de Boor recursion, straight from the defining recurrence
// with 0/0 := 0. Deliberately naive; the production evaluator is checked
// against it, never the other way around.
inline double naive_bspline(const std::vector<double>& knots, int i, int p, double x) {
  if (p == 1) {
    const bool last = knots[static_cast<std::size_t>(i + 1)] >= 1.0 && x == 1.0 &&
                      knots[static_cast<std::size_t>(i)] < 1.0;
    return (x >= knots[static_cast<std::size_t>(i)] &&
            x < knots[static_cast<std::size_t>(i + 1)]) ||
                   last
               ? 1.0
               : 0.0;
  }
  const double d1 = knots[static_cast<std::size_t>(i + p - 1)] - knots[static_cast<std::size_t>(i)];
  const double d2 = knots[static_cast<std::size_t>(i + p)] - knots[static_cast<std::size_t>(i + 1)];
  double out = 0.0;
  if (d1 > 0.0)
    out += (x - knots[static_cast<std::size_t>(i)]) / d1 * naive_bspline(knots, i, p - 1, x);
  if (d2 > 0.0)
    out += (knots[static_cast<std::size_t>(i + p)] - x) / d2 * naive_bspline(knots, i + 1, p - 1, x);
  return out;
}

inline Eigen::VectorXd naive_basis_vector(const fdbreak::SplineBasis& basis, double x) {
  Eigen::VectorXd out(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) out[i] = naive_bspline(basis.knots(), i, basis.order(), x);
  return out;
}

// Builds a dataset of curves y = f_i(x) + noise sampled at uniform draws.
inline fdbreak::FunctionalDataset make_dataset(
    int n, int points_lo, int points_hi, std::uint64_t seed,
    const std::function<double(int, double)>& mean, double noise_sd = 0.0) {
  fdbreak::RngStream rng(seed, 0xDA7A, 0);
  std::vector<fdbreak::Curve> curves(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int ni = static_cast<int>(rng.uniform_int(points_lo, points_hi));
    fdbreak::Curve& c = curves[static_cast<std::size_t>(i)];
    for (int j = 0; j < ni; ++j) {
      const double x = rng.uniform01();
      c.x.push_back(x);
      c.y.push_back(mean(i, x) + (noise_sd > 0.0 ? noise_sd * rng.normal() : 0.0));
    }
  }
  return fdbreak::FunctionalDataset(std::move(curves));
}

// Deterministic dense design: every curve sampled at (j + 0.5) / points.
inline fdbreak::FunctionalDataset make_dense_dataset(
    int n, int points, const std::function<double(int, double)>& mean) {
  std::vector<fdbreak::Curve> curves(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    fdbreak::Curve& c = curves[static_cast<std::size_t>(i)];
    for (int j = 0; j < points; ++j) {
      const double x = (j + 0.5) / points;
      c.x.push_back(x);
      c.y.push_back(mean(i, x));
    }
  }
  return fdbreak::FunctionalDataset(std::move(curves));
}

// Noisy curves on one shared x-grid. A balanced design keeps the partial
// Gram sums exact multiples of the global one, so locator decisions cannot
// drift under transformations that cancel algebraically.
inline fdbreak::FunctionalDataset make_common_grid_dataset(
    int n, int points, std::uint64_t seed, const std::function<double(int, double)>& mean,
    double noise_sd) {
  fdbreak::RngStream rng(seed, 0xDA7B, 0);
  std::vector<fdbreak::Curve> curves(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    fdbreak::Curve& c = curves[static_cast<std::size_t>(i)];
    for (int j = 0; j < points; ++j) {
      const double x = (j + 0.5) / points;
      c.x.push_back(x);
      c.y.push_back(mean(i, x) + noise_sd * rng.normal());
    }
  }
  return fdbreak::FunctionalDataset(std::move(curves));
}

// Copies a dataset with y -> scale * y + shift(x).
inline fdbreak::FunctionalDataset transform_dataset(
    const fdbreak::FunctionalDataset& data, double scale,
    const std::function<double(double)>& shift) {
  std::vector<fdbreak::Curve> curves(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) {
    const fdbreak::Curve& src = data.curve(i);
    fdbreak::Curve& dst = curves[static_cast<std::size_t>(i)];
    dst.x = src.x;
    dst.y.resize(src.y.size());
    for (std::size_t j = 0; j < src.y.size(); ++j)
      dst.y[j] = scale * src.y[j] + shift(src.x[j]);
  }
  return fdbreak::FunctionalDataset(std::move(curves));
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil

#endif
