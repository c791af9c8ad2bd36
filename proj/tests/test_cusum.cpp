#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "fdbreak/cusum.hpp"
#include "fdbreak/design.hpp"
#include "fdbreak/errors.hpp"
#include "fdbreak/quadrature.hpp"
#include "test_helpers.hpp"

using fdbreak::CusumField;
using fdbreak::FunctionalDataset;
using fdbreak::LocatorNorm;
using fdbreak::SigmaEstimate;
using fdbreak::SplineBasis;

namespace {

SigmaEstimate unit_sigma(int dim) {
  SigmaEstimate s;
  s.sigma = Eigen::MatrixXd::Identity(dim, dim);
  s.v_hat = Eigen::MatrixXd::Identity(dim, dim);
  return s;
}

// Four curves: two at level 0, two at level 1, scalar basis.
FunctionalDataset two_level_four_curves() {
  std::vector<fdbreak::Curve> curves(4);
  for (int i = 0; i < 4; ++i) {
    curves[static_cast<std::size_t>(i)].x = {0.2, 0.5, 0.8};
    const double level = i < 2 ? 0.0 : 1.0;
    curves[static_cast<std::size_t>(i)].y = {level, level, level};
  }
  return FunctionalDataset(std::move(curves));
}

}  // namespace

TEST_SUITE_BEGIN("cusum");

TEST_CASE("hand-computed scalar field") {
  const FunctionalDataset data = two_level_four_curves();
  const SplineBasis basis(1, 0);
  const Eigen::VectorXd xgrid = fdbreak::uniform_grid(11);
  const CusumField field = fdbreak::cusum_field(data, basis, unit_sigma(1), 0.25, xgrid);

  REQUIRE(field.k_values.size() == 3);  // k = 1, 2, 3
  CHECK(field.numerator(0, 0) == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(field.numerator(1, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(field.numerator(2, 0) == doctest::Approx(-0.25).epsilon(1e-14));

  CHECK(fdbreak::stat_sup(field) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fdbreak::stat_l2(field) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("constant data produces a zero field") {
  const auto data = testutil::make_dataset(9, 2, 5, 63, [](int, double) { return 2.5; });
  const SplineBasis basis(2, 1);
  const Eigen::VectorXd xgrid = fdbreak::uniform_grid(51);
  const CusumField field = fdbreak::cusum_field(data, basis, unit_sigma(basis.dim()), 0.2, xgrid);
  CHECK(field.numerator.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("single-cell arithmetic of the statistics") {
  CusumField field;
  field.n = 1;
  field.k_values = {1};
  field.tgrid = Eigen::VectorXd::Ones(1);
  field.xgrid = fdbreak::uniform_grid(3);
  field.numerator = Eigen::MatrixXd::Constant(1, 3, 3.0);
  field.rescale = Eigen::VectorXd::Constant(3, 4.0);
  CHECK(fdbreak::stat_sup(field) == doctest::Approx(1.5).epsilon(1e-15));
  // integrand (3^2 / 4) is constant, so the integral equals it.
  CHECK(fdbreak::stat_l2(field) == doctest::Approx(2.25).epsilon(1e-14));

  field.numerator.setZero();
  CHECK(fdbreak::stat_sup(field) == 0.0);
  CHECK(fdbreak::stat_l2(field) == 0.0);
}

TEST_CASE("spline-space shifts leave the field unchanged") {
  const auto data = testutil::make_dataset(
      16, 2, 6, 67, [](int i, double x) { return x + 0.1 * i; }, 0.5);
  const SplineBasis basis(3, 2);
  const Eigen::VectorXd xgrid = fdbreak::uniform_grid(101);
  const SigmaEstimate sigma = unit_sigma(basis.dim());

  Eigen::VectorXd g_coeffs(basis.dim());
  for (int i = 0; i < basis.dim(); ++i) g_coeffs[i] = 0.4 * i - 1.0;
  const auto shifted = testutil::transform_dataset(
      data, 1.0, [&](double x) { return basis.eval(x).dot(g_coeffs); });

  const CusumField f1 = fdbreak::cusum_field(data, basis, sigma, 0.15, xgrid);
  const CusumField f2 = fdbreak::cusum_field(shifted, basis, sigma, 0.15, xgrid);
  CHECK(testutil::max_abs_diff(f1.numerator, f2.numerator) < 1e-9);
}

TEST_CASE("epsilon zero diagnostics: the t = 1 row is exactly zero") {
  const auto data = testutil::make_dataset(
      8, 25, 30, 69, [](int i, double x) { return std::sin(x) + 0.2 * i; }, 0.3);
  const SplineBasis basis(2, 1);
  const Eigen::VectorXd xgrid = fdbreak::uniform_grid(41);
  const CusumField field = fdbreak::cusum_field(data, basis, unit_sigma(basis.dim()), 0.0, xgrid);
  REQUIRE(field.k_values.front() == 0);
  REQUIRE(field.k_values.back() == data.n());
  CHECK(field.numerator.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(field.numerator.row(field.numerator.rows() - 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("S_n never exceeds T_n squared") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto data = testutil::make_dataset(
        20, 2, 6, 700 + seed,
        [&](int i, double x) { return std::cos(2 * x) + (i >= 10 ? 0.6 : 0.0); }, 1.0);
    const SplineBasis basis(3, 1);
    const auto sigma = fdbreak::sigma_total(data, basis, 10, 1);
    const Eigen::VectorXd xgrid = fdbreak::uniform_grid(101);
    const CusumField field = fdbreak::cusum_field(data, basis, sigma, 0.1, xgrid);
    const double t = fdbreak::stat_sup(field);
    const double s = fdbreak::stat_l2(field);
    CHECK(s <= t * t + 1e-12);
  }
}

TEST_CASE("degeneration to the classical CUSUM of curve averages") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto data = testutil::make_dataset(
        25, 2, 8, seed, [](int i, double x) { return x + (i >= 12 ? 0.8 : 0.0); }, 1.0);
    const int n = data.n();
    const SplineBasis basis(1, 0);
    const auto sigma = fdbreak::sigma_total(data, basis, 12, std::nullopt);
    const Eigen::VectorXd xgrid = fdbreak::uniform_grid(11);
    const double eps = 0.1;
    const CusumField field = fdbreak::cusum_field(data, basis, sigma, eps, xgrid);
    const double t_n = fdbreak::stat_sup(field);

    // Classical normalized CUSUM of the per-curve averages, same variance.
    std::vector<double> ybar(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (double y : data.curve(i).y) s += y;
      ybar[static_cast<std::size_t>(i)] = s / data.curve(i).size();
    }
    double total = 0.0;
    for (double v : ybar) total += v;
    double classical = 0.0;
    const int lo = static_cast<int>(std::ceil(eps * n));
    const int hi = static_cast<int>(std::floor((1.0 - eps) * n));
    for (int k = lo; k <= hi; ++k) {
      double partial = 0.0;
      for (int i = 0; i < k; ++i) partial += ybar[static_cast<std::size_t>(i)];
      const double num = (partial - (static_cast<double>(k) / n) * total) / std::sqrt(n);
      classical = std::max(classical, std::abs(num) / std::sqrt(sigma.sigma(0, 0)));
    }
    CHECK(std::abs(t_n - classical) < 1e-10);
  }
}

TEST_CASE("locator finds a deterministic break exactly") {
  const int n = 20;
  const int k0 = 10;
  const auto data = testutil::make_dense_dataset(
      n, 30, [&](int i, double) { return i < k0 ? 0.0 : 1.0; });
  const SplineBasis basis(4, 2);
  const Eigen::VectorXd xgrid = fdbreak::uniform_grid(101);

  const auto pair = fdbreak::locate_break_both(data, basis, 0.1, xgrid);
  CHECK(pair.k_l2 == k0);
  CHECK(pair.k_sup == k0);

  // Brute-force argmax over all k with dense algebra, plus strict dominance
  // of the true break.
  const Eigen::MatrixXd v = fdbreak::gram_weighted(basis, data, data.full_range());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(basis.dim());
  std::vector<Eigen::VectorXd> prefix(static_cast<std::size_t>(n + 1),
                                      Eigen::VectorXd::Zero(basis.dim()));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(basis.dim());
    for (int j = 0; j < data.curve(i).size(); ++j)
      acc += basis.eval(data.curve(i).x[static_cast<std::size_t>(j)]) *
             data.curve(i).y[static_cast<std::size_t>(j)];
    acc /= data.curve(i).size();
    prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + acc;
  }
  total = prefix[static_cast<std::size_t>(n)];

  std::vector<double> objective;
  std::vector<int> ks;
  for (int k = 2; k <= 18; ++k) {
    const Eigen::VectorXd d = v.colPivHouseholderQr().solve(
        prefix[static_cast<std::size_t>(k)] - (static_cast<double>(k) / n) * total);
    Eigen::VectorXd g(xgrid.size());
    for (Eigen::Index i = 0; i < xgrid.size(); ++i) g[i] = basis.eval(xgrid[i]).dot(d);
    objective.push_back(fdbreak::integrate_grid(g.array().square().matrix()));
    ks.push_back(k);
  }
  int best_k = -1;
  double best_obj = -1.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (objective[i] > best_obj) {
      best_obj = objective[i];
      best_k = ks[i];
    }
  }
  CHECK(best_k == k0);
  // The true break strictly dominates every other split.
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] != k0) CHECK(objective[i] < best_obj);
}

TEST_CASE("locator tie-breaks and scaling invariance") {
  // All-zero data keeps every objective exactly zero, so the tie-break
  // surfaces: the smallest admissible k wins.
  const auto identical = testutil::make_dataset(12, 2, 5, 71, [](int, double) { return 0.0; });
  const SplineBasis basis(2, 0);
  const Eigen::VectorXd xgrid = fdbreak::uniform_grid(51);
  const int k = fdbreak::locate_break(identical, basis, LocatorNorm::l2, 0.25, xgrid);
  CHECK(k == 3);  // ceil(0.25 * 12)

  const auto noisy = testutil::make_dataset(
      18, 2, 6, 73, [](int i, double x) { return x + (i >= 9 ? 0.5 : 0.0); }, 0.7);
  const auto scaled = testutil::transform_dataset(noisy, 4.0, [](double) { return 0.0; });
  for (auto norm : {LocatorNorm::l2, LocatorNorm::sup}) {
    CHECK(fdbreak::locate_break(noisy, basis, norm, 0.1, xgrid) ==
          fdbreak::locate_break(scaled, basis, norm, 0.1, xgrid));
  }
}

TEST_CASE("argument validation") {
  const auto data = testutil::make_dataset(10, 2, 4, 75, [](int, double) { return 0.0; });
  const SplineBasis basis(2, 0);
  const Eigen::VectorXd xgrid = fdbreak::uniform_grid(21);
  CHECK_THROWS_AS(fdbreak::locate_break(data, basis, LocatorNorm::l2, 0.0, xgrid),
                  fdbreak::ArgumentError);
  CHECK_THROWS_AS(fdbreak::locate_break(data, basis, LocatorNorm::l2, 0.6, xgrid),
                  fdbreak::ArgumentError);
  CHECK_THROWS_AS(fdbreak::cusum_field(data, basis, unit_sigma(basis.dim()), 0.5, xgrid),
                  fdbreak::ArgumentError);
}

TEST_SUITE_END();
