#include "fdbreak/cusum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdbreak/design.hpp"
#include "fdbreak/errors.hpp"
#include "fdbreak/quadrature.hpp"

namespace fdbreak {

namespace {

struct KRange {
  int lo = 0;
  int hi = 0;
};

KRange lattice_range(int n, double epsilon, bool diagnostics_allowed) {
  if (epsilon < 0.0 || epsilon >= 0.5)
    throw ArgumentError("epsilon must lie in (0, 1/2)");
  if (epsilon == 0.0 && !diagnostics_allowed)
    throw ArgumentError("epsilon must be strictly positive");
  KRange r;
  r.lo = (epsilon == 0.0) ? 0 : std::max(1, static_cast<int>(std::ceil(epsilon * n)));
  r.hi = static_cast<int>(std::floor((1.0 - epsilon) * n));
  if (r.lo > r.hi)
    throw ArgumentError("empty time lattice: n=" + std::to_string(n) +
                        ", epsilon=" + std::to_string(epsilon));
  return r;
}

// Evaluation matrix: rows are B^T(x) over the given points.
Eigen::MatrixXd basis_rows(const SplineBasis& basis, const Eigen::VectorXd& xs) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(xs.size(), basis.dim());
  double vals[SplineBasis::kMaxOrder];
  int first = 0;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    basis.eval_nonzero(xs[i], vals, first);
    for (int r = 0; r < basis.order(); ++r) e(i, first + r) = vals[r];
  }
  return e;
}

}  // namespace

CusumField cusum_field(const FunctionalDataset& data, const SplineBasis& basis,
                       const SigmaEstimate& sigma, double epsilon, const Eigen::VectorXd& xgrid) {
  const int n = data.n();
  if (n < 2) throw ArgumentError("cusum field needs n >= 2 curves");
  const KRange kr = lattice_range(n, epsilon, /*diagnostics_allowed=*/true);

  CusumField field;
  field.n = n;
  field.xgrid = xgrid;
  const std::vector<double> interior = basis.interior_positions();
  field.knot_x = Eigen::Map<const Eigen::VectorXd>(interior.data(),
                                                   static_cast<Eigen::Index>(interior.size()));

  RescaleFn rescale(sigma, basis, xgrid);
  field.rescale = rescale.grid_values();
  field.rescale_knots.resize(field.knot_x.size());
  for (Eigen::Index i = 0; i < field.knot_x.size(); ++i)
    field.rescale_knots[i] = rescale(field.knot_x[i]);

  const Eigen::MatrixXd egrid = basis_rows(basis, xgrid);
  const Eigen::MatrixXd eknots = basis_rows(basis, field.knot_x);

  const int rows = kr.hi - kr.lo + 1;
  field.k_values.resize(static_cast<std::size_t>(rows));
  field.tgrid.resize(rows);
  field.numerator.setZero(rows, xgrid.size());
  field.numerator_knots.setZero(rows, field.knot_x.size());

  // One pass: absorb curves one at a time; solve the partial normal equations
  // at each lattice point. theta_k for k = n is reused as the global fit, so
  // the k = n row vanishes exactly.
  DesignAccumulator acc(basis, data);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(rows));

  int row = 0;
  for (int k = kr.lo; k <= kr.hi; ++k, ++row) {
    field.k_values[static_cast<std::size_t>(row)] = k;
    field.tgrid[row] = static_cast<double>(k) / n;
    if (k == 0) {
      partial[static_cast<std::size_t>(row)] = Eigen::VectorXd::Zero(basis.dim());
      continue;
    }
    while (acc.absorbed() < k) acc.absorb_next();
    const Eigen::MatrixXd v_k = acc.gram_sum() / k;
    const Eigen::VectorXd m_k = acc.moment_sum() / k;
    GramSolver solver(v_k, basis.order() - 1,
                      "partial design at t=" + std::to_string(field.tgrid[row]));
    partial[static_cast<std::size_t>(row)] = solver.solve(m_k);
  }

  while (acc.absorbed() < n) acc.absorb_next();
  Eigen::VectorXd theta_global;
  if (kr.hi == n && !partial.empty()) {
    theta_global = partial.back();
  } else {
    GramSolver solver(acc.gram_sum() / n, basis.order() - 1, "global design");
    const Eigen::VectorXd global_moment = acc.moment_sum() / n;
    theta_global = solver.solve(global_moment);
  }

  row = 0;
  for (int k = kr.lo; k <= kr.hi; ++k, ++row) {
    if (k == 0) continue;
    const Eigen::VectorXd c =
        (k / sqrt_n) * (partial[static_cast<std::size_t>(row)] - theta_global);
    field.numerator.row(row) = (egrid * c).transpose();
    if (field.knot_x.size() > 0) field.numerator_knots.row(row) = (eknots * c).transpose();
  }
  return field;
}

double stat_sup(const CusumField& field) {
  double best = 0.0;
  const Eigen::ArrayXd inv_sqrt = field.rescale.array().sqrt().inverse();
  for (Eigen::Index r = 0; r < field.numerator.rows(); ++r) {
    const double m = (field.numerator.row(r).transpose().array().abs() * inv_sqrt).maxCoeff();
    best = std::max(best, m);
  }
  if (field.knot_x.size() > 0) {
    const Eigen::ArrayXd inv_sqrt_k = field.rescale_knots.array().sqrt().inverse();
    for (Eigen::Index r = 0; r < field.numerator_knots.rows(); ++r) {
      const double m =
          (field.numerator_knots.row(r).transpose().array().abs() * inv_sqrt_k).maxCoeff();
      best = std::max(best, m);
    }
  }
  return best;
}

double stat_l2(const CusumField& field) {
  const Eigen::VectorXd w = simpson_weights(static_cast<int>(field.xgrid.size()));
  const Eigen::ArrayXd inv = field.rescale.array().inverse();
  double best = 0.0;
  for (Eigen::Index r = 0; r < field.numerator.rows(); ++r) {
    const Eigen::ArrayXd integrand = field.numerator.row(r).transpose().array().square() * inv;
    best = std::max(best, w.dot(integrand.matrix()));
  }
  return best;
}

namespace {

struct LocatorScan {
  int k_l2 = 0;
  int k_sup = 0;
};

LocatorScan locator_scan(const FunctionalDataset& data, const SplineBasis& basis, double epsilon,
                         const Eigen::VectorXd& xgrid) {
  const int n = data.n();
  if (n < 2) throw ArgumentError("locator needs n >= 2 curves");
  const KRange kr = lattice_range(n, epsilon, /*diagnostics_allowed=*/false);

  const Eigen::MatrixXd v = gram_weighted(basis, data, data.full_range());
  GramSolver solver(v, basis.order() - 1, "global Gram in locator");

  const Eigen::MatrixXd egrid = basis_rows(basis, xgrid);
  const std::vector<double> interior = basis.interior_positions();
  const Eigen::VectorXd knot_x = Eigen::Map<const Eigen::VectorXd>(
      interior.data(), static_cast<Eigen::Index>(interior.size()));
  const Eigen::MatrixXd eknots = basis_rows(basis, knot_x);
  const Eigen::VectorXd w = simpson_weights(static_cast<int>(xgrid.size()));

  DesignAccumulator acc(basis, data);
  for (int i = 0; i < n; ++i) acc.absorb_next();
  const Eigen::VectorXd total_moment = acc.moment_sum();

  DesignAccumulator prefix(basis, data);
  LocatorScan best;
  double best_l2 = -1.0;
  double best_sup = -1.0;
  for (int k = kr.lo; k <= kr.hi; ++k) {
    while (prefix.absorbed() < k) prefix.absorb_next();
    const Eigen::VectorXd contrast =
        prefix.moment_sum() - (static_cast<double>(k) / n) * total_moment;
    const Eigen::VectorXd d = solver.solve(contrast);
    const Eigen::VectorXd g = egrid * d;
    const double obj_l2 = w.dot(g.array().square().matrix());
    double obj_sup = g.array().abs().maxCoeff();
    if (knot_x.size() > 0)
      obj_sup = std::max(obj_sup, (eknots * d).array().abs().maxCoeff());
    if (obj_l2 > best_l2) {
      best_l2 = obj_l2;
      best.k_l2 = k;
    }
    if (obj_sup > best_sup) {
      best_sup = obj_sup;
      best.k_sup = k;
    }
  }
  return best;
}

}  // namespace

int locate_break(const FunctionalDataset& data, const SplineBasis& basis, LocatorNorm norm,
                 double epsilon, const Eigen::VectorXd& xgrid) {
  const LocatorScan scan = locator_scan(data, basis, epsilon, xgrid);
  return norm == LocatorNorm::l2 ? scan.k_l2 : scan.k_sup;
}

LocatorPair locate_break_both(const FunctionalDataset& data, const SplineBasis& basis,
                              double epsilon, const Eigen::VectorXd& xgrid) {
  const LocatorScan scan = locator_scan(data, basis, epsilon, xgrid);
  return {scan.k_l2, scan.k_sup};
}

}  // namespace fdbreak
