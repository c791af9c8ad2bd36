#ifndef FDBREAK_DATASET_HPP
#define FDBREAK_DATASET_HPP

#include <utility>
#include <vector>

#include "fdbreak/errors.hpp"

namespace fdbreak {

/// One observed trajectory: parallel arrays of locations in [0,1] and values.
struct Curve {
  std::vector<double> x;
  std::vector<double> y;

  int size() const { return static_cast<int>(x.size()); }
};

/// Half-open range of curve indices [begin, end), 0-based.
struct CurveRange {
  int begin = 0;
  int end = 0;

  int count() const { return end - begin; }
};

/// A time-ordered collection of noisy, irregularly sampled curves.
///
/// Curve order is immutable after construction: the cumulative-sum machinery
/// treats the index as time. n == 1 datasets are representable (a file with a
/// single curve must still ingest); operations that need more curves enforce
/// their own preconditions.
class FunctionalDataset {
public:
  explicit FunctionalDataset(std::vector<Curve> curves) : curves_(std::move(curves)) {
    if (curves_.empty()) throw ArgumentError("dataset must contain at least one curve");
    for (std::size_t i = 0; i < curves_.size(); ++i) {
      const Curve& c = curves_[i];
      if (c.x.empty()) throw ArgumentError("curve " + std::to_string(i + 1) + " has no observations");
      if (c.x.size() != c.y.size())
        throw ArgumentError("curve " + std::to_string(i + 1) + " has mismatched x/y lengths");
      for (double x : c.x)
        if (!(x >= 0.0 && x <= 1.0))
          throw DomainError("curve " + std::to_string(i + 1) + " has a location outside [0,1]");
    }
  }

  int n() const { return static_cast<int>(curves_.size()); }
  const Curve& curve(int i) const { return curves_[static_cast<std::size_t>(i)]; }

  int total_points() const {
    int total = 0;
    for (const Curve& c : curves_) total += c.size();
    return total;
  }

  /// Mean number of observations per curve.
  double mean_points_per_curve() const { return static_cast<double>(total_points()) / n(); }

  CurveRange full_range() const { return {0, n()}; }

  void check_range(CurveRange r) const {
    if (r.begin < 0 || r.end > n() || r.begin >= r.end)
      throw ArgumentError("invalid curve range [" + std::to_string(r.begin + 1) + ", " +
                          std::to_string(r.end) + "] for n=" + std::to_string(n()));
  }

private:
  std::vector<Curve> curves_;
};

}  // namespace fdbreak

#endif
