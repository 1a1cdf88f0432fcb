#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpn/errors.hpp"
#include "cpn/streams.hpp"

namespace cpn {

// Uniform empirical measure on a finite list of atoms in R^d. Mean and
// second moment are cached at construction; they are what measure-dependent
// coefficients typically read, and caching keeps a population sweep O(n)
// instead of O(n^2).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<double> atoms, int dim);

  std::size_t size() const { return atoms_.size() / static_cast<std::size_t>(dim_); }
  int dim() const { return dim_; }

  std::span<const double> atom(std::size_t i) const {
    return {atoms_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> atoms_flat() const { return atoms_; }

  std::span<const double> mean() const { return mean_; }
  // E |x|^2 over atoms.
  double second_moment() const { return second_moment_; }
  // Total variance E|x|^2 - |mean|^2 (clamped at 0 against cancellation).
  double variance() const;

 private:
  std::vector<double> atoms_;
  int dim_;
  std::vector<double> mean_;
  double second_moment_;
};

// Piecewise-constant cadlag path of empirical measures: segment i holds on
// [breakpoints[i], breakpoints[i+1]). Left limits at breakpoints return the
// previous segment, which is what predictable (left-endpoint) evaluation of
// coefficients and intensities consumes.
class MeasurePath {
 public:
  // Empty path; any lookup throws. Exists so path-holding results can be
  // built in stages.
  MeasurePath() = default;
  MeasurePath(std::vector<double> breakpoints,
              std::vector<EmpiricalMeasure> segments);

  static MeasurePath constant(EmpiricalMeasure m);

  const EmpiricalMeasure& value_at(double t) const;
  const EmpiricalMeasure& left_limit(double t) const;

  std::span<const double> breakpoints() const { return breakpoints_; }
  const EmpiricalMeasure& segment(std::size_t i) const { return segments_[i]; }
  std::size_t segment_count() const { return segments_.size(); }

 private:
  std::vector<double> breakpoints_;
  std::vector<EmpiricalMeasure> segments_;
};

// --- Wasserstein-2 distances between uniform atom lists ---

// W2 to a point mass: sqrt(mean |x_i - target|^2).
double w2_to_dirac(const EmpiricalMeasure& m, std::span<const double> target);

// Exact 1-D W2 between equal-size lists (sort both, RMS of differences).
double w2_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Exact quantile-coupling W2 between sorted 1-D atom arrays of any sizes;
// equals the equal-size formula after replicating both lists to the least
// common multiple, computed in O(n + m).
double w2_1d_sorted(std::span<const double> a_sorted,
                    std::span<const double> b_sorted);

inline constexpr std::size_t kAssignmentCap = 512;

// Exact W2 in any dimension via an optimal assignment (O(n^3) shortest
// augmenting paths). Sizes must match and stay within `cap`; above the cap
// callers should fall back to w2_sliced.
double w2_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                std::size_t cap = kAssignmentCap);

// Sliced-W2 diagnostic: RMS over random 1-D projections of the exact
// projected distances. Never used inside convergence metrics.
double w2_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                 int projections, RandomStream& stream);

// Upper bound from a paired coupling sample: sqrt(mean |x_i - y_i|^2).
// Dominates w2_exact of the marginals.
double product_coupling_bound(const EmpiricalMeasure& a,
                              const EmpiricalMeasure& b);

// W2 between populations of possibly different sizes. Sizes n <= m are
// handled by replicating both lists to lcm(n, m) when n * m <= cap^2 (for
// d = 1 via the O(n + m) quantile merge, which is the same number), and
// otherwise by a seeded subsample of the larger list down to the smaller.
double w2_population(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                     std::size_t cap = kAssignmentCap,
                     RandomStream* subsample_stream = nullptr);

// Exact minimum-cost assignment on an n x n row-major cost matrix; returns
// the column assigned to each row. Exposed for testing against brute force.
std::vector<int> min_cost_assignment(std::span<const double> cost,
                                     std::size_t n);

}  // namespace cpn
