#pragma once

#include <span>
#include <vector>

#include "cpn/base_field.hpp"
#include "cpn/intensity.hpp"

namespace cpn {

struct AcceptedJump {
  double time;
  Mark mark;
  double height;
  std::size_t base_index;  // position within the base dimension's point list
};

// Result of thinning a base field against an intensity candidate: per
// dimension, the accepted points in time order.
struct AcceptedJumps {
  double horizon = 0.0;
  std::vector<std::vector<AcceptedJump>> jumps;  // per dimension

  int dims() const { return static_cast<int>(jumps.size()); }
  std::size_t count(int j) const { return jumps[static_cast<std::size_t>(j)].size(); }
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& d : jumps) n += d.size();
    return n;
  }
};

// Evaluates the intensity at one candidate and enforces its declared bound
// and the field's height bound. Aborts (never clips) on a violation: a
// clipped intensity would silently bias the thinned law.
double checked_intensity(const IntensityCandidate& lambda, double t,
                         const EmpiricalMeasure& nu, const Mark& r, int dim,
                         double field_bound);

// Keeps base point (t, r, s) iff s <= lambda_t(env(t-), r). The environment
// enters through its left limit, so decisions are predictable with respect
// to the recorded path.
AcceptedJumps thin(const BasePointField& base, const IntensityCandidate& lambda,
                   const MeasurePath& env);

// Marked integral sum_j sum_i u_j(tau_i, r_i) over accepted points with
// tau_i <= up_to.
std::vector<double> integrate_marked(const JumpIntegrand& u,
                                     const AcceptedJumps& jumps, double up_to);

// Compensated integral: the marked sum minus the left-endpoint quadrature of
// the compensator int u lambda Q dt over the supplied event-augmented grid.
// Exact compensator evaluation when the mark integrals are exact; Monte
// Carlo with `budget` draws otherwise.
std::vector<double> integrate_compensated(const JumpIntegrand& u,
                                          const AcceptedJumps& jumps,
                                          const IntensityCandidate& lambda,
                                          std::span<const QSampler> q,
                                          const MeasurePath& env,
                                          std::span<const double> grid,
                                          std::size_t budget = 1,
                                          RandomStream* stream = nullptr);

}  // namespace cpn
