#include "cpn/thinning.hpp"

#include <cmath>
#include <string>

namespace cpn {
namespace {

constexpr double kBoundSlack = 1e-12;

}  // namespace

double checked_intensity(const IntensityCandidate& lambda, double t,
                         const EmpiricalMeasure& nu, const Mark& r, int dim,
                         double field_bound) {
  const double v = lambda.evaluate(t, nu, r, dim);
  if (!std::isfinite(v) || v < 0.0)
    throw IntensityBoundViolation(
        "intensity evaluated to a non-finite or negative value at t=" +
            std::to_string(t),
        t);
  const double own_bound = lambda.bound[static_cast<std::size_t>(dim)];
  if (v > own_bound * (1.0 + kBoundSlack) + kBoundSlack)
    throw IntensityBoundViolation(
        "intensity " + std::to_string(v) + " exceeds its declared bound " +
            std::to_string(own_bound) + " at t=" + std::to_string(t),
        t);
  if (v > field_bound * (1.0 + kBoundSlack) + kBoundSlack)
    throw IntensityBoundViolation(
        "intensity " + std::to_string(v) + " exceeds the field height bound " +
            std::to_string(field_bound) + " at t=" + std::to_string(t),
        t);
  return v;
}

AcceptedJumps thin(const BasePointField& base, const IntensityCandidate& lambda,
                   const MeasurePath& env) {
  if (base.dims() != lambda.dims)
    throw InputError("thin: base field and intensity dimensions differ");
  for (int j = 0; j < base.dims(); ++j)
    if (lambda.bound[static_cast<std::size_t>(j)] >
        base.height_bound[static_cast<std::size_t>(j)] * (1.0 + kBoundSlack))
      throw InputError("thin: intensity bound exceeds field height bound in dimension " +
                       std::to_string(j));

  AcceptedJumps out;
  out.horizon = base.horizon;
  out.jumps.resize(static_cast<std::size_t>(base.dims()));
  for (int j = 0; j < base.dims(); ++j) {
    const auto& pts = base.points[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const BasePoint& p = pts[i];
      const double lam =
          checked_intensity(lambda, p.time, env.left_limit(p.time), p.mark, j,
                            base.height_bound[static_cast<std::size_t>(j)]);
      if (p.height <= lam)
        out.jumps[static_cast<std::size_t>(j)].push_back({p.time, p.mark, p.height, i});
    }
  }
  return out;
}

std::vector<double> integrate_marked(const JumpIntegrand& u,
                                     const AcceptedJumps& jumps, double up_to) {
  if (u.l != jumps.dims()) throw InputError("integrate_marked: dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(u.d), 0.0);
  std::vector<double> col(static_cast<std::size_t>(u.d));
  for (int j = 0; j < jumps.dims(); ++j) {
    for (const auto& jp : jumps.jumps[static_cast<std::size_t>(j)]) {
      if (jp.time > up_to) break;
      u.column(jp.time, jp.mark, j, col);
      for (std::size_t c = 0; c < col.size(); ++c) out[c] += col[c];
    }
  }
  return out;
}

std::vector<double> integrate_compensated(const JumpIntegrand& u,
                                          const AcceptedJumps& jumps,
                                          const IntensityCandidate& lambda,
                                          std::span<const QSampler> q,
                                          const MeasurePath& env,
                                          std::span<const double> grid,
                                          std::size_t budget,
                                          RandomStream* stream) {
  if (grid.size() < 2) throw InputError("integrate_compensated: grid needs >= 2 points");
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (!(grid[g] > grid[g - 1]))
      throw InputError("integrate_compensated: grid must be strictly increasing");

  std::vector<double> out = integrate_marked(u, jumps, grid.back());
  std::vector<double> comp(out.size(), 0.0);
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const double t = grid[g];
    const double dt = grid[g + 1] - t;
    std::vector<double> rate(out.size(), 0.0);
    kernel_column_integral(u, lambda, q, t, env.value_at(t), budget, stream,
                           rate);
    for (std::size_t c = 0; c < comp.size(); ++c) comp[c] += dt * rate[c];
  }
  for (std::size_t c = 0; c < out.size(); ++c) out[c] -= comp[c];
  return out;
}

}  // namespace cpn
