#include "cpn/base_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cpn {

std::vector<BasePointField::CandidateRef> BasePointField::merged() const {
  std::vector<CandidateRef> all;
  for (int j = 0; j < dims(); ++j)
    for (std::size_t i = 0; i < points[j].size(); ++i)
      all.push_back({points[j][i].time, j, i});
  std::stable_sort(all.begin(), all.end(),
                   [](const CandidateRef& a, const CandidateRef& b) {
                     return a.time < b.time;
                   });
  return all;
}

BasePointField sample_base_field(const SeedSpec& seeds,
                                 std::uint32_t replication, double horizon,
                                 std::span<const double> height_bounds,
                                 std::span<const QSampler> mark_laws) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InputError("sample_base_field: horizon must be positive and finite");
  if (height_bounds.empty() || height_bounds.size() != mark_laws.size())
    throw InputError("sample_base_field: need one height bound per mark law");

  BasePointField field;
  field.horizon = horizon;
  field.height_bound.assign(height_bounds.begin(), height_bounds.end());
  field.points.resize(height_bounds.size());
  for (std::size_t j = 0; j < height_bounds.size(); ++j) {
    const double bound = height_bounds[j];
    if (!(bound >= 0.0) || !std::isfinite(bound))
      throw InputError("sample_base_field: height bound must be >= 0 and finite");
    field.q_mass.push_back(mark_laws[j].mass());

    const double rate = bound * mark_laws[j].mass();
    if (rate == 0.0) continue;  // empty component

    auto stream = derive_stream(
        seeds, {replication, static_cast<std::uint32_t>(j), Purpose::base_points});
    double t = stream.exponential(rate);
    while (t <= horizon) {
      Mark mark = mark_laws[j].sample(stream);
      const double height = stream.uniform(0.0, bound);
      field.points[j].push_back({t, std::move(mark), height});
      t += stream.exponential(rate);
    }
  }
  return field;
}

}  // namespace cpn
