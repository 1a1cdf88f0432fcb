#pragma once

#include <cstddef>
#include <vector>

#include "cpn/marks.hpp"
#include "cpn/streams.hpp"

namespace cpn {

// One point of the dominating field: a time, a mark, and a height drawn
// uniformly below the dimension's height bound. Thinning later keeps the
// point iff the height falls below the evaluated intensity.
struct BasePoint {
  double time;
  Mark mark;
  double height;
};

// A realization of the dominating marked Poisson field on [0, horizon],
// one independent component per noise dimension. Point times in component j
// arrive at rate height_bound[j] * q_mass[j]; marks are i.i.d. from the
// normalized mark law; heights are i.i.d. uniform on [0, height_bound[j]]
// and independent of everything else.
struct BasePointField {
  double horizon = 0.0;
  std::vector<double> height_bound;          // per dimension
  std::vector<double> q_mass;                // Q_j(R) per dimension
  std::vector<std::vector<BasePoint>> points;  // per dimension, time-sorted

  int dims() const { return static_cast<int>(height_bound.size()); }

  // All candidate times across dimensions, merged in increasing time order.
  struct CandidateRef {
    double time;
    int dim;
    std::size_t index;  // into points[dim]
  };
  std::vector<CandidateRef> merged() const;
};

// Samples the field for one replication. Entirely a function of the common
// seed: replaying with a different idiosyncratic seed reproduces every point
// bit for bit.
BasePointField sample_base_field(const SeedSpec& seeds,
                                 std::uint32_t replication, double horizon,
                                 std::span<const double> height_bounds,
                                 std::span<const QSampler> mark_laws);

}  // namespace cpn
