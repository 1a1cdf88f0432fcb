#pragma once

#include <cstddef>
#include <vector>

#include "cpn/errors.hpp"
#include "cpn/streams.hpp"

namespace cpn {

// A mark value in R^m. The common case is m = 1.
using Mark = std::vector<double>;

// Finite mark measure Q on R^m, given as mass * law. Built-in laws are
// product-uniform on [0,1]^m, product standard Gaussian, and a finite
// discrete set of scalar values with nonnegative weights (whose sum is the
// total mass). For the continuous laws the mass defaults to 1.
class QSampler {
 public:
  enum class Kind { uniform01, uniform_range, gaussian, discrete };

  static QSampler uniform01(int dim = 1, double mass = 1.0);
  // Scalar uniform on [lo, hi); the Lebesgue choice is mass = hi - lo.
  static QSampler uniform_range(double lo, double hi, double mass);
  static QSampler gaussian(int dim = 1, double mass = 1.0);
  static QSampler discrete(std::vector<double> values,
                           std::vector<double> weights);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double mass() const { return mass_; }
  bool is_discrete() const { return kind_ == Kind::discrete; }

  // Atoms and raw weights (summing to mass) of a discrete sampler; used for
  // exact integration against Q.
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }

  // Draws one mark from the normalized law Q / mass.
  Mark sample(RandomStream& stream) const;

 private:
  QSampler(Kind k, int dim, double mass) : kind_(k), dim_(dim), mass_(mass) {}

  Kind kind_;
  int dim_;
  double mass_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> values_;
  std::vector<double> weights_;
};

}  // namespace cpn
