#include "cpn/marks.hpp"

#include <cmath>
#include <string>

namespace cpn {

QSampler QSampler::uniform01(int dim, double mass) {
  if (dim < 1) throw InputError("QSampler: dim must be >= 1");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw InputError("QSampler: mass must be positive and finite");
  return QSampler(Kind::uniform01, dim, mass);
}

QSampler QSampler::uniform_range(double lo, double hi, double mass) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InputError("QSampler: uniform_range needs finite lo < hi");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw InputError("QSampler: mass must be positive and finite");
  QSampler q(Kind::uniform_range, 1, mass);
  q.lo_ = lo;
  q.hi_ = hi;
  return q;
}

QSampler QSampler::gaussian(int dim, double mass) {
  if (dim < 1) throw InputError("QSampler: dim must be >= 1");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw InputError("QSampler: mass must be positive and finite");
  return QSampler(Kind::gaussian, dim, mass);
}

QSampler QSampler::discrete(std::vector<double> values,
                            std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw InputError("QSampler: discrete needs matching nonempty values/weights");
  double mass = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InputError("QSampler: discrete weights must be nonnegative");
    mass += w;
  }
  if (!(mass > 0.0)) throw InputError("QSampler: discrete total weight must be positive");
  QSampler q(Kind::discrete, 1, mass);
  q.values_ = std::move(values);
  q.weights_ = std::move(weights);
  return q;
}

Mark QSampler::sample(RandomStream& stream) const {
  switch (kind_) {
    case Kind::uniform01: {
      Mark m(static_cast<std::size_t>(dim_));
      for (auto& v : m) v = stream.uniform(0.0, 1.0);
      return m;
    }
    case Kind::uniform_range:
      return Mark{stream.uniform(lo_, hi_)};
    case Kind::gaussian: {
      Mark m(static_cast<std::size_t>(dim_));
      for (auto& v : m) v = stream.normal();
      return m;
    }
    case Kind::discrete: {
      double u = stream.uniform(0.0, 1.0) * mass_;
      std::size_t idx = weights_.size() - 1;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (u < weights_[i]) {
          idx = i;
          break;
        }
        u -= weights_[i];
      }
      return Mark{values_[idx]};
    }
  }
  throw InputError("QSampler: corrupt kind");
}

}  // namespace cpn
