#include "cpn/intensity.hpp"

#include <cmath>
#include <string>

namespace cpn {
namespace {

RandomStream fallback_stream() {
  return derive_stream(SeedSpec{}, {0, kAuxEntity, Purpose::marks});
}

void check_shapes(const IntensityCandidate& lambda,
                  std::span<const QSampler> q, std::size_t budget) {
  if (lambda.dims < 1 || lambda.bound.size() != static_cast<std::size_t>(lambda.dims))
    throw InputError("intensity: need one bound per dimension");
  if (q.size() != static_cast<std::size_t>(lambda.dims))
    throw InputError("intensity: need one mark law per dimension");
  if (budget < 1) throw InputError("intensity: budget must be >= 1");
}

// Monte Carlo mean and standard error of f against the normalized mark law,
// scaled back by the mass of Q.
template <typename F>
ScalarEstimate mc_against_q(const QSampler& q, std::size_t budget,
                            RandomStream& stream, F&& f) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < budget; ++i) {
    const Mark r = q.sample(stream);
    const double v = f(r);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(budget);
  const double mean = s / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  return {q.mass() * mean,
          q.mass() * std::sqrt(var / std::max(1.0, n - 1.0))};
}

}  // namespace

MassEstimate kernel_mass(const IntensityCandidate& lambda,
                         std::span<const QSampler> q, double t,
                         const EmpiricalMeasure& nu, std::size_t budget,
                         RandomStream* stream) {
  check_shapes(lambda, q, budget);
  RandomStream local = fallback_stream();
  RandomStream& rng = stream ? *stream : local;

  MassEstimate out;
  for (int j = 0; j < lambda.dims; ++j) {
    const QSampler& qj = q[static_cast<std::size_t>(j)];
    if (qj.is_discrete()) {
      double mass = 0.0;
      for (std::size_t i = 0; i < qj.values().size(); ++i)
        mass += qj.weights()[i] * lambda.evaluate(t, nu, Mark{qj.values()[i]}, j);
      out.value.push_back(mass);
      out.se.push_back(0.0);
    } else if (lambda.mark_independent) {
      out.value.push_back(qj.mass() * lambda.evaluate(t, nu, Mark{}, j));
      out.se.push_back(0.0);
    } else {
      const auto est = mc_against_q(qj, budget, rng, [&](const Mark& r) {
        return lambda.evaluate(t, nu, r, j);
      });
      out.value.push_back(est.value);
      out.se.push_back(est.se);
    }
  }
  return out;
}

IntensityKernelEval kernel_at(const IntensityCandidate& lambda,
                              std::span<const QSampler> q, double t,
                              const EmpiricalMeasure& nu, std::size_t budget,
                              RandomStream* stream) {
  IntensityKernelEval eval;
  eval.t = t;
  eval.mass = kernel_mass(lambda, q, t, nu, budget, stream).value;
  // Capture by value: the evaluator must stay valid after nu's frame ends.
  auto fn = lambda.evaluate;
  EmpiricalMeasure frozen = nu;
  eval.density = [fn, frozen, t](const Mark& r, int j) {
    return fn(t, frozen, r, j);
  };
  return eval;
}

ScalarEstimate random_norm_sq(const JumpIntegrand& u,
                              const IntensityCandidate& lambda,
                              std::span<const QSampler> q, double t,
                              const EmpiricalMeasure& nu, std::size_t budget,
                              RandomStream* stream) {
  check_shapes(lambda, q, budget);
  if (u.l != lambda.dims) throw InputError("random_norm_sq: integrand/intensity dims differ");
  RandomStream local = fallback_stream();
  RandomStream& rng = stream ? *stream : local;

  std::vector<double> col(static_cast<std::size_t>(u.d));
  auto col_norm_sq = [&](double tt, const Mark& r, int j) {
    u.column(tt, r, j, col);
    double s = 0.0;
    for (double v : col) s += v * v;
    return s;
  };

  ScalarEstimate total;
  double se_sq = 0.0;
  for (int j = 0; j < lambda.dims; ++j) {
    const QSampler& qj = q[static_cast<std::size_t>(j)];
    if (qj.is_discrete()) {
      for (std::size_t i = 0; i < qj.values().size(); ++i) {
        const Mark r{qj.values()[i]};
        total.value += qj.weights()[i] * lambda.evaluate(t, nu, r, j) *
                       col_norm_sq(t, r, j);
      }
    } else if (lambda.mark_independent && u.mark_independent) {
      total.value += qj.mass() * lambda.evaluate(t, nu, Mark{}, j) *
                     col_norm_sq(t, Mark{}, j);
    } else {
      const auto est = mc_against_q(qj, budget, rng, [&](const Mark& r) {
        return lambda.evaluate(t, nu, r, j) * col_norm_sq(t, r, j);
      });
      total.value += est.value;
      se_sq += est.se * est.se;
    }
  }
  total.se = std::sqrt(se_sq);
  return total;
}

void kernel_column_integral(const JumpIntegrand& u,
                            const IntensityCandidate& lambda,
                            std::span<const QSampler> q, double t,
                            const EmpiricalMeasure& nu, std::size_t budget,
                            RandomStream* stream, std::span<double> out) {
  check_shapes(lambda, q, budget);
  if (u.l != lambda.dims) throw InputError("kernel_column_integral: dims differ");
  if (out.size() != static_cast<std::size_t>(u.d))
    throw InputError("kernel_column_integral: output size mismatch");
  RandomStream local = fallback_stream();
  RandomStream& rng = stream ? *stream : local;

  std::vector<double> col(static_cast<std::size_t>(u.d));
  for (int j = 0; j < lambda.dims; ++j) {
    const QSampler& qj = q[static_cast<std::size_t>(j)];
    if (qj.is_discrete()) {
      for (std::size_t i = 0; i < qj.values().size(); ++i) {
        const Mark r{qj.values()[i]};
        const double w = qj.weights()[i] * lambda.evaluate(t, nu, r, j);
        u.column(t, r, j, col);
        for (std::size_t c = 0; c < col.size(); ++c) out[c] += w * col[c];
      }
    } else if (lambda.mark_independent && u.mark_independent) {
      const double w = qj.mass() * lambda.evaluate(t, nu, Mark{}, j);
      u.column(t, Mark{}, j, col);
      for (std::size_t c = 0; c < col.size(); ++c) out[c] += w * col[c];
    } else {
      std::vector<double> acc(col.size(), 0.0);
      for (std::size_t i = 0; i < budget; ++i) {
        const Mark r = qj.sample(rng);
        const double w = lambda.evaluate(t, nu, r, j);
        u.column(t, r, j, col);
        for (std::size_t c = 0; c < col.size(); ++c) acc[c] += w * col[c];
      }
      const double scale = qj.mass() / static_cast<double>(budget);
      for (std::size_t c = 0; c < col.size(); ++c) out[c] += scale * acc[c];
    }
  }
}

}  // namespace cpn
