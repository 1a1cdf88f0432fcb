#include "cpn/validators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpn/empirical.hpp"

namespace cpn {
namespace {

constexpr double kRatioTol = 1.0 + 1e-6;
constexpr double kBoxHalfWidth = 10.0;
constexpr std::size_t kMaxSupport = 16;

EmpiricalMeasure sample_measure(int d, RandomStream& rng) {
  const std::size_t n =
      1 + static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(kMaxSupport)));
  std::vector<double> atoms(n * static_cast<std::size_t>(d));
  for (auto& v : atoms) v = rng.uniform(-kBoxHalfWidth, kBoxHalfWidth);
  return EmpiricalMeasure(std::move(atoms), d);
}

std::vector<double> sample_state(int d, RandomStream& rng) {
  std::vector<double> x(static_cast<std::size_t>(d));
  for (auto& v : x) v = rng.uniform(-kBoxHalfWidth, kBoxHalfWidth);
  return x;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double ratio_of(double lhs, double rhs) {
  if (lhs <= 1e-15) return 0.0;
  if (rhs <= 1e-15) return std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

}  // namespace

ValidatorReport validate_lipschitz(const CoefficientSet& m,
                                   std::size_t samples,
                                   std::size_t mark_budget,
                                   RandomStream& rng) {
  if (samples < 1) throw InputError("validate_lipschitz: samples must be >= 1");
  const int d = m.dims.d, k = m.dims.k;
  const double K = m.constants.lipschitz_state;
  const double K0 = m.constants.lipschitz_measure;
  const double Kw = m.intensity.lipschitz_w2;

  ValidatorReport rep;
  rep.name = "lipschitz";
  rep.threshold = kRatioTol;
  rep.pass = true;
  double worst_coeff = 0.0, worst_int = 0.0;

  std::vector<double> b1(static_cast<std::size_t>(d)), b2(static_cast<std::size_t>(d));
  std::vector<double> s1(static_cast<std::size_t>(d * k)), s2(static_cast<std::size_t>(d * k));

  for (std::size_t it = 0; it < samples; ++it) {
    const double t = rng.uniform(0.0, 1.0);
    const auto nu1 = sample_measure(d, rng);
    const auto nu2 = sample_measure(d, rng);
    const auto x1 = sample_state(d, rng);
    const auto x2 = sample_state(d, rng);
    const double w2 = w2_population(nu1, nu2);
    double dxsq = 0.0;
    for (int c = 0; c < d; ++c) {
      const double dd = x1[static_cast<std::size_t>(c)] - x2[static_cast<std::size_t>(c)];
      dxsq += dd * dd;
    }

    m.drift(t, nu1, x1, b1);
    m.drift(t, nu2, x2, b2);
    m.diffusion(t, nu1, x1, s1);
    m.diffusion(t, nu2, x2, s2);
    double lhs = 0.0;
    for (std::size_t c = 0; c < b1.size(); ++c) {
      const double dd = b1[c] - b2[c];
      lhs += dd * dd;
    }
    for (std::size_t c = 0; c < s1.size(); ++c) {
      const double dd = s1[c] - s2[c];
      lhs += dd * dd;
    }
    JumpIntegrand dgamma;
    dgamma.d = d;
    dgamma.l = m.dims.l;
    dgamma.mark_independent = false;
    std::vector<double> g2(static_cast<std::size_t>(d));
    dgamma.column = [&](double tt, const Mark& r, int j, std::span<double> out) {
      m.jump(tt, nu1, r, j, x1, out);
      m.jump(tt, nu2, r, j, x2, g2);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] -= g2[c];
    };
    lhs += random_norm_sq(dgamma, m.intensity, m.mark_law, t, nu1, mark_budget,
                          &rng)
               .value;

    worst_coeff = std::max(worst_coeff, ratio_of(lhs, K0 * w2 * w2 + K * dxsq));

    // Intensity W2-Lipschitz claim at a sampled mark.
    for (int j = 0; j < m.dims.l; ++j) {
      const Mark r = m.intensity.mark_independent
                         ? Mark{}
                         : m.mark_law[static_cast<std::size_t>(j)].sample(rng);
      const double dl = std::abs(m.intensity.evaluate(t, nu1, r, j) -
                                 m.intensity.evaluate(t, nu2, r, j));
      worst_int = std::max(worst_int, ratio_of(dl, Kw * w2));
    }
  }

  rep.max_ratio = std::max(worst_coeff, worst_int);
  if (worst_coeff > kRatioTol) {
    rep.pass = false;
    rep.detail = "coefficient Lipschitz bound exceeded: ratio " +
                 std::to_string(worst_coeff) + " vs declared K=" +
                 std::to_string(K) + ", K0=" + std::to_string(K0);
  } else if (worst_int > kRatioTol) {
    rep.pass = false;
    rep.detail = "intensity W2-Lipschitz bound exceeded: ratio " +
                 std::to_string(worst_int) + " vs declared " + std::to_string(Kw);
  } else {
    rep.detail = "no violation over " + std::to_string(samples) + " sample pairs";
  }
  return rep;
}

ValidatorReport validate_growth(const CoefficientSet& m, std::size_t samples,
                                std::size_t mark_budget, RandomStream& rng) {
  if (samples < 1) throw InputError("validate_growth: samples must be >= 1");
  const int d = m.dims.d, k = m.dims.k;
  const double beta = m.constants.growth;

  ValidatorReport rep;
  rep.name = "growth";
  rep.threshold = kRatioTol;
  rep.pass = true;

  std::vector<double> b(static_cast<std::size_t>(d));
  std::vector<double> s(static_cast<std::size_t>(d * k));
  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);

  // Exact origin condition: the drift must vanish at (delta_0, 0).
  const EmpiricalMeasure delta0(origin, d);
  m.drift(0.0, delta0, origin, b);
  const double origin_drift = norm(b);
  if (origin_drift > 1e-12) {
    rep.pass = false;
    rep.max_ratio = std::numeric_limits<double>::infinity();
    rep.detail = "drift does not vanish at (delta_0, 0): |b| = " +
                 std::to_string(origin_drift);
    return rep;
  }

  JumpIntegrand gamma;
  gamma.d = d;
  gamma.l = m.dims.l;

  double worst = 0.0;
  for (std::size_t it = 0; it < samples; ++it) {
    const double t = rng.uniform(0.0, 1.0);
    EmpiricalMeasure nu = sample_measure(d, rng);
    std::vector<double> x = sample_state(d, rng);
    double scale = w2_to_dirac(nu, origin) + norm(x);
    while (scale < 1.0) {
      nu = sample_measure(d, rng);
      x = sample_state(d, rng);
      scale = w2_to_dirac(nu, origin) + norm(x);
    }

    m.drift(t, nu, x, b);
    m.diffusion(t, nu, x, s);
    gamma.mark_independent = false;
    gamma.column = [&](double tt, const Mark& r, int j, std::span<double> out) {
      m.jump(tt, nu, r, j, x, out);
    };
    const double jump_norm =
        std::sqrt(std::max(0.0, random_norm_sq(gamma, m.intensity, m.mark_law,
                                               t, nu, mark_budget, &rng)
                                    .value));
    const double lhs = norm(b) + norm(s) + jump_norm;
    worst = std::max(worst, ratio_of(lhs, beta * scale));
  }

  rep.max_ratio = worst;
  if (worst > kRatioTol) {
    rep.pass = false;
    rep.detail = "growth bound exceeded: ratio " + std::to_string(worst) +
                 " vs declared beta=" + std::to_string(beta);
  } else {
    rep.detail = "no violation over " + std::to_string(samples) +
                 " samples (region W2 + |x| >= 1)";
  }
  return rep;
}

ValidatorReport validate_fourth_moment(const CoefficientSet& m,
                                       std::size_t samples,
                                       std::size_t mark_budget,
                                       RandomStream& rng) {
  if (samples < 1 || mark_budget < 2)
    throw InputError("validate_fourth_moment: need samples >= 1, budget >= 2");
  const int d = m.dims.d;
  const double declared = m.constants.fourth_moment;

  ValidatorReport rep;
  rep.name = "fourth_moment";
  rep.declared = declared;

  // Freeze one mark panel per dimension so every (nu, x) sample integrates
  // against the same quadrature points.
  std::vector<std::vector<Mark>> panel(static_cast<std::size_t>(m.dims.l));
  for (int j = 0; j < m.dims.l; ++j) {
    const QSampler& qj = m.mark_law[static_cast<std::size_t>(j)];
    if (qj.is_discrete()) {
      for (double v : qj.values()) panel[static_cast<std::size_t>(j)].push_back(Mark{v});
    } else {
      for (std::size_t i = 0; i < mark_budget; ++i)
        panel[static_cast<std::size_t>(j)].push_back(qj.sample(rng));
    }
  }

  std::vector<double> col(static_cast<std::size_t>(d));
  double max_est = 0.0, se_at_max = 0.0;
  for (std::size_t it = 0; it < samples; ++it) {
    const double t = rng.uniform(0.0, 1.0);
    const auto nu = sample_measure(d, rng);
    const auto x = sample_state(d, rng);
    for (int j = 0; j < m.dims.l; ++j) {
      const QSampler& qj = m.mark_law[static_cast<std::size_t>(j)];
      const auto& marks = panel[static_cast<std::size_t>(j)];
      double est = 0.0, se = 0.0;
      if (qj.is_discrete()) {
        for (std::size_t i = 0; i < marks.size(); ++i) {
          m.jump(t, nu, marks[i], j, x, col);
          const double nsq = norm(col) * norm(col);
          est += qj.weights()[i] * nsq * nsq;
        }
      } else {
        double s1 = 0.0, s2 = 0.0;
        for (const auto& r : marks) {
          m.jump(t, nu, r, j, x, col);
          const double nsq = norm(col) * norm(col);
          const double v = nsq * nsq;
          s1 += v;
          s2 += v * v;
        }
        const double n = static_cast<double>(marks.size());
        const double mean = s1 / n;
        const double var = std::max(0.0, s2 / n - mean * mean);
        est = qj.mass() * mean;
        se = qj.mass() * std::sqrt(var / (n - 1.0));
      }
      if (est > max_est) {
        max_est = est;
        se_at_max = se;
      }
    }
  }

  rep.estimate = max_est;
  rep.se = se_at_max;
  rep.max_ratio = ratio_of(max_est, declared);
  rep.threshold = kRatioTol;
  rep.pass = max_est <= declared * kRatioTol + 3.0 * se_at_max;
  rep.detail = rep.pass
                   ? "max fourth moment " + std::to_string(max_est) +
                         " within declared " + std::to_string(declared)
                   : "jump fourth-moment bound exceeded: estimate " +
                         std::to_string(max_est) + " (se " +
                         std::to_string(se_at_max) + ") vs declared " +
                         std::to_string(declared);
  return rep;
}

}  // namespace cpn
