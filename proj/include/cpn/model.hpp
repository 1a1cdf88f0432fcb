#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cpn/intensity.hpp"
#include "cpn/marks.hpp"

namespace cpn {

// State dimension d, Brownian dimension k, jump-noise dimension l.
struct Dims {
  int d = 1;
  int k = 1;
  int l = 1;
};

// Declared regularity constants. The validators check the model against
// these; they are claims, not guarantees.
struct RegularityConstants {
  double lipschitz_state = 0.0;    // K:  coefficient Lipschitz bound in x
  double lipschitz_measure = 0.0;  // K0: coefficient Lipschitz bound in W2
  double growth = 0.0;             // beta: joint linear growth bound
  double fourth_moment = 0.0;      // gamma4: jump fourth-moment bound
};

// Initial-condition law, drawn i.i.d. per particle.
struct InitSpec {
  enum class Kind { point, gaussian, uniform };
  Kind kind = Kind::point;
  std::vector<double> a;  // point: location; gaussian: mean; uniform: lower
  std::vector<double> b;  // gaussian: sd;  uniform: upper

  static InitSpec point(std::vector<double> loc);
  static InitSpec gaussian(std::vector<double> mean, std::vector<double> sd);
  static InitSpec uniform(std::vector<double> lo, std::vector<double> hi);

  int dim() const { return static_cast<int>(a.size()); }
  void sample(RandomStream& stream, std::span<double> out) const;
};

// The model tuple (b, sigma, gamma, lambda, Q) plus its declared constants
// and initial law. All maps take the population's empirical measure by
// value-at-left-endpoint and must be pure: they are evaluated concurrently.
//
// jump_compensator must equal sum_j int gamma_j(t, nu, r, x) lambda_j(t, nu,
// r) Q_j(dr); builders supply it in closed form so the integrator never
// re-estimates it inside the hot loop.
struct CoefficientSet {
  Dims dims;
  std::function<void(double t, const EmpiricalMeasure& nu,
                     std::span<const double> x, std::span<double> out)>
      drift;  // out: d
  std::function<void(double t, const EmpiricalMeasure& nu,
                     std::span<const double> x, std::span<double> out)>
      diffusion;  // out: d*k row-major
  std::function<void(double t, const EmpiricalMeasure& nu, const Mark& r,
                     int j, std::span<const double> x, std::span<double> out)>
      jump;  // column j of gamma, out: d
  std::function<void(double t, const EmpiricalMeasure& nu,
                     std::span<const double> x, std::span<double> out)>
      jump_compensator;  // out: d
  IntensityCandidate intensity;
  std::vector<QSampler> mark_law;
  RegularityConstants constants;
  InitSpec init;
};

// Mean-reverting interaction with common Gaussian-mark jumps:
//   b(nu, x)      = mean_reversion * (mean(nu) - x)
//   sigma         = vol (constant)
//   gamma(r)      = jump_scale * r,  r ~ N(0, 1)
//   lambda(nu)    = min(lambda0 + lambda1 * Var(nu), lambda_bar)
// Scalar in every dimension (d = k = l = 1).
struct SystemicRiskParams {
  double mean_reversion = 1.0;
  double vol = 0.2;
  double jump_scale = 0.3;
  double lambda0 = 1.0;
  double lambda1 = 0.5;
  double lambda_bar = 4.0;
};

CoefficientSet build_systemic_risk(const SystemicRiskParams& p,
                                   InitSpec init = InitSpec::gaussian({0.0}, {1.0}));

// Everything-zero model: b = sigma = gamma = 0, lambda = 0, started at the
// origin. Useful as an exactness fixture.
CoefficientSet build_zero(Dims dims = {});

}  // namespace cpn
