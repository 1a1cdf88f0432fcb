#pragma once

#include <string>

#include "cpn/model.hpp"

namespace cpn {

// Outcome of one numerical falsification run. `pass` means no sampled point
// violated the declared bound; it is evidence, not a proof — the samplers
// cover a bounded box (support size <= 16, coordinates in [-10, 10]).
struct ValidatorReport {
  bool pass = false;
  std::string name;
  double max_ratio = 0.0;  // worst observed LHS / declared RHS
  double threshold = 0.0;
  std::string detail;      // names the violated bound when pass == false
  // Populated by the fourth-moment check.
  double estimate = 0.0;
  double se = 0.0;
  double declared = 0.0;
};

// Joint coefficient Lipschitz bound
//   |db|^2 + ||dsigma||_F^2 + int tr(dgamma diag(lambda Q) dgamma^T)
//     <= K0 W2(nu, nu')^2 + K |x - x'|^2
// plus the intensity's own W2-Lipschitz claim, over random sample pairs.
ValidatorReport validate_lipschitz(const CoefficientSet& m,
                                   std::size_t samples,
                                   std::size_t mark_budget,
                                   RandomStream& rng);

// Joint linear growth bound
//   |b| + ||sigma||_F + sqrt(int tr(gamma diag(lambda Q) gamma^T))
//     <= beta (W2(nu, delta_0) + |x|),
// sampled on the region W2(nu, delta_0) + |x| >= 1 (constant diffusion or
// jump coefficients make the strict bound unattainable in a vanishing
// neighborhood of the origin, so the floor is part of the check's contract),
// plus the exact origin condition b(delta_0, 0) = 0.
ValidatorReport validate_growth(const CoefficientSet& m, std::size_t samples,
                                std::size_t mark_budget, RandomStream& rng);

// Jump fourth-moment bound max_j int |gamma_j(r)|^4 Q_j(dr) <= gamma4, with
// the mark panel frozen once per dimension so the max over sampled (nu, x)
// reflects coefficient variation rather than resampling noise. Statistical
// pass: estimate <= gamma4 + 3 se.
ValidatorReport validate_fourth_moment(const CoefficientSet& m,
                                       std::size_t samples,
                                       std::size_t mark_budget,
                                       RandomStream& rng);

}  // namespace cpn
