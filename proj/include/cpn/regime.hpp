#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cpn/empirical.hpp"
#include "cpn/model.hpp"

namespace cpn {

// Acceptance interval for one ordered transition (from -> to) on the mark
// axis of the regime base field.
struct RegimeInterval {
  int from;
  int to;
  double lo;
  double hi;  // [lo, hi), empty when the rate is zero
};

// Lays the off-diagonal rates of a generator matrix out as consecutive
// left-closed right-open intervals starting at 0, in lexicographic (from,
// to) order with from != to. A base point with mark u triggers the
// transition whose interval contains u, provided its `from` matches the
// current regime.
std::vector<RegimeInterval> regime_intervals(std::span<const double> rates,
                                             int n_states);

// Measure-modulated finite-state generator. `generator` writes the full
// n x n rate matrix (row-major) for a given population measure; rows must
// sum to zero with nonnegative off-diagonals, and every row's total exit
// rate must stay below exit_bound — checked at every evaluation during a
// run, and a violation aborts.
struct RegimeSpec {
  std::vector<double> state_values;  // numeric label per regime state
  std::function<void(const EmpiricalMeasure& nu, std::span<double> out)>
      generator;
  double exit_bound = 0.0;  // H0

  int n_states() const { return static_cast<int>(state_values.size()); }
  // The mark axis must cover the full interval layout; per-row exit rates
  // are bounded by exit_bound, so n_states * exit_bound always suffices.
  double mark_span() const {
    return static_cast<double>(n_states()) * exit_bound;
  }
};

// Diffusion with a common switching regime: the continuous state follows
//   dX = b(nu, X, Y) dt + vol dW
// while Y jumps between regimes at measure-dependent rates, driven by the
// shared base field (so the regime path is common noise for all particles).
struct RegimeModel {
  RegimeSpec regime;
  int d = 1;  // state dimension (Brownian dimension matches)
  std::function<void(double t, const EmpiricalMeasure& nu,
                     std::span<const double> x, int regime_state,
                     std::span<double> out)>
      drift;
  double vol = 0.0;
  InitSpec init;
  int initial_state = 0;
};

RegimeModel build_regime_switching(
    RegimeSpec spec,
    std::function<void(double, const EmpiricalMeasure&, std::span<const double>,
                       int, std::span<double>)>
        drift,
    double vol, InitSpec init, int initial_state);

// Constant-rate two-state convenience used by experiments and tests.
RegimeSpec two_state_regime(double q12, double q21,
                            std::vector<double> state_values = {1.0, 2.0});

}  // namespace cpn
