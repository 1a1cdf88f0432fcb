#include "cpn/regime.hpp"

#include <cmath>
#include <string>

namespace cpn {

std::vector<RegimeInterval> regime_intervals(std::span<const double> rates,
                                             int n_states) {
  if (n_states < 1) throw InputError("regime_intervals: need >= 1 state");
  const std::size_t n = static_cast<std::size_t>(n_states);
  if (rates.size() != n * n)
    throw InputError("regime_intervals: rate matrix must be n x n");

  std::vector<RegimeInterval> out;
  out.reserve(n * (n - 1));
  double cursor = 0.0;
  for (int i = 0; i < n_states; ++i) {
    for (int j = 0; j < n_states; ++j) {
      if (i == j) continue;
      const double q = rates[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
      if (!(q >= 0.0) || !std::isfinite(q))
        throw InputError("regime_intervals: off-diagonal rates must be finite and >= 0");
      out.push_back({i, j, cursor, cursor + q});
      cursor += q;
    }
  }
  return out;
}

RegimeModel build_regime_switching(
    RegimeSpec spec,
    std::function<void(double, const EmpiricalMeasure&, std::span<const double>,
                       int, std::span<double>)>
        drift,
    double vol, InitSpec init, int initial_state) {
  if (spec.n_states() < 2)
    throw InputError("regime model: need at least two regime states");
  if (!spec.generator) throw InputError("regime model: generator is required");
  if (!(spec.exit_bound > 0.0) || !std::isfinite(spec.exit_bound))
    throw InputError("regime model: exit_bound must be positive and finite");
  if (vol < 0.0) throw InputError("regime model: vol must be >= 0");
  if (initial_state < 0 || initial_state >= spec.n_states())
    throw InputError("regime model: initial state out of range");
  RegimeModel m;
  m.regime = std::move(spec);
  m.d = init.dim();
  m.drift = std::move(drift);
  m.vol = vol;
  m.init = std::move(init);
  m.initial_state = initial_state;
  return m;
}

RegimeSpec two_state_regime(double q12, double q21,
                            std::vector<double> state_values) {
  if (!(q12 >= 0.0) || !(q21 >= 0.0))
    throw InputError("two_state_regime: rates must be >= 0");
  if (state_values.size() != 2)
    throw InputError("two_state_regime: need exactly two state values");
  RegimeSpec spec;
  spec.state_values = std::move(state_values);
  spec.generator = [q12, q21](const EmpiricalMeasure&, std::span<double> out) {
    out[0] = -q12;
    out[1] = q12;
    out[2] = q21;
    out[3] = -q21;
  };
  spec.exit_bound = std::max({q12, q21, 1e-12});
  return spec;
}

}  // namespace cpn
