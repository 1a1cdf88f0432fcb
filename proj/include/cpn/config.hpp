#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cpn/model.hpp"
#include "cpn/regime.hpp"
#include "cpn/streams.hpp"

namespace cpn {

// Parsed and validated experiment description. The file format is INI-style:
// [section] headers, key = value lines, full-line comments starting with
// # or ;. Sections are model / sim / seeds / output; unknown sections and
// keys are rejected, and every violation is reported in one error rather
// than just the first. model.name is the only required key.
struct ExperimentConfig {
  // [model]  name = zero | systemic_risk | regime
  std::string model_name;
  SystemicRiskParams systemic;
  InitSpec init = InitSpec::gaussian({0.0}, {1.0});
  double q12 = 1.0;  // regime transition rates
  double q21 = 2.0;
  double state1 = 1.0;  // regime state values
  double state2 = 2.0;
  int initial_state = 1;     // 1-based in the file
  double mean_reversion = 1.0;  // regime drift pull toward the state value
  double regime_vol = 0.0;

  // [sim]
  double horizon = 1.0;
  double dt = 0.0;  // default horizon / 1000, applied after parsing
  std::size_t population = 16;
  std::vector<std::size_t> n_grid = {8, 16, 32, 64, 128};
  std::size_t n_ref = 2048;
  std::size_t replications = 64;
  std::size_t coupled = 8;
  std::size_t w2_times = 25;
  std::size_t threads = 1;
  Dims dims;  // zero model only; the built-ins are scalar

  // [seeds]
  SeedSpec seeds{1, 2, false};

  // [output]
  std::string out_dir = "out";
  bool trajectories = true;
  std::size_t max_particles = 16;
};

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::string& path);

// Model dispatch. build_model covers zero and systemic_risk;
// build_regime_model requires model_name == "regime". The regime drift is
// mean_reversion * (state_value - x), so mean_reversion = 0 gives a pure
// switching chain on top of a Brownian (or frozen, when regime_vol = 0)
// continuous part.
CoefficientSet build_model(const ExperimentConfig& cfg);
RegimeModel build_regime_model(const ExperimentConfig& cfg);

}  // namespace cpn
