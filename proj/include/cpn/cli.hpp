#pragma once

#include <cstdint>
#include <string>

#include "cpn/config.hpp"

namespace cpn {

// Parsed command line. Flags override the corresponding config values;
// zero/empty means "not given".
struct CliOptions {
  std::string command;  // simulate | couple | study | regime | validate
  std::string config_path;
  bool has_seed_common = false;
  std::uint64_t seed_common = 0;
  bool has_seed_idio = false;
  std::uint64_t seed_idio = 0;
  std::string out_dir;
  std::size_t threads = 0;
};

// Exit codes: 0 success, 1 validation failure (including intensity-bound
// violations), 2 input or configuration error, 3 numerical divergence.
int run_cli(const CliOptions& opts);

// The individual commands, exposed for tests. config_hash is the checksum
// of the raw config file bytes, echoed into the manifest.
int cmd_simulate(const ExperimentConfig& cfg, std::uint64_t config_hash);
int cmd_couple(const ExperimentConfig& cfg, std::uint64_t config_hash);
int cmd_study(const ExperimentConfig& cfg, std::uint64_t config_hash);
int cmd_regime(const ExperimentConfig& cfg, std::uint64_t config_hash);
int cmd_validate(const ExperimentConfig& cfg, std::uint64_t config_hash);

}  // namespace cpn
