#pragma once

#include <stdexcept>
#include <string>

namespace cpn {

// Bad user input: malformed config files, out-of-range keys, inconsistent
// dimensions. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid arguments to library calls (non-increasing grids, empty measures,
// horizon mismatches). Also exit code 2 at the CLI boundary.
struct InputError : std::invalid_argument {
  explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// An intensity evaluated above its declared bound, or above the dominating
// field's height bound. Thinning must abort rather than clip: clipping would
// silently bias the accepted-point law.
struct IntensityBoundViolation : std::runtime_error {
  IntensityBoundViolation(const std::string& msg, double t)
      : std::runtime_error(msg), time(t) {}
  double time;
};

// A state became non-finite during integration. Maps to CLI exit code 3.
struct NumericalDivergence : std::runtime_error {
  NumericalDivergence(const std::string& msg, double t)
      : std::runtime_error(msg), time(t) {}
  double time;
};

}  // namespace cpn
