#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpn/chaos.hpp"
#include "cpn/integrator.hpp"

namespace cpn {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Decimal with 17 significant digits: round-trip exact for binary64.
std::string format_g17(double v);

std::uint64_t fnv1a64(std::string_view bytes);

struct ManifestEntry {
  std::string name;
  std::uint64_t checksum = 0;
  std::size_t bytes = 0;
};

// Collects files for one run directory. Content is built in memory,
// checksummed, then written in a single stream, so the manifest always
// describes exactly what is on disk.
class OutputWriter {
 public:
  explicit OutputWriter(std::string dir);

  void write_text(const std::string& name, const std::string& content);
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<ManifestEntry> entries_;
};

// CSV renderers. Fixed column order, one header line, \n endings, doubles
// as %.17g.
std::string study_csv(const ConvergenceStudy& study);
std::string coupling_csv(const CouplingResult& result, std::size_t n,
                         std::size_t replications);
std::string trajectory_csv(std::span<const TrajectorySet> runs,
                           std::size_t max_particles);
std::string regime_csv(std::span<const RegimeTrajectory> runs);

}  // namespace cpn
