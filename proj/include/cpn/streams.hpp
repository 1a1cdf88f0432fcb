#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpn/errors.hpp"

namespace cpn {

// Two independent seed lanes. Everything "common" (the dominating Poisson
// field and its marks) is a function of `common` only; Brownian increments
// and, by default, initial conditions are functions of `idiosyncratic` only.
// Keeping the lanes separate lets an experiment redraw one noise source while
// holding the other fixed.
struct SeedSpec {
  std::uint64_t common = 0;
  std::uint64_t idiosyncratic = 0;
  bool init_on_common = false;  // draw initial conditions on the common lane
};

enum class Purpose : std::uint8_t {
  brownian = 1,
  base_points = 2,
  marks = 3,
  init = 4,
  aux = 5,
};

// Identifies one logical random stream. Streams are derived, not split
// sequentially, so any (replication, entity, purpose) triple can be opened
// in any order, on any thread, and always yields the same draw sequence.
struct StreamKey {
  std::uint32_t replication = 0;
  std::uint32_t entity = 0;
  Purpose purpose = Purpose::aux;
};

// Entity ids for populations start at 0; reference populations live in a
// reserved upper range so they can never collide with the finite system.
inline constexpr std::uint32_t kRefEntityBase = 0x80000000u;
inline constexpr std::uint32_t kAuxEntity = 0xFFFFFFFFu;

// Replications are packed into 24 bits of the counter block.
inline constexpr std::uint32_t kMaxReplication = (1u << 24) - 1;

// Counter-based generator (Philox4x32-10). The key is the 64-bit seed; the
// 128-bit counter carries (draw index, entity, replication|purpose), so the
// mapping key -> sequence is collision-free over the configured ranges.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, const StreamKey& key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on (0,1]; never returns 0 so log() is always safe.
  double uniform01();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller on two fresh uniforms (no caching, so the
  // draw count per call is fixed and schedule-independent).
  double normal();
  // Exponential with the given rate.
  double exponential(double rate);

  const StreamKey& key() const { return key_; }

 private:
  void refill();

  std::uint32_t key_lo_, key_hi_;
  std::uint32_t entity_word_, tag_word_;
  std::uint64_t block_ = 0;
  std::uint32_t buf_[4];
  int buf_pos_ = 4;
  StreamKey key_;
};

// Opens the stream for `key`, choosing the seed lane from the purpose.
// Throws ConfigError if the key is outside the supported ranges.
RandomStream derive_stream(const SeedSpec& spec, const StreamKey& key);

// Raw Philox4x32-10 block function. Exposed so the published known-answer
// vectors can pin the exact generator the streams are built on.
void philox4x32_10(const std::uint32_t counter[4], const std::uint32_t key[2],
                   std::uint32_t out[4]);

// Gaussian increments over a strictly increasing time grid: for each of the
// grid.size()-1 intervals, k independent N(0, dt) draws (row-major).
std::vector<double> brownian_increments(RandomStream& stream,
                                        std::span<const double> grid, int k);

}  // namespace cpn
