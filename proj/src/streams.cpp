#include "cpn/streams.hpp"

#include <cmath>
#include <numbers>

namespace cpn {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t n0 = hi1 ^ c[1] ^ k0;
  const std::uint32_t n1 = lo1;
  const std::uint32_t n2 = hi0 ^ c[3] ^ k1;
  const std::uint32_t n3 = lo0;
  c[0] = n0;
  c[1] = n1;
  c[2] = n2;
  c[3] = n3;
}

inline void philox10(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    philox_round(c, k0, k1);
  }
}

}  // namespace

void philox4x32_10(const std::uint32_t counter[4], const std::uint32_t key[2],
                   std::uint32_t out[4]) {
  out[0] = counter[0];
  out[1] = counter[1];
  out[2] = counter[2];
  out[3] = counter[3];
  philox10(out, key[0], key[1]);
}

RandomStream::RandomStream(std::uint64_t seed, const StreamKey& key)
    : key_lo_(static_cast<std::uint32_t>(seed)),
      key_hi_(static_cast<std::uint32_t>(seed >> 32)),
      entity_word_(key.entity),
      tag_word_(key.replication |
                (static_cast<std::uint32_t>(key.purpose) << 24)),
      key_(key) {}

void RandomStream::refill() {
  buf_[0] = static_cast<std::uint32_t>(block_);
  buf_[1] = static_cast<std::uint32_t>(block_ >> 32);
  buf_[2] = entity_word_;
  buf_[3] = tag_word_;
  philox10(buf_, key_lo_, key_hi_);
  ++block_;
  buf_pos_ = 0;
}

std::uint32_t RandomStream::next_u32() {
  if (buf_pos_ == 4) refill();
  return buf_[buf_pos_++];
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return lo | (hi << 32);
}

double RandomStream::uniform01() {
  // 53 random bits, shifted into (0, 1].
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
}

double RandomStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::exponential(double rate) {
  return -std::log(uniform01()) / rate;
}

RandomStream derive_stream(const SeedSpec& spec, const StreamKey& key) {
  if (key.replication > kMaxReplication)
    throw ConfigError("stream key replication " +
                      std::to_string(key.replication) + " exceeds " +
                      std::to_string(kMaxReplication));
  std::uint64_t seed = 0;
  switch (key.purpose) {
    case Purpose::base_points:
    case Purpose::marks:
    case Purpose::aux:
      seed = spec.common;
      break;
    case Purpose::brownian:
      seed = spec.idiosyncratic;
      break;
    case Purpose::init:
      seed = spec.init_on_common ? spec.common : spec.idiosyncratic;
      break;
    default:
      throw ConfigError("stream key has unknown purpose tag");
  }
  return RandomStream(seed, key);
}

std::vector<double> brownian_increments(RandomStream& stream,
                                        std::span<const double> grid, int k) {
  if (grid.size() < 2) throw InputError("brownian_increments: grid needs >= 2 points");
  if (k < 1) throw InputError("brownian_increments: k must be >= 1");
  std::vector<double> out((grid.size() - 1) * static_cast<std::size_t>(k));
  std::size_t pos = 0;
  for (std::size_t m = 0; m + 1 < grid.size(); ++m) {
    const double dt = grid[m + 1] - grid[m];
    if (!(dt > 0.0))
      throw InputError("brownian_increments: grid must be strictly increasing");
    const double scale = std::sqrt(dt);
    for (int c = 0; c < k; ++c) out[pos++] = scale * stream.normal();
  }
  return out;
}

}  // namespace cpn
