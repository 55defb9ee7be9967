#pragma once

#include <cmath>
#include <cstdint>

namespace gwlimits {

// Splittable counter-style random streams.
//
// A stream is identified by a 64-bit id; its draw sequence is splitmix64
// seeded from that id. Substreams are derived from (id, key) through a
// double avalanche, so the tree (base seed -> replicate -> attempt ->
// generation) yields statistically independent streams whose draws never
// depend on scheduling or worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t id) : id_(id), state_(avalanche(id ^ kSeedTweak)) {}

  std::uint64_t id() const { return id_; }

  RngStream derived(std::uint64_t key) const { return RngStream(derive_id(id_, key)); }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return avalanche(state_);
  }

  // Uniform on the open interval (0,1); safe as a log() argument.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (two uniforms per draw).
  double next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  static std::uint64_t derive_id(std::uint64_t id, std::uint64_t key) {
    return avalanche(avalanche(id ^ kDeriveTweak) + 0x9e3779b97f4a7c15ULL * (key + 1));
  }

 private:
  static constexpr std::uint64_t kSeedTweak = 0x6a09e667f3bcc909ULL;
  static constexpr std::uint64_t kDeriveTweak = 0xbb67ae8584caa73bULL;

  // splitmix64 finalizer (Steele/Lea/Flood construction, Vigna's constants).
  static std::uint64_t avalanche(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t id_;
  std::uint64_t state_;
};

}  // namespace gwlimits
