#pragma once

// Counter-based random streams.
//
// The generator is Philox4x32-10 (Salmon et al., SC'11). A stream is fully
// determined by its StreamKey:
//   key     = (seed low 32 bits, seed high 32 bits)
//   counter = (block, lane, step low 32 bits, step high 32 bits)
// where `block` is the position inside the stream. Distinct (seed, step, lane)
// therefore never share a counter range, and a stream replays bit-identically
// on any platform. Each stream holds 2^32 blocks of 128 bits.
//
// Lanes are limited to 32 bits. Two lanes and one step value are reserved:
// kReshuffleLane for the pairing reshuffle of a step, kAuxLane for ad-hoc use
// in tools and tests, and kInitStep for the initial particle draws.

#include <array>
#include <cstdint>
#include <vector>

namespace wharm {

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t lane = 0;
};

inline constexpr std::uint64_t kReshuffleLane = 0xFFFFFFFFull;
inline constexpr std::uint64_t kAuxLane = 0xFFFFFFFEull;
inline constexpr std::uint64_t kInitStep = ~0ull;

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Raw Philox4x32-10 bijection.
PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key);

class Stream {
 public:
  explicit Stream(StreamKey key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double standard_normal();
  // Uniform on {0, ..., n-1}; n >= 1.
  std::uint64_t uniform_integer(std::uint64_t n);
  // Uniformly random permutation of {0, ..., m-1}.
  std::vector<std::size_t> permutation(std::size_t m);
  // Uniformly random fixed-point-free permutation, by rejection; m >= 2.
  std::vector<std::size_t> derangement(std::size_t m);

  const StreamKey& key() const { return key_; }

 private:
  void refill();

  StreamKey key_;
  PhiloxKey philox_key_;
  PhiloxBlock counter_;
  PhiloxBlock buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

inline Stream stream(StreamKey key) { return Stream(key); }

}  // namespace wharm
