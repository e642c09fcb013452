#include "wharm/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace wharm {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

Stream::Stream(StreamKey key) : key_(key) {
  if (key.lane > 0xFFFFFFFFull) throw std::invalid_argument("StreamKey lane must fit in 32 bits");
  philox_key_ = {static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
  counter_ = {0u, static_cast<std::uint32_t>(key.lane), static_cast<std::uint32_t>(key.step),
              static_cast<std::uint32_t>(key.step >> 32)};
}

void Stream::refill() {
  buffer_ = philox4x32_10(counter_, philox_key_);
  if (++counter_[0] == 0u) throw std::runtime_error("random stream exhausted");
  used_ = 0;
}

std::uint32_t Stream::next_u32() {
  if (used_ == 4) refill();
  return buffer_[used_++];
}

std::uint64_t Stream::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double Stream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
}

double Stream::standard_normal() {
  // Box-Muller; the sine branch is kept for the next call.
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  has_spare_normal_ = true;
  return r * std::cos(theta);
}

std::uint64_t Stream::uniform_integer(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_integer: empty range");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x < threshold);
  return x % n;
}

std::vector<std::size_t> Stream::permutation(std::size_t m) {
  std::vector<std::size_t> p(m);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = m; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_integer(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

std::vector<std::size_t> Stream::derangement(std::size_t m) {
  if (m < 2) throw std::invalid_argument("derangement requires at least 2 elements");
  for (;;) {
    auto p = permutation(m);
    bool fixed = false;
    for (std::size_t i = 0; i < m && !fixed; ++i) fixed = p[i] == i;
    if (!fixed) return p;
  }
}

}  // namespace wharm
