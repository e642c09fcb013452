#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "backends.hpp"

namespace wharm::simd {
namespace {

bool cpu_has_avx2() {
#if defined(WHARM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  Backend b = best_available();
  if (const char* env = std::getenv("WHARM_SIMD"); env != nullptr && *env != '\0') {
    Backend requested = parse_backend(env);
    if (!is_supported(requested)) {
      throw std::runtime_error(std::string("WHARM_SIMD backend not available: ") + env);
    }
    b = requested;
  }
  return &table(b);
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> t{initial_table()};
  return t;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd: length mismatch");
}

}  // namespace

std::string_view name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view text) {
  if (text == "scalar") return Backend::scalar;
  if (text == "avx2") return Backend::avx2;
  if (text == "neon") return Backend::neon;
  throw std::invalid_argument("unknown simd backend '" + std::string(text) +
                              "' (expected scalar, avx2 or neon)");
}

bool is_supported(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: return cpu_has_avx2();
    case Backend::neon:
#if defined(WHARM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend best_available() {
  if (is_supported(Backend::avx2)) return Backend::avx2;
  if (is_supported(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

const KernelTable& table(Backend b) {
  if (!is_supported(b)) {
    throw std::invalid_argument("simd backend not available: " + std::string(name(b)));
  }
  switch (b) {
#if defined(WHARM_HAVE_AVX2)
    case Backend::avx2: return detail::avx2_table;
#endif
#if defined(WHARM_HAVE_NEON)
    case Backend::neon: return detail::neon_table;
#endif
    default: return detail::scalar_table;
  }
}

Backend active() { return current().load(std::memory_order_acquire)->backend; }

void select(Backend b) { current().store(&table(b), std::memory_order_release); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return current().load(std::memory_order_acquire)->dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) {
  return current().load(std::memory_order_acquire)->sum(a.data(), a.size());
}

double sum_squares(std::span<const double> a) {
  return current().load(std::memory_order_acquire)->sum_squares(a.data(), a.size());
}

double max(std::span<const double> a) {
  return current().load(std::memory_order_acquire)->max(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  current().load(std::memory_order_acquire)->axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace wharm::simd
