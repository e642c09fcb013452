#pragma once

// Vector reductions used on the hot paths (weight normalization, ESS,
// reflection coupling). Each kernel has a scalar reference implementation
// and, where the CPU supports it, an AVX2/FMA or NEON variant. The backend is
// picked once at startup and can be overridden with WHARM_SIMD=scalar|avx2|neon
// or select().
//
// Results of different backends agree to rounding, not bitwise: the vector
// variants accumulate in several lanes. Within one process the active backend
// is fixed, so runs stay reproducible across thread counts.

#include <span>
#include <string_view>

namespace wharm::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  double (*max)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

std::string_view name(Backend b);
bool is_supported(Backend b);
Backend best_available();
Backend active();
// Throws std::invalid_argument if the backend is not compiled in or the CPU
// lacks the instructions.
void select(Backend b);
Backend parse_backend(std::string_view text);

// Table for a specific backend, used by the equivalence tests.
const KernelTable& table(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sum_squares(std::span<const double> a);
// -inf for an empty span.
double max(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace wharm::simd
