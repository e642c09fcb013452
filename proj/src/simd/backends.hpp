#pragma once

#include "wharm/simd.hpp"

namespace wharm::simd::detail {

extern const KernelTable scalar_table;
#if defined(WHARM_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(WHARM_HAVE_NEON)
extern const KernelTable neon_table;
#endif

}  // namespace wharm::simd::detail
