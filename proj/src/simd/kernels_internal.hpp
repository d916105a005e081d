#pragma once

#include "affect/simd/kernels.hpp"

namespace affect::simd::detail {

extern const KernelTable kScalarTable;

// Defined only when the compiler can target x86-64 AVX2.
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define AFFECT_HAVE_AVX2_KERNELS 1
extern const KernelTable kAvx2Table;
#endif

}  // namespace affect::simd::detail
