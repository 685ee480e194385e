#pragma once

// Internal: variant tables defined by the per-ISA translation units.

#include "fsvd/kernels.hpp"

namespace fsvd::kern {

extern const Ops<float> kScalarF32;
extern const Ops<double> kScalarF64;

#if defined(__x86_64__) || defined(_M_X64)
#define FSVD_HAVE_AVX2_TU 1
extern const Ops<float> kAvx2F32;
extern const Ops<double> kAvx2F64;
bool avx2_cpu_supported();
#endif

}  // namespace fsvd::kern
