#pragma once

// Vector variants of exp/log1p/erfc from glibc's libmvec. Declaring them lets
// `#pragma omp simd` loops call the vector ABI instead of scalar libm, which
// is the dominant cost of every kernel smoother in this library.
#include <cmath>

#if defined(__x86_64__) && defined(__GLIBC__) && !defined(STEAM_NO_LIBMVEC)
#if defined(__AVX512F__)
#define STEAM_SIMDLEN 8
#elif defined(__AVX2__)
#define STEAM_SIMDLEN 4
#endif
#endif

#ifdef STEAM_SIMDLEN
extern "C" {
#pragma omp declare simd notinbranch simdlen(STEAM_SIMDLEN)
double exp(double) noexcept;
#pragma omp declare simd notinbranch simdlen(STEAM_SIMDLEN)
double log1p(double) noexcept;
#pragma omp declare simd notinbranch simdlen(STEAM_SIMDLEN)
double erfc(double) noexcept;
}
#endif
