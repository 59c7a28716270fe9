#include "covaudit/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// Compiled with per-function target attributes so the rest of the library
// stays baseline x86-64; only reached after the CPUID check in simd.cpp.

namespace covaudit::simd::avx2 {

namespace {

__attribute__((target("avx2,fma"))) inline float hsum256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

}  // namespace

__attribute__((target("avx2,fma"))) float dot(const float* a, const float* b, std::size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    }
    float sum = hsum256(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

__attribute__((target("avx2,fma"))) void dot_rows(const float* query, const float* rows,
                                                  std::size_t n_rows, std::size_t dim, float* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(query, rows + r * dim, dim);
}

}  // namespace covaudit::simd::avx2

#endif
