#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense-vector kernels used by the exhaustive cosine scan. Each kernel has a
// scalar reference and, on x86-64, an AVX2/FMA variant; the variant is picked
// once at startup from CPUID and can be forced with COVAUDIT_SIMD=scalar.

namespace covaudit::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best variant the running CPU supports.
Isa detected_isa();
/// Variant the dispatching entry points currently use.
Isa active_isa();
/// Forces a variant; returns false (and changes nothing) if unsupported.
bool set_active_isa(Isa isa);

float dot(std::span<const float> a, std::span<const float> b);
float squared_norm(std::span<const float> a);
/// out[i] = dot(query, rows[i*dim .. (i+1)*dim)).
void dot_rows(std::span<const float> query, std::span<const float> rows, std::size_t dim,
              std::span<float> out);

namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, float* out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, float* out);
}  // namespace avx2
#endif

}  // namespace covaudit::simd
