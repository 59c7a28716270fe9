#include "covaudit/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace covaudit::simd {

namespace scalar {

float dot(const float* a, const float* b, std::size_t n) {
    float sum = 0.0f;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, float* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot(query, rows + r * dim, dim);
}

}  // namespace scalar

namespace {

Isa probe() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
    return Isa::Scalar;
}

Isa initial_isa() {
    const Isa best = probe();
    if (const char* env = std::getenv("COVAUDIT_SIMD")) {
        if (std::string(env) == "scalar") return Isa::Scalar;
    }
    return best;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "scalar";
}

Isa detected_isa() {
    static const Isa isa = probe();
    return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
    if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) return false;
    active().store(isa, std::memory_order_relaxed);
    return true;
}

float dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw std::invalid_argument("simd::dot: length mismatch");
#if defined(__x86_64__) || defined(_M_X64)
    if (active_isa() == Isa::Avx2) return avx2::dot(a.data(), b.data(), a.size());
#endif
    return scalar::dot(a.data(), b.data(), a.size());
}

float squared_norm(std::span<const float> a) { return dot(a, a); }

void dot_rows(std::span<const float> query, std::span<const float> rows, std::size_t dim,
              std::span<float> out) {
    if (query.size() != dim || (dim > 0 && rows.size() != out.size() * dim)) {
        throw std::invalid_argument("simd::dot_rows: shape mismatch");
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (active_isa() == Isa::Avx2) {
        avx2::dot_rows(query.data(), rows.data(), out.size(), dim, out.data());
        return;
    }
#endif
    scalar::dot_rows(query.data(), rows.data(), out.size(), dim, out.data());
}

}  // namespace covaudit::simd
