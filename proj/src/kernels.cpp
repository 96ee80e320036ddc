#include "faithfulrag/kernels.hpp"

#include <cassert>
#include <cstdlib>
#include <cstring>

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace faithfulrag::kernels {

const char* level_name(Level level) {
    switch (level) {
        case Level::scalar: return "scalar";
        case Level::avx2: return "avx2";
        case Level::neon: return "neon";
    }
    return "scalar";
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

#if defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double sum = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}
#endif

namespace {

Level detect_level() {
    const char* want = std::getenv("FAITHFULRAG_KERNEL");
    if (want && std::strcmp(want, "scalar") == 0) return Level::scalar;
#if defined(__x86_64__) || defined(_M_X64)
    bool have_avx2 = __builtin_cpu_supports("avx2");
    if (want && std::strcmp(want, "avx2") == 0) return have_avx2 ? Level::avx2 : Level::scalar;
    if (want == nullptr || std::strcmp(want, "auto") == 0)
        return have_avx2 ? Level::avx2 : Level::scalar;
#elif defined(__aarch64__)
    if (want == nullptr || std::strcmp(want, "auto") == 0 || std::strcmp(want, "neon") == 0)
        return Level::neon;
#endif
    return Level::scalar;
}

using DotFn = double (*)(const double*, const double*, std::size_t);

DotFn resolve(Level level) {
    switch (level) {
#if defined(__x86_64__) || defined(_M_X64)
        case Level::avx2: return dot_avx2;
#endif
#if defined(__aarch64__)
        case Level::neon: return dot_neon;
#endif
        default: return dot_scalar;
    }
}

} // namespace

Level active_level() {
    static Level level = detect_level();
    return level;
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    static DotFn fn = resolve(active_level());
    return fn(a.data(), b.data(), a.size());
}

} // namespace faithfulrag::kernels
