#pragma once

#include <cstddef>
#include <span>

// Dot-product kernels behind the similarity scoring hot loop. A scalar
// reference implementation always exists; SIMD variants are selected at
// runtime from CPU capabilities and must stay numerically equivalent to the
// reference (they may differ only by summation order).
//
// The environment variable FAITHFULRAG_KERNEL ∈ {auto, scalar, avx2, neon}
// overrides the selection; unsupported requests fall back to scalar.

namespace faithfulrag::kernels {

enum class Level { scalar, avx2, neon };

const char* level_name(Level level);

/// The variant the dispatcher resolved to for this process.
Level active_level();

/// Dispatched dot product. Spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

double dot_scalar(const double* a, const double* b, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
#endif

#if defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n);
#endif

} // namespace faithfulrag::kernels
