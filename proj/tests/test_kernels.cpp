#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "faithfulrag/kernels.hpp"

using namespace faithfulrag;

TEST_CASE("scalar dot matches hand computation") {
    std::vector<double> a = {1.0, 2.0, 3.0};
    std::vector<double> b = {4.0, -5.0, 6.0};
    CHECK(kernels::dot_scalar(a.data(), b.data(), 3) == doctest::Approx(12.0).epsilon(1e-15));
    CHECK(kernels::dot_scalar(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("dispatched dot agrees with the scalar reference") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 1.0);
    // Odd lengths cover the vector tails of the SIMD paths.
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 64u, 100u, 256u, 333u}) {
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = dist(rng);
        for (auto& v : b) v = dist(rng);
        double reference = kernels::dot_scalar(a.data(), b.data(), n);
        double dispatched = kernels::dot(a, b);
        CHECK(dispatched == doctest::Approx(reference).epsilon(1e-12));
    }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variant is equivalent to the scalar reference") {
    if (!__builtin_cpu_supports("avx2")) return;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int round = 0; round < 200; ++round) {
        std::size_t n = 1 + static_cast<std::size_t>(rng() % 300);
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = dist(rng);
        for (auto& v : b) v = dist(rng);
        double reference = kernels::dot_scalar(a.data(), b.data(), n);
        double simd = kernels::dot_avx2(a.data(), b.data(), n);
        CHECK(simd == doctest::Approx(reference).epsilon(1e-12));
    }
}
#endif

TEST_CASE("active level resolves to a named kernel") {
    const char* name = kernels::level_name(kernels::active_level());
    CHECK((std::string(name) == "scalar" || std::string(name) == "avx2" ||
           std::string(name) == "neon"));
}
