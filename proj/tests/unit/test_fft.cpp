#include <random>

#include "d3lab/fft.hpp"
#include "d3lab/simd.hpp"
#include "doctest.h"

using namespace d3lab;
using fft::cplx;

namespace {

std::vector<cplx> signal(std::size_t n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<cplx> v(n);
    for (auto& z : v) z = {u(rng), u(rng)};
    return v;
}

double rel_err(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / std::max(den, 1e-300);
}

}  // namespace

TEST_CASE("chirp transform matches direct transform") {
    for (std::size_t n : {1u, 2u, 3u, 7u, 12u, 30u, 97u, 465u}) {
        const auto x = signal(n);
        for (int sign : {1, -1}) REQUIRE(rel_err(fft::chirp_dft(x, sign), fft::direct_dft(x, sign)) < 1e-12);
    }
}

TEST_CASE("radix-2 transform matches direct transform") {
    for (std::size_t n : {1u, 2u, 4u, 64u, 1024u}) {
        auto x = signal(n);
        const auto ref = fft::direct_dft(x, 1);
        fft::radix2(x, 1);
        REQUIRE(rel_err(x, ref) < 1e-12);
    }
}

TEST_CASE("transforms agree across kernel levels") {
    if (!simd::level_supported(simd::Level::Avx2)) return;
    const auto before = simd::active_level();
    const auto x = signal(317);
    simd::set_level(simd::Level::Scalar);
    const auto a = fft::chirp_dft(x, 1);
    simd::set_level(simd::Level::Avx2);
    const auto b = fft::chirp_dft(x, 1);
    simd::set_level(before);
    CHECK(rel_err(a, b) < 1e-13);
}

TEST_CASE("direct transform sign convention") {
    const std::vector<cplx> x{0, 1, 0, 0};
    const auto y = fft::direct_dft(x, 1);
    CHECK(std::abs(y[1] - cplx{0, 1}) < 1e-15);
}
