#include <atomic>
#include <cstdlib>
#include <cstring>

#include "d3lab/error.hpp"
#include "d3lab/simd.hpp"

namespace d3lab::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(D3LAB_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Level initial_level() noexcept {
    const bool avx = cpu_has_avx2();
    if (const char* env = std::getenv("D3LAB_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Level::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx) return Level::Avx2;
    }
    return avx ? Level::Avx2 : Level::Scalar;
}

std::atomic<Level>& current() noexcept {
    static std::atomic<Level> level{initial_level()};
    return level;
}

bool use_avx2() noexcept { return current().load(std::memory_order_relaxed) == Level::Avx2; }

}  // namespace

std::string_view level_name(Level level) noexcept {
    return level == Level::Avx2 ? "avx2" : "scalar";
}

bool level_supported(Level level) noexcept { return level == Level::Scalar || cpu_has_avx2(); }

Level active_level() noexcept { return current().load(); }

void set_level(Level level) {
    if (!level_supported(level)) throw DomainError("simd level not supported: " + std::string(level_name(level)));
    current().store(level);
}

#if defined(D3LAB_HAVE_AVX2)
#define D3LAB_DISPATCH(fn, ...) (use_avx2() ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define D3LAB_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("dot: length mismatch");
    return D3LAB_DISPATCH(dot, a, b);
}

double sum(std::span<const double> a) { return D3LAB_DISPATCH(sum, a); }

cplx real_complex_dot(std::span<const double> x, std::span<const cplx> z) {
    if (x.size() != z.size()) throw DomainError("real_complex_dot: length mismatch");
    return D3LAB_DISPATCH(real_complex_dot, x, z);
}

void complex_multiply(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
    if (a.size() != out.size() || b.size() != out.size()) throw DomainError("complex_multiply: length mismatch");
    D3LAB_DISPATCH(complex_multiply, a, b, out);
}

void butterfly(std::span<cplx> lo, std::span<cplx> hi, std::span<const cplx> tw) {
    if (lo.size() != hi.size() || tw.size() != lo.size()) throw DomainError("butterfly: length mismatch");
    D3LAB_DISPATCH(butterfly, lo, hi, tw);
}

}  // namespace d3lab::simd
