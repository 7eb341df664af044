#pragma once

// Data-parallel inner loops with a scalar reference variant and an AVX2/FMA
// variant picked at runtime. Both variants are exposed so tests can compare
// them directly; callers use the dispatched free functions.
//
// The dispatched level is process-wide and never depends on thread count, so
// results stay bit-identical across thread configurations on one machine.
// D3LAB_SIMD=scalar|avx2 in the environment overrides detection.

#include <complex>
#include <span>
#include <string_view>

namespace d3lab::simd {

using cplx = std::complex<double>;

enum class Level { Scalar, Avx2 };

std::string_view level_name(Level level) noexcept;
bool level_supported(Level level) noexcept;
Level active_level() noexcept;
// Throws DomainError if the CPU (or build) lacks the requested level.
void set_level(Level level);

// sum_i a_i b_i
double dot(std::span<const double> a, std::span<const double> b);
// Compensated (Neumaier) sum.
double sum(std::span<const double> a);
// sum_i x_i z_i with real x.
cplx real_complex_dot(std::span<const double> x, std::span<const cplx> z);
// out_i = a_i * b_i; out may alias a or b.
void complex_multiply(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
// Radix-2 butterfly: t = tw_j hi_j; hi_j = lo_j - t; lo_j = lo_j + t.
void butterfly(std::span<cplx> lo, std::span<cplx> hi, std::span<const cplx> tw);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
cplx real_complex_dot(std::span<const double> x, std::span<const cplx> z);
void complex_multiply(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
void butterfly(std::span<cplx> lo, std::span<cplx> hi, std::span<const cplx> tw);
}  // namespace scalar

namespace avx2 {
// Only callable when level_supported(Level::Avx2).
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
cplx real_complex_dot(std::span<const double> x, std::span<const cplx> z);
void complex_multiply(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
void butterfly(std::span<cplx> lo, std::span<cplx> hi, std::span<const cplx> tw);
}  // namespace avx2

// Sequential Neumaier accumulator for fixed-order reductions.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(cplx z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }
    cplx value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_, im_;
};

}  // namespace d3lab::simd
