#include "d3lab/simd.hpp"

namespace d3lab::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sum(std::span<const double> a) {
    CompensatedSum acc;
    for (double x : a) acc.add(x);
    return acc.value();
}

cplx real_complex_dot(std::span<const double> x, std::span<const cplx> z) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        re += x[i] * z[i].real();
        im += x[i] * z[i].imag();
    }
    return {re, im};
}

void complex_multiply(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        out[i] = {ar * br - ai * bi, ar * bi + ai * br};
    }
}

void butterfly(std::span<cplx> lo, std::span<cplx> hi, std::span<const cplx> tw) {
    for (std::size_t j = 0; j < lo.size(); ++j) {
        const double wr = tw[j].real(), wi = tw[j].imag();
        const double hr = hi[j].real(), hj = hi[j].imag();
        const cplx t{wr * hr - wi * hj, wr * hj + wi * hr};
        hi[j] = lo[j] - t;
        lo[j] = lo[j] + t;
    }
}

}  // namespace d3lab::simd::scalar
