#include <immintrin.h>

#include "d3lab/simd.hpp"

namespace d3lab::simd::avx2 {

namespace {

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// (ar, ai) * (br, bi) for two packed complex numbers.
inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d br = _mm256_movedup_pd(b);
    const __m256d bi = _mm256_permute_pd(b, 0xF);
    const __m256d as = _mm256_permute_pd(a, 0x5);
    return _mm256_fmaddsub_pd(a, br, _mm256_mul_pd(as, bi));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(std::span<const double> a) {
    const std::size_t n = a.size();
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d s = _mm256_setzero_pd(), c = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(a.data() + i);
        const __m256d t = _mm256_add_pd(s, x);
        const __m256d big = _mm256_cmp_pd(_mm256_andnot_pd(sign, s), _mm256_andnot_pd(sign, x), _CMP_GE_OQ);
        const __m256d when_s = _mm256_add_pd(_mm256_sub_pd(s, t), x);
        const __m256d when_x = _mm256_add_pd(_mm256_sub_pd(x, t), s);
        c = _mm256_add_pd(c, _mm256_blendv_pd(when_x, when_s, big));
        s = t;
    }
    alignas(32) double sl[4], cl[4];
    _mm256_store_pd(sl, s);
    _mm256_store_pd(cl, c);
    CompensatedSum acc;
    for (int l = 0; l < 4; ++l) acc.add(sl[l]);
    for (; i < n; ++i) acc.add(a[i]);
    for (int l = 0; l < 4; ++l) acc.add(cl[l]);
    return acc.value();
}

cplx real_complex_dot(std::span<const double> x, std::span<const cplx> z) {
    const std::size_t n = x.size();
    const double* zp = reinterpret_cast<const double*>(z.data());
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xx = _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(x.data() + i)), 0x50);
        acc = _mm256_fmadd_pd(xx, _mm256_loadu_pd(zp + 2 * i), acc);
    }
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    double re = l[0] + l[2], im = l[1] + l[3];
    for (; i < n; ++i) {
        re += x[i] * z[i].real();
        im += x[i] * z[i].imag();
    }
    return {re, im};
}

void complex_multiply(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
    const std::size_t n = out.size();
    const double* ap = reinterpret_cast<const double*>(a.data());
    const double* bp = reinterpret_cast<const double*>(b.data());
    double* op = reinterpret_cast<double*>(out.data());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        _mm256_storeu_pd(op + 2 * i, cmul(_mm256_loadu_pd(ap + 2 * i), _mm256_loadu_pd(bp + 2 * i)));
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        out[i] = {ar * br - ai * bi, ar * bi + ai * br};
    }
}

void butterfly(std::span<cplx> lo, std::span<cplx> hi, std::span<const cplx> tw) {
    const std::size_t n = lo.size();
    double* lp = reinterpret_cast<double*>(lo.data());
    double* hp = reinterpret_cast<double*>(hi.data());
    const double* wp = reinterpret_cast<const double*>(tw.data());
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const __m256d t = cmul(_mm256_loadu_pd(wp + 2 * j), _mm256_loadu_pd(hp + 2 * j));
        const __m256d l = _mm256_loadu_pd(lp + 2 * j);
        _mm256_storeu_pd(hp + 2 * j, _mm256_sub_pd(l, t));
        _mm256_storeu_pd(lp + 2 * j, _mm256_add_pd(l, t));
    }
    for (; j < n; ++j) {
        const double wr = tw[j].real(), wi = tw[j].imag();
        const double hr = hi[j].real(), hj = hi[j].imag();
        const cplx t{wr * hr - wi * hj, wr * hj + wi * hr};
        hi[j] = lo[j] - t;
        lo[j] = lo[j] + t;
    }
}

}  // namespace d3lab::simd::avx2
