#include <cmath>
#include <complex>
#include <numbers>

#include "d3lab/arith.hpp"
#include "d3lab/error.hpp"
#include "d3lab/expsum.hpp"
#include "d3lab/mainterm.hpp"
#include "d3lab/quadrature.hpp"
#include "d3lab/voronoi.hpp"
#include "doctest.h"

using namespace d3lab;
using namespace d3lab::voronoi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// 2 G^{3,0}_{0,6}(X^2 | 0,0,0,1/2,1/2,1/2) at 30 digits
struct Frozen {
    double X, U;
};
constexpr Frozen kU[] = {{0.5, 0.778422795484883251551923647056},    {1, 0.205460487225340630324821634044},
                         {10, -0.0991649705259799265624353362633},   {100, -0.0593588166158194898616951759466},
                         {1000, 0.0195116172718101151658293322157},  {10000, 0.0133755328740906697707657741113}};

const arith::DivisorTable& table() {
    static const auto t = arith::sieve_dk(3, 100000);
    return t;
}

}  // namespace

TEST_CASE("gamma ratio: symmetry point, conjugation, poles") {
    const cplx half = gamma_ratio_cubed({0.5, 0.0});
    CHECK(std::abs(half - 1.0) < 1e-15);
    for (cplx s : {cplx{0.1, 3.0}, cplx{-2.5, 7.0}, cplx{1.7, -20.0}})
        CHECK(rel(gamma_ratio_cubed(std::conj(s)), std::conj(gamma_ratio_cubed(s))) < 1e-14);
    CHECK_THROWS_AS(gamma_ratio_cubed({0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(gamma_ratio_cubed({-2.0, 5e-9}), DomainError);
    CHECK_THROWS_AS(gamma_ratio_cubed({-4.0 + 1e-9, 0.0}), DomainError);
    CHECK_NOTHROW(gamma_ratio_cubed({-2.0, 1e-6}));
    CHECK(gamma_ratio_cubed({1.0, 0.0}) == cplx{0.0, 0.0});
}

TEST_CASE("gamma ratio against mpmath") {
    struct Case {
        cplx s, v;
    };
    const Case cases[] = {
        {{0.1, 10}, {-0.14187284919004343402, -0.029864569595971564281}},
        {{0.1, 1000}, {-0.00050027364227805459124, 0.00028765878709221854728}},
        {{0.1, 10000}, {-0.00003205662322866079702, -0.000017267151316559471596}},
        {{-3.3, 2.5}, {-0.0034119827617074988085, -0.0032232666949480514546}},
        {{2.7, -40}, {-90905566.02923922383, 376590338.07649839652}},
    };
    for (const auto& c : cases) CHECK(rel(gamma_ratio_cubed(c.s), c.v) < 1e-12);
}

TEST_CASE("gamma ratio: |G(c+it)| / t^{3(c-1/2)} settles") {
    const double c = 0.1;
    auto r = [&](double t) { return std::abs(gamma_ratio_cubed({c, t})) / std::pow(t, 3 * (c - 0.5)); };
    CHECK(rel(r(100), r(1000)) < 1e-4);
    CHECK(rel(r(1000), r(10000)) < 1e-5);
}

TEST_CASE("kernel U: frozen values, both branches") {
    for (const auto& f : kU) {
        const auto kv = kernel_U_detail(f.X);
        CHECK(rel(kv.value, f.U) < 1e-12);
        CHECK(std::abs(kv.imag_residue) < 1e-12);
        if (f.X >= 100) CHECK(rel(kernel_U_asymptotic(f.X), f.U) < 1e-12);
        CHECK(rel(kernel_U_fast(f.X), f.U) < 1e-12);
    }
    CHECK(std::abs(kernel_U(40) - kernel_U_asymptotic(40)) < 1e-11);
    CHECK(std::abs(kernel_U(700) - kernel_U_asymptotic(700)) < 1e-14);
}

TEST_CASE("kernel U: contour shift") {
    for (double X : {1.0, 10.0, 100.0}) {
        KernelQuadrature a, b;
        a.c = 0.05;
        b.c = 0.15;
        CHECK(rel(kernel_U(X, a), kernel_U(X, b)) < 1e-4);
        CHECK(rel(kernel_U(X, a), kernel_U(X)) < 1e-10);
    }
}

TEST_CASE("kernel U: absolute-convergence bound for X in [1, 1000]") {
    // C = (1/2 pi) int |G(c+it)| dt, tail from |G| ~ K t^{3c - 3/2}.
    const double c = 0.10, T = 2e4;
    auto f = [&](double t) { return std::abs(gamma_ratio_cubed({c, t})); };
    double body = 0;
    for (double a = 0; a < T; a += 50) body += quad::integrate<double>(f, a, a + 50, 1e-12, 1e-10);
    const double K = f(T) / std::pow(T, 3 * (c - 0.5));
    const double tail = K * std::pow(T, 3 * c - 0.5) / (0.5 - 3 * c);
    const double C = 2 * (body + tail) / (2 * std::numbers::pi);
    for (double X = 1; X <= 1000; X *= 1.7) CHECK(std::abs(kernel_U(X)) * std::pow(X, c) <= C);
}

TEST_CASE("kernel U: parameter and tolerance failures") {
    KernelQuadrature bad;
    bad.c = 0.2;
    CHECK_THROWS_AS(kernel_U(1.0, bad), DomainError);
    CHECK_THROWS_AS(kernel_U(-1.0), DomainError);
    KernelQuadrature tight;
    tight.rel_tol = 1e-30;
    try {
        kernel_U(10.0, tight);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(e.achieved() > 0);
    }
}

TEST_CASE("window geometry") {
    const auto w = smooth_window(1e4, 1e3);
    CHECK(w(1000) == 0.0);
    CHECK(w(2000) == 1.0);
    CHECK(w(1e4) == 0.0);
    CHECK(w(1500) > 0.0);
    CHECK(w(1500) < 1.0);
    CHECK(std::abs(w(1500) - 0.5) < 1e-14);
    CHECK(std::abs(w(9500) - 0.5) < 1e-14);
    CHECK(w.moment(0) >= 1e4 - 3e3);
    CHECK(w.moment(0) <= 1e4);
    CHECK(std::abs(w.moment(0) - 8000) < 1e-8);
    CHECK_THROWS_AS(smooth_window(100, 40), DomainError);
    CHECK_THROWS_AS(smooth_window(100, 0.5), DomainError);
}

TEST_CASE("window derivatives against central differences") {
    const auto w = smooth_window(1e4, 1e3);
    for (double t : {1200.0, 1500.0, 1830.0, 9100.0, 9650.0}) {
        for (int j = 1; j <= 4; ++j) {
            const double hstep = 0.25;
            const double fd = (w.derivative(t + hstep, j - 1) - w.derivative(t - hstep, j - 1)) / (2 * hstep);
            CHECK(std::abs(fd - w.derivative(t, j)) <= 1e-5 * SmoothWindow::derivative_constant(j) * std::pow(1e3, -j));
        }
    }
}

TEST_CASE("window: max |w'| Y is scale free") {
    double ref = 0;
    for (double Y : {10.0, 100.0, 1000.0}) {
        const auto w = smooth_window(10 * Y, Y);
        double m = 0;
        for (int i = 1; i < 20000; ++i) m = std::max(m, std::abs(w.derivative(Y + Y * i / 20000.0, 1)));
        if (ref == 0) ref = m * Y;
        CHECK(std::abs(m * Y / ref - 1) < 0.10);
    }
    CHECK(std::abs(SmoothWindow::derivative_constant(1) / ref - 1) < 0.01);
}

TEST_CASE("w transform against mpmath quadrature") {
    // mpmath quad of w(t) 2 G^{3,0}_{0,6}((Nt)^2) at x = 1e4, Y = 1e3, q = 5
    const auto w = smooth_window(1e4, 1e3);
    CHECK(rel(w_transform(5, 1, w), -6.8199935697715934566) < 1e-9);
    CHECK(rel(w_transform(5, 10, w), -1.8995330641505395809) < 1e-9);
}

TEST_CASE("w transform: Mellin table matches direct quadrature") {
    const auto w = smooth_window(1e4, 1e3);
    for (i64 q : {2, 5}) {
        const WTransformTable T(q, 1u << 18, w);
        for (u64 n : {1u, 3u, 17u, 250u, 4000u, 70000u}) {
            const double d = w_transform(q, n, w);
            CHECK(std::abs(T(n) - d) < 1e-10 * std::max(1.0, std::abs(w_transform(q, 1, w))));
        }
        CHECK_THROWS_AS(T(0), DomainError);
        CHECK_THROWS_AS(T((1u << 18) + 1), DomainError);
    }
}

TEST_CASE("w transform: trivial bound and mid-range scaling") {
    const double x = 1e4, Y = 1e3;
    const auto w = smooth_window(x, Y);
    double umax = 0;
    for (double X = 0.01; X < 1e4; X *= 1.05) umax = std::max(umax, std::abs(kernel_U_fast(X)));
    const i64 q = 5;
    double lo = 1e300, hi = 0;
    for (u64 n = 1; n <= 16; ++n) {
        const double v = std::abs(w_transform(q, n, w));
        CHECK(v <= x * umax);
        const double s = v * std::pow(static_cast<double>(n), 2.0 / 3.0) / (std::cbrt(x) * q * q);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    CHECK(hi < 1.0);
}

TEST_CASE("smoothed delta: size, conjugation, distance to the sharp sum") {
    const auto w5 = smooth_window(1e5, 1e3);
    const auto d0 = smoothed_delta_direct(arith::ReducedFraction::reduce(0, 1), w5, table());
    CHECK(std::abs(d0) <= std::pow(1e5, 0.8));
    const auto w = smooth_window(1e4, 1e3);
    for (i64 q : {3, 7, 12}) {
        const auto a = smoothed_delta_direct(arith::ReducedFraction::reduce(1, q), w, table());
        const auto b = smoothed_delta_direct(arith::ReducedFraction::reduce(q - 1, q), w, table());
        CHECK(std::abs(a - std::conj(b)) < 1e-9 * std::abs(a));
    }
    for (double x : {1e4, 1e5})
        for (double Y : {std::sqrt(x), std::pow(x, 0.75)}) {
            const auto wx = smooth_window(x, Y);
            const double dt = smoothed_delta_direct(arith::ReducedFraction::reduce(0, 1), wx, table()).real();
            double S = 0;
            for (u64 n = 1; n <= static_cast<u64>(x); ++n) S += table()[n];
            const double d = S - mainterm::mainterm_progression(1, 1, x);
            CHECK(std::abs(dt - d) <= Y * std::pow(std::log(x), 2));
        }
}

TEST_CASE("A table: sieve matches divisor enumeration, q = 1 gives d_3") {
    for (i64 q : {1, 4, 5}) {
        const auto pt = arith::ReducedFraction::reduce(1, q);
        const auto A = a_sum_table(pt, 300);
        for (u64 n = 1; n <= 300; ++n) CHECK(std::abs(A[n] - expsum::a_sum(pt, n).real()) < 1e-9);
        if (q == 1)
            for (u64 n = 1; n <= 300; ++n) CHECK(A[n] == static_cast<double>(table()[n]));
    }
}

TEST_CASE("dual sum: q = 2 tracks the smoothed sum") {
    const auto w = smooth_window(1e4, 1e3);
    const auto pt = arith::ReducedFraction::reduce(1, 2);
    const auto S = dual_sum_eval(pt, w);
    const auto D = smoothed_delta_direct(pt, w, table());
    CHECK(S.stability < 1e-7);
    CHECK(std::abs(S.value) / std::abs(D) > 0.1);
    CHECK(std::abs(S.value) / std::abs(D) < 10);
    const auto fixed = dual_sum_eval(pt, w, 4096);
    CHECK(fixed.n_used == 4096);
    CHECK_THROWS_AS(dual_sum_eval(arith::ReducedFraction::reduce(1, 23), w), GuardError);
}
