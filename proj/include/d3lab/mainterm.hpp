#pragma once

// Residue engine around s = 1: truncated Laurent expansions, zeta powers from
// Stieltjes constants, gcd-restricted divisor series, and the main terms
// M_x(q, a) and f_{h/q}(x) built from them. Everything is parametrised by the
// fold count k in {2, 3}; k = 3 is the ternary divisor function.

#include <complex>
#include <cstdint>
#include <vector>

#include "d3lab/arith.hpp"

namespace d3lab::mainterm {

using arith::i64;
using arith::u64;

// sum_{j = lo}^{hi} c_j (s - 1)^j, where coefficients above hi are unknown.
class LaurentExpansion {
public:
    LaurentExpansion() = default;
    // coeffs[i] multiplies (s - 1)^(lo + i).
    LaurentExpansion(int lo, std::vector<double> coeffs);

    int lo() const noexcept { return lo_; }
    int hi() const noexcept { return lo_ + static_cast<int>(c_.size()) - 1; }
    int pole_order() const noexcept;
    // 0 below lo; DomainError above hi.
    double coeff(int j) const;
    const std::vector<double>& coeffs() const noexcept { return c_; }

    LaurentExpansion operator*(const LaurentExpansion& o) const;
    LaurentExpansion operator+(const LaurentExpansion& o) const;
    LaurentExpansion operator*(double s) const;
    // Multiply by (s - 1)^k.
    LaurentExpansion shifted(int k) const;
    // Drops coefficients above order j.
    LaurentExpansion truncated(int j) const;
    // Partial sum at s - 1 = u.
    std::complex<double> evaluate(std::complex<double> u) const;

private:
    int lo_ = 0;
    std::vector<double> c_;
};

// gamma_0 .. gamma_{count-1} by Euler-Maclaurin in extended precision.
// Cached after the first call; thread-safe.
const std::vector<long double>& stieltjes_constants(int count = 24);

// zeta(s) = 1/(s-1) + sum_n (-1)^n gamma_n / n! (s-1)^n through order J.
LaurentExpansion zeta_laurent(int J);
// zeta(s)^k valid through order J.
LaurentExpansion zeta_power_laurent(int k, int J);
// zeta(s)^3; pre J <= 4.
LaurentExpansion zeta3_laurent(int J);

// Taylor series of exp(c (s - 1)) through order J.
LaurentExpansion exp_series(double c, int J);

// sum_{(n, q) = delta} d_k(n) n^{-s} about s = 1, valid through order J.
LaurentExpansion restricted_series_laurent(i64 q, i64 delta, int k = 3, int J = 3);

// Same series at a real or complex point s != 1 from the local-factor product
// and the supplied value of zeta(s).
std::complex<double> restricted_series_at(i64 q, i64 delta, std::complex<double> s, std::complex<double> zeta_s,
                                          int k = 3);

// Res_{s=1} F(s) x^{s-1} / s for F with pole order <= 3, using the expansion of F.
double residue_xs(const LaurentExpansion& F, double x);

// Main term x (A2 log^2 x + A1 log x + A0).
struct MainTermPoly {
    i64 q = 1, delta = 1;
    int k = 3;
    double A2 = 0, A1 = 0, A0 = 0;
    double evaluate(double x) const;
};

// M_x(q, a) for any a with gcd(q, a) = delta.
MainTermPoly mainterm_poly(i64 q, i64 delta, int k = 3);
double mainterm_progression(i64 q, i64 a, double x, int k = 3);

// Polar data of the Fourier pairing sum_{delta | q} mu(q/delta)/phi(q/delta) D_delta(s);
// it depends on h/q only through q.
LaurentExpansion expsum_polar(i64 q, int k = 3, int J = 3);
MainTermPoly expsum_poly(i64 q, int k = 3);
// f_{h/q}(x) = Res_{s=1} (polar data) x^s / s. Requires h/q reduced.
double mainterm_expsum(const arith::ReducedFraction& point, double x, int k = 3);

// Residue Res_{s=1} D_delta(s) x^{s-1}/s by the trapezoid rule on |s - 1| = radius,
// evaluating the local factors directly and zeta from its Laurent data.
double contour_residue(i64 q, i64 delta, double x, int k = 3, int points = 256, double radius = 0.25);
// Same residue by Laurent algebra.
double laurent_residue(i64 q, i64 delta, double x, int k = 3);

}  // namespace d3lab::mainterm
