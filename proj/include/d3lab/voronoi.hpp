#pragma once

// Numerical side of the d_3 Voronoi formula: the Mellin-Barnes kernel U(X),
// the smooth cutoff w, its transform against U, and the truncated first dual
// term for magnitude comparison with the smoothed twisted sum.

#include <complex>
#include <cstdint>
#include <vector>

#include "d3lab/arith.hpp"
#include "d3lab/mainterm.hpp"

namespace d3lab::voronoi {

using arith::i64;
using arith::u64;
using cplx = std::complex<double>;

// log Gamma(z) modulo 2 pi i; only ever exponentiated.
std::complex<long double> log_gamma(std::complex<long double> z);

// (Gamma(s/2) / Gamma((1-s)/2))^3. DomainError within 1e-8 of a pole s = 0, -2, -4, ...
cplx gamma_ratio_cubed(cplx s);

struct KernelQuadrature {
    double c = 0.10;        // abscissa, strictly inside (0, 1/6)
    double T = 0.0;         // height where the path leaves Re s = c; 0 picks max(10, 8 X^{1/3})
    double rel_tol = 1e-11;
    void validate() const;
    double height(double X) const;
};

struct KernelValue {
    double value = 0;         // U(X)
    double imag_residue = 0;  // imaginary part left after adding both half contours
    double error = 0;         // summed per-piece error estimates (pessimistic)
    double T = 0;
};

// U(X) = (1/2 pi i) int_(c) G(s) X^{-s} ds. Both half contours run up Re s = c
// to height T and then along the rays arg = +-3pi/4, where the integrand decays
// exponentially. QuadratureError if the tolerance is missed or the imaginary
// residue exceeds it.
KernelValue kernel_U_detail(double X, const KernelQuadrature& quad = {});
double kernel_U(double X, const KernelQuadrature& quad = {});

// Large-X expansion from the four exponential terms; accurate to ~1e-15 for X >= 40.
double kernel_U_asymptotic(double X);

// Production evaluator: contour below X = 40, asymptotic above.
double kernel_U_fast(double X, double c = 0.10);

// w = 0 on [0, Y] and [x, inf), 1 on [2Y, x - Y], smooth monotone ramps built
// from the primitive of exp(-1/(u(1-u))).
class SmoothWindow {
public:
    SmoothWindow(double x, double Y);

    double x() const noexcept { return x_; }
    double Y() const noexcept { return Y_; }
    double operator()(double t) const { return derivative(t, 0); }
    // j-th derivative, 0 <= j <= 4.
    double derivative(double t, int j) const;
    // max |w^{(j)}| Y^j by dense sampling of the ramp (scale free).
    static double derivative_constant(int j);
    // int w(t) log^j t dt, j = 0..3.
    double moment(int j) const;
    // Mellin transform int w(t) t^{s-1} dt about s = 1, valid through (s-1)^3.
    mainterm::LaurentExpansion mellin_laurent() const;

private:
    double x_, Y_;
    std::vector<double> moments_;
};

SmoothWindow smooth_window(double x, double Y);

// Ramp primitive rho(u) = int_0^u psi / int_0^1 psi and psi^{(j)}(u) / int_0^1 psi.
double ramp(double u);
double ramp_derivative(double u, int j);

// N = pi^3 n / q^3
double dual_frequency(i64 q, u64 n);
// x^2 q^3 / Y^3: past this N the transform of w decays faster than any power (before the epsilon).
double w_transform_cutoff(double x, double Y, i64 q);

// hat w_q(n) = int w(t) U(N t) dt.
double w_transform(i64 q, u64 n, const SmoothWindow& window, const KernelQuadrature& quad = {});

// hat w_q(n) for all 1 <= n <= n_max at once, from
//   hat w(N) = (1/2 pi i) int_(c) G(s) W(1-s) N^{-s} ds,  W(z) = int w(t) t^{z-1} dt,
// on Re s = 0.95. W comes from one FFT of w'(e^v) e^{v(2-c)}; the tau integral is
// a trapezoid sum, i.e. a trigonometric polynomial in log N, tabulated by a second
// FFT at 8x oversampling and read off with 24-point Lagrange interpolation.
class WTransformTable {
public:
    WTransformTable(i64 q, u64 n_max, const SmoothWindow& window);
    double operator()(u64 n) const;
    u64 n_max() const noexcept { return n_max_; }
    double tau_max() const noexcept { return tau_max_; }
    double abscissa() const noexcept { return c_; }

private:
    i64 q_;
    u64 n_max_;
    double c_ = 0.95, h_ = 0, tau_max_ = 0;
    double lam0_ = 0, dlam_ = 0;  // grid start and spacing in log N
    std::vector<double> F_;       // Re sum_j C_j e^{-i j h lambda} on the grid
};

// A_{h/q}(n), 1 <= n <= n_max (index 0 unused), by a Dirichlet-convolution sieve
// over the q^3 table of R_{a,b,c}(h/q).
std::vector<double> a_sum_table(const arith::ReducedFraction& point, u64 n_max);

// sum_{n <= x} d_3(n) e(nh/q) w(n) - Res_{s=1} W(s) E_{h/q}(s), with the polar
// part of E taken from the Fourier-paired main-term data.
cplx smoothed_delta_direct(const arith::ReducedFraction& point, const SmoothWindow& window,
                           const arith::DivisorTable& table);

struct DualSum {
    cplx value;
    u64 n_used = 0;
    double cutoff = 0;        // (x^2 q^3 / Y^3)^{1.1}
    cplx value_at_cutoff;     // partial sum through floor(cutoff)
    double last_block = 0;    // |contribution of the final doubling block|
    double stability = 0;     // last_block / |value|
};

// (pi^{3/2} / q^3) sum_{n <= n_max} A_{h/q}(n) hat w_q(n), with hat w from
// WTransformTable. n_max = 0 starts at max(cutoff, 32) and doubles until a block
// changes the sum by < tol relative (capped at n_cap).
DualSum dual_sum_eval(const arith::ReducedFraction& point, const SmoothWindow& window, u64 n_max = 0,
                      double tol = 1e-7, unsigned threads = 1, u64 n_cap = 1u << 20);

}  // namespace d3lab::voronoi
