#include "d3lab/voronoi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "d3lab/error.hpp"
#include "d3lab/expsum.hpp"
#include "d3lab/fft.hpp"
#include "d3lab/parallel.hpp"
#include "d3lab/quadrature.hpp"
#include "d3lab/simd.hpp"

namespace d3lab::voronoi {

using ld = long double;
using cld = std::complex<long double>;

namespace {

constexpr ld kPi = 3.141592653589793238462643383279502884L;

// log sin(pi z) mod 2 pi i without overflow for large |Im z|.
cld log_sin_pi(cld z) {
    const cld i{0, 1};
    if (std::abs(z.imag()) < 5) return std::log(std::sin(kPi * z));
    if (z.imag() > 0) return -i * kPi * z + std::log(cld{0, 0.5L}) + std::log(1.0L - std::exp(2.0L * i * kPi * z));
    return i * kPi * z + std::log(cld{0, -0.5L}) + std::log(1.0L - std::exp(-2.0L * i * kPi * z));
}

// B_{2k} / (2k (2k-1)) for k = 1..10
constexpr ld kStirling[] = {1.0L / 12,           -1.0L / 360,          1.0L / 1260,         -1.0L / 1680,
                            1.0L / 1188,         -691.0L / 360360,     1.0L / 156,          -3617.0L / 122400,
                            43867.0L / 244188,   -174611.0L / 125400};

}  // namespace

cld log_gamma(cld z) {
    if (z.real() < 0.5L) return std::log(kPi) - log_sin_pi(z) - log_gamma(1.0L - z);
    cld prod{1, 0};
    while (std::abs(z) < 15.0L) {
        prod *= z;
        z += 1.0L;
    }
    const cld inv = 1.0L / z, inv2 = inv * inv;
    cld series{0, 0}, pw = inv;
    for (ld c : kStirling) {
        series += c * pw;
        pw *= inv2;
    }
    return (z - 0.5L) * std::log(z) - z + 0.5L * std::log(2 * kPi) + series - std::log(prod);
}

cplx gamma_ratio_cubed(cplx s) {
    // Poles of Gamma(s/2) at s = 0, -2, -4, ...
    if (s.real() < 1e-8) {
        const double m = std::round(-s.real() / 2);
        if (m >= 0 && std::abs(s + 2.0 * m) < 1e-8) throw DomainError("gamma_ratio_cubed: s is within 1e-8 of a pole");
    }
    // Zeros from Gamma((1-s)/2) at s = 1, 3, 5, ...
    if (s.real() > 1 - 1e-8) {
        const double m = std::round((s.real() - 1) / 2);
        if (m >= 0 && std::abs(s - (1.0 + 2.0 * m)) < 1e-8) return {0.0, 0.0};
    }
    const cld sl{s.real(), s.imag()};
    const cld v = 3.0L * (log_gamma(sl / 2.0L) - log_gamma((1.0L - sl) / 2.0L));
    const cld e = std::exp(v);
    return {static_cast<double>(e.real()), static_cast<double>(e.imag())};
}

void KernelQuadrature::validate() const {
    if (!(c > 0.0 && c < 1.0 / 6.0)) throw DomainError("KernelQuadrature: abscissa c must lie in (0, 1/6)");
    if (T < 0) throw DomainError("KernelQuadrature: T must be >= 0");
    if (!(rel_tol > 0)) throw DomainError("KernelQuadrature: tolerance must be positive");
}

double KernelQuadrature::height(double X) const { return T > 0 ? T : std::max(10.0, 8.0 * std::cbrt(X)); }

namespace {

// G(s) X^{-s} in one exponent so that large |s| never overflows.
cplx integrand(cplx s, ld logX) {
    if (std::abs(s - 1.0) < 1e-8) return {0.0, 0.0};
    const cld sl{s.real(), s.imag()};
    const cld v = 3.0L * (log_gamma(sl / 2.0L) - log_gamma((1.0L - sl) / 2.0L)) - sl * logX;
    const cld e = std::exp(v);
    return {static_cast<double>(e.real()), static_cast<double>(e.imag())};
}

struct HalfContour {
    cplx value;
    double error;
};

// int over Re s = c from c to c + i sign T, then along c + i sign T + r e^{i sign 3pi/4}.
HalfContour half_contour(double X, double c, double T, int sign, double rel_tol) {
    const ld logX = std::log(static_cast<ld>(X));
    const cplx i{0, 1};
    const cplx dir = std::polar(1.0, sign * 0.75 * std::numbers::pi);
    const double abs_floor = 1e-16;
    // Vertical leg in panels of unit height keeps the adaptive rule local.
    cplx total{};
    double err = 0;
    const int panels = std::max(1, static_cast<int>(std::ceil(T)));
    const double hstep = T / panels;
    for (int k = 0; k < panels; ++k) {
        auto f = [&](double t) { return integrand({c, sign * t}, logX) * (static_cast<double>(sign) * i); };
        auto r = quad::gauss_kronrod<cplx>(f, k * hstep, (k + 1) * hstep, abs_floor, rel_tol * 0.1, 200);
        if (!r.converged) throw QuadratureError("kernel_U: vertical leg did not converge", r.error);
        total += r.value;
        err += r.error;
    }
    const cplx start{c, sign * T};
    double lo = 0, hi = 2;
    for (int k = 0; k < 40; ++k) {
        auto f = [&](double r) { return integrand(start + r * dir, logX) * dir; };
        auto r = quad::gauss_kronrod<cplx>(f, lo, hi, abs_floor, rel_tol * 0.1, 200);
        if (!r.converged) throw QuadratureError("kernel_U: ray leg did not converge", r.error);
        total += r.value;
        err += r.error;
        if (std::abs(r.value) < 1e-3 * rel_tol * std::max(std::abs(total), 1e-300) || std::abs(r.value) < abs_floor) break;
        lo = hi;
        hi *= 2;
    }
    return {total, err};
}

}  // namespace

KernelValue kernel_U_detail(double X, const KernelQuadrature& quad) {
    quad.validate();
    if (!(X > 0)) throw DomainError("kernel_U: X must be positive");
    const double T = quad.height(X);
    const auto up = half_contour(X, quad.c, T, +1, quad.rel_tol);
    const auto down = half_contour(X, quad.c, T, -1, quad.rel_tol);
    // (1 / 2 pi i)(up - conj-mirrored lower half): the lower leg runs downward, so reverse it.
    const cplx total = (up.value - down.value) / cplx{0, 2 * std::numbers::pi};
    KernelValue kv;
    kv.value = total.real();
    kv.imag_residue = total.imag();
    kv.error = (up.error + down.error) / (2 * std::numbers::pi);
    kv.T = T;
    const double tol = std::max(quad.rel_tol * std::abs(kv.value), 1e-14);
    if (std::abs(kv.imag_residue) > tol) throw QuadratureError("kernel_U: imaginary residue above tolerance", std::abs(kv.imag_residue));
    return kv;
}

double kernel_U(double X, const KernelQuadrature& quad) { return kernel_U_detail(X, quad).value; }

namespace {

// I(z) ~ (2 pi / sqrt 3) e^{-3w} w^{-1} sum_j M_j w^{-j}, w = z^{1/3}.
cplx asymptotic_term(double X, int k) {
    const double arg = -std::numbers::pi * k / 2.0;
    const cplx w = std::polar(std::cbrt(8.0 * X), arg / 3.0);
    const cplx inv = 1.0 / w;
    double Mm1 = 0.0, M = 1.0;
    cplx sum = 1.0, pw = 1.0;
    double last = 1.0;
    for (int j = 0; j < 80; ++j) {
        const double next = -(static_cast<double>(j) * j * j * Mm1 + (3.0 + 9.0 * j * (j + 1)) * M) / (27.0 * (j + 1));
        Mm1 = M;
        M = next;
        pw *= inv;
        const double mag = std::abs(M) * std::abs(pw);
        if (mag > last && j > 2) break;  // optimal truncation of the divergent series
        sum += M * pw;
        last = mag;
        if (mag < 1e-18 * std::abs(sum)) break;
    }
    return 2.0 * std::numbers::pi / std::sqrt(3.0) * std::exp(-3.0 * w) * inv * sum;
}

}  // namespace

double kernel_U_asymptotic(double X) {
    if (!(X > 0)) throw DomainError("kernel_U_asymptotic: X must be positive");
    // k = 3 and k = -3 are conjugate, as are k = 1 and k = -1.
    cplx total = 2.0 * asymptotic_term(X, 3);
    if (X < 450) total += 6.0 * asymptotic_term(X, 1);
    return total.real() / std::pow(std::numbers::pi, 1.5);
}

double kernel_U_fast(double X, double c) {
    if (X >= 40) return kernel_U_asymptotic(X);
    KernelQuadrature q;
    q.c = c;
    q.rel_tol = 1e-12;
    return kernel_U(X, q);
}

// ---------------- window ----------------

namespace {

constexpr int kRampGrid = 4096;

double psi_raw(double u) {
    if (u <= 0 || u >= 1) return 0.0;
    return std::exp(-1.0 / (u * (1 - u)));
}

struct RampTable {
    double norm;
    std::vector<double> cumulative;  // int_0^{i/K} psi, unnormalised
    quad::GaussLegendre gl{10};
    RampTable() {
        cumulative.assign(kRampGrid + 1, 0.0);
        simd::CompensatedSum acc;
        for (int i = 0; i < kRampGrid; ++i) {
            const double a = static_cast<double>(i) / kRampGrid, b = static_cast<double>(i + 1) / kRampGrid;
            auto f = [](double u) { return psi_raw(u); };
            acc.add(gl.apply<double>(f, a, b));
            cumulative[i + 1] = acc.value();
        }
        norm = cumulative[kRampGrid];
    }
};

const RampTable& ramp_table() {
    static const RampTable t;
    return t;
}

}  // namespace

double ramp(double u) {
    if (u <= 0) return 0.0;
    if (u >= 1) return 1.0;
    if (u > 0.5) return 1.0 - ramp(1.0 - u);
    const auto& t = ramp_table();
    const int i = static_cast<int>(u * kRampGrid);
    const double a = static_cast<double>(i) / kRampGrid;
    auto f = [](double v) { return psi_raw(v); };
    const double part = u > a ? t.gl.apply<double>(f, a, u) : 0.0;
    return (t.cumulative[static_cast<std::size_t>(i)] + part) / t.norm;
}

double ramp_derivative(double u, int j) {
    if (j == 0) return ramp(u);
    if (u <= 0 || u >= 1) return 0.0;
    const double v = u * (1 - u), v1 = 1 - 2 * u, v2 = -2.0;
    const double g1 = -v1 / (v * v);
    const double g2 = (2 * v1 * v1 - v * v2) / (v * v * v);
    const double g3 = (-6 * v1 * v1 * v1 + 6 * v * v1 * v2) / (v * v * v * v);
    const double psi = psi_raw(u) / ramp_table().norm;
    switch (j) {
        case 1: return psi;
        case 2: return -g1 * psi;
        case 3: return (g1 * g1 - g2) * psi;
        case 4: return (-g1 * g1 * g1 + 3 * g1 * g2 - g3) * psi;
        default: throw DomainError("ramp_derivative: order must be in [0, 4]");
    }
}

SmoothWindow::SmoothWindow(double x, double Y) : x_(x), Y_(Y) {
    if (!(Y >= 1)) throw DomainError("smooth_window: Y must be >= 1");
    if (3 * Y > x) throw DomainError("smooth_window: requires 3Y <= x");
    // Flat part in closed form, ramps by adaptive quadrature.
    auto F = [](double t, int j) {
        const double L = std::log(t);
        switch (j) {
            case 0: return t;
            case 1: return t * (L - 1);
            case 2: return t * (L * L - 2 * L + 2);
            default: return t * (((L - 3) * L + 6) * L - 6);
        }
    };
    for (int j = 0; j <= 3; ++j) {
        const double flat = F(x - Y, j) - F(2 * Y, j);
        auto left = [&](double t) { return ramp((t - Y) / Y) * std::pow(std::log(t), j); };
        auto right = [&](double t) { return ramp((x - t) / Y) * std::pow(std::log(t), j); };
        const double l = quad::integrate<double>(left, Y, 2 * Y, 1e-13, 1e-14);
        const double r = quad::integrate<double>(right, x - Y, x, 1e-13, 1e-14);
        moments_.push_back(flat + l + r);
    }
}

double SmoothWindow::derivative(double t, int j) const {
    if (j < 0 || j > 4) throw DomainError("SmoothWindow: derivative order must be in [0, 4]");
    if (t <= Y_ || t >= x_) return 0.0;
    if (t >= 2 * Y_ && t <= x_ - Y_) return j == 0 ? 1.0 : 0.0;
    const double scale = std::pow(Y_, -j);
    if (t < 2 * Y_) return ramp_derivative((t - Y_) / Y_, j) * scale;
    return ramp_derivative((x_ - t) / Y_, j) * scale * (j % 2 ? -1.0 : 1.0);
}

double SmoothWindow::derivative_constant(int j) {
    double best = 0;
    const int samples = 200000;
    for (int i = 1; i < samples; ++i) best = std::max(best, std::abs(ramp_derivative(static_cast<double>(i) / samples, j)));
    return best;
}

double SmoothWindow::moment(int j) const {
    if (j < 0 || j > 3) throw DomainError("SmoothWindow: moment order must be in [0, 3]");
    return moments_[static_cast<std::size_t>(j)];
}

mainterm::LaurentExpansion SmoothWindow::mellin_laurent() const {
    // t^{s-1} = sum_j (s-1)^j log^j t / j!
    return {0, {moments_[0], moments_[1], moments_[2] / 2.0, moments_[3] / 6.0}};
}

SmoothWindow smooth_window(double x, double Y) { return SmoothWindow(x, Y); }

double dual_frequency(i64 q, u64 n) {
    const double qd = static_cast<double>(q);
    return std::pow(std::numbers::pi, 3) * static_cast<double>(n) / (qd * qd * qd);
}

double w_transform_cutoff(double x, double Y, i64 q) {
    const double qd = static_cast<double>(q);
    return x * x * qd * qd * qd / (Y * Y * Y);
}

double w_transform(i64 q, u64 n, const SmoothWindow& window, const KernelQuadrature& kq) {
    if (q < 1 || n < 1) throw DomainError("w_transform: q and n must be >= 1");
    kq.validate();
    const double N = dual_frequency(q, n);
    const double x = window.x(), Y = window.Y();
    static const quad::GaussLegendre gl(10);
    // Panel ends: ramp boundaries plus local wavelength pi t^{2/3} / N^{1/3} of cos(6 (Nt)^{1/3}).
    const double breaks[] = {Y, 2 * Y, x - Y, x};
    const double cbrtN = std::cbrt(N);
    simd::CompensatedSum acc;
    for (int seg = 0; seg < 3; ++seg) {
        double a = breaks[seg];
        const double end = breaks[seg + 1];
        const double cap = seg == 1 ? std::max(Y, (end - a) / 8) : Y / 8;
        while (a < end) {
            const double lambda = std::numbers::pi * std::pow(a, 2.0 / 3.0) / cbrtN;
            const double b = std::min(end, a + std::min(lambda, cap));
            auto f = [&](double t) {
                const double w = window(t);
                return w == 0.0 ? 0.0 : w * kernel_U_fast(N * t, kq.c);
            };
            acc.add(gl.apply<double>(f, a, b));
            a = b;
        }
    }
    return acc.value();
}

cplx smoothed_delta_direct(const arith::ReducedFraction& point, const SmoothWindow& window,
                           const arith::DivisorTable& table) {
    const double x = window.x();
    if (static_cast<double>(table.limit()) < x) throw DomainError("smoothed_delta_direct: sieve does not cover x");
    if (table.k() != 3) throw DomainError("smoothed_delta_direct: needs a d_3 table");
    const i64 q = point.denominator(), h = point.numerator();
    const arith::PhaseTable phase(q);
    simd::CompensatedComplexSum acc;
    const u64 lo = static_cast<u64>(std::floor(window.Y())) + 1, hi = static_cast<u64>(std::ceil(x));
    for (u64 n = lo; n < hi && n <= table.limit(); ++n) {
        const double w = window(static_cast<double>(n));
        if (w == 0.0) continue;
        acc.add(phase[static_cast<i64>((static_cast<unsigned __int128>(n) * static_cast<u64>(h)) % static_cast<u64>(q))] *
                (static_cast<double>(table[n]) * w));
    }
    // Res_{s=1} W(s) E(s) = sum_j W_j e_{-1-j}
    const auto E = mainterm::expsum_polar(q, 3, 3);
    const auto W = window.mellin_laurent();
    double res = 0;
    for (int j = 0; j <= 2; ++j) res += W.coeff(j) * E.coeff(-1 - j);
    return acc.value() - res;
}

WTransformTable::WTransformTable(i64 q, u64 n_max, const SmoothWindow& window) : q_(q), n_max_(n_max) {
    if (q < 1 || n_max < 1) throw DomainError("WTransformTable: q and n_max must be >= 1");
    const double lam_min = std::log(dual_frequency(q, 1)), lam_max = std::log(dual_frequency(q, n_max));
    // Aliased copies sit at N e^{-+P}; c (P - range) >= 60 buries the small-N one.
    const double P = (lam_max - lam_min) + 60.0 / c_ + 2.0;
    h_ = 2 * std::numbers::pi / P;
    const double logY = std::log(window.Y());
    const double Y = window.Y(), x = window.x();

    std::vector<cplx> B;
    double tau = 2000;
    for (;;) {
        const std::size_t M = static_cast<std::size_t>(std::ceil(tau / h_));
        // v grid over one period [log Y, log Y + P); 2 pi / dv >= 3 tau.
        const std::size_t Lw = fft::next_power_of_two(3 * M + 1);
        const double dv = P / static_cast<double>(Lw);
        std::vector<cplx> g(Lw, cplx{});
        for (std::size_t k = 0; k < Lw; ++k) {
            const double v = logY + static_cast<double>(k) * dv;
            const double t = std::exp(v);
            if (t >= x) break;
            if (t <= Y || (t >= 2 * Y && t <= x - Y)) continue;
            g[k] = window.derivative(t, 1) * std::exp(v * (2 - c_));
        }
        fft::radix2(g, -1);
        B.assign(M + 1, cplx{});
        double peak = 0;
        for (std::size_t j = 0; j <= M; ++j) {
            const double tj = static_cast<double>(j) * h_;
            const cplx s{c_, tj};
            const cplx I = dv * std::polar(1.0, -tj * logY) * g[j];
            const cplx W = -I / (1.0 - s);
            B[j] = gamma_ratio_cubed(s) * W;
            peak = std::max(peak, std::abs(B[j]));
        }
        double tail = 0;
        for (std::size_t j = M - M / 10; j <= M; ++j) tail = std::max(tail, std::abs(B[j]));
        // W carries an FFT roundoff floor near 1e-12 of its peak; the N^{-c} factor damps it further.
        if (tail <= 1e-12 * peak) break;
        if (tau >= 131072) throw CapacityError("WTransformTable: Mellin transform of w decays too slowly");
        tau *= 2;
    }
    const std::size_t M = B.size() - 1;
    tau_max_ = static_cast<double>(M) * h_;
    B[0] *= 0.5;

    // lambda grid: spacing with dlam * tau_max <= pi / 8. Only the window
    // [lam0, lam_max] is needed, so the sum over j is a zoom transform done
    // with Bluestein's chirp (w^{jm} = w^{j^2/2} w^{m^2/2} w^{-(m-j)^2/2}, w = e^{-2 pi i / Lf}).
    const u64 Lf = 16 * (static_cast<u64>(M) + 1);
    dlam_ = P / static_cast<double>(Lf);
    lam0_ = lam_min - 16 * dlam_;
    const std::size_t keep = static_cast<std::size_t>(std::ceil((lam_max - lam0_) / dlam_)) + 16;
    auto chirp = [Lf](u64 j) {
        const u64 r = (j % (2 * Lf)) * (j % (2 * Lf)) % (2 * Lf);
        return std::polar(1.0, -std::numbers::pi * static_cast<double>(r) / static_cast<double>(Lf));
    };
    const std::size_t Lc = fft::next_power_of_two(M + keep + 1);
    std::vector<cplx> a(Lc, cplx{}), b(Lc, cplx{});
    for (std::size_t j = 0; j <= M; ++j)
        a[j] = B[j] * std::polar(1.0, -static_cast<double>(j) * h_ * lam0_) * chirp(j);
    for (std::size_t k = 0; k < keep; ++k) b[k] = std::conj(chirp(k));
    for (std::size_t k = 1; k <= M; ++k) b[Lc - k] = std::conj(chirp(k));
    fft::radix2(a, -1);
    fft::radix2(b, -1);
    for (std::size_t i = 0; i < Lc; ++i) a[i] *= b[i];
    fft::radix2(a, +1);
    F_.resize(keep);
    for (std::size_t m = 0; m < keep; ++m) F_[m] = (chirp(m) * a[m]).real() / static_cast<double>(Lc);
}

double WTransformTable::operator()(u64 n) const {
    if (n < 1 || n > n_max_) throw DomainError("WTransformTable: n outside [1, n_max]");
    const double N = dual_frequency(q_, n);
    const double pos = (std::log(N) - lam0_) / dlam_;
    constexpr int kPts = 24;
    const long first = static_cast<long>(std::floor(pos)) - kPts / 2 + 1;
    // Barycentric Lagrange on equispaced nodes.
    static const auto weights = [] {
        std::array<double, kPts> w{};
        double binom = 1;
        for (int i = 0; i < kPts; ++i) {
            w[static_cast<std::size_t>(i)] = (i % 2 ? -1.0 : 1.0) * binom;
            binom = binom * (kPts - 1 - i) / (i + 1);
        }
        return w;
    }();
    double num = 0, den = 0;
    for (int i = 0; i < kPts; ++i) {
        const double d = pos - static_cast<double>(first + i);
        const double f = F_[static_cast<std::size_t>(first + i)];
        if (d == 0.0) return std::pow(N, -c_) * h_ / std::numbers::pi * f;
        const double t = weights[static_cast<std::size_t>(i)] / d;
        num += t * f;
        den += t;
    }
    return std::pow(N, -c_) * h_ / std::numbers::pi * (num / den);
}

std::vector<double> a_sum_table(const arith::ReducedFraction& point, u64 n_max) {
    const i64 q = point.denominator();
    const expsum::RSumEvaluator ev(q);
    const auto uq = static_cast<u64>(q);
    std::vector<double> R(uq * uq * uq);
    for (i64 a = 0; a < q; ++a)
        for (i64 b = 0; b < q; ++b)
            for (i64 c = 0; c < q; ++c)
                R[static_cast<std::size_t>((a * q + b) * q + c)] = ev({a, b, c}, point.numerator());
    std::vector<double> A(n_max + 1, 0.0);
    for (u64 a = 1; a <= n_max; ++a)
        for (u64 b = 1; a * b <= n_max; ++b) {
            const u64 ab = a * b;
            const double* row = &R[((a % uq) * uq + b % uq) * uq];
            u64 cr = 1 % uq;
            for (u64 n = ab; n <= n_max; n += ab) {
                A[n] += row[cr];
                if (++cr == uq) cr = 0;
            }
        }
    return A;
}

DualSum dual_sum_eval(const arith::ReducedFraction& point, const SmoothWindow& window, u64 n_max, double tol,
                      unsigned threads, u64 n_cap) {
    const i64 q = point.denominator();
    if (q > 20) throw GuardError("dual_sum_eval: q above 20 is too costly for A_{h/q}(n)");
    DualSum out;
    out.cutoff = std::pow(w_transform_cutoff(window.x(), window.Y(), q), 1.1);
    const double scale = std::pow(std::numbers::pi, 1.5) / std::pow(static_cast<double>(q), 3);
    const u64 cut = static_cast<u64>(std::floor(out.cutoff));
    const u64 top = n_max > 0 ? std::max(n_max, cut) : n_cap;
    const WTransformTable wt(q, top, window);
    const auto A = a_sum_table(point, top);
    // Fixed-order compensated sums over [from, to).
    auto block = [&](u64 from, u64 to) {
        const auto terms = parallel_map<double>(static_cast<std::size_t>(to - from), threads, [&](std::size_t i) {
            const u64 n = from + i;
            return A[n] == 0.0 ? 0.0 : A[n] * wt(n);
        });
        simd::CompensatedSum acc;
        for (double t : terms) acc.add(t);
        return acc.value();
    };
    const double first = block(1, cut + 1);
    out.value_at_cutoff = scale * first;
    if (n_max > 0) {
        const double rest = n_max > cut ? block(cut + 1, n_max + 1) : 0.0;
        out.value = scale * (first + rest);
        out.n_used = n_max;
        out.last_block = std::abs(scale * rest);
        out.stability = out.last_block / std::max(std::abs(out.value), 1e-300);
        return out;
    }
    double total = first;
    u64 n = std::max<u64>(cut, 32);
    if (n > cut) total += block(cut + 1, n + 1);
    for (;;) {
        const u64 next = std::min(2 * n, n_cap);
        const double b = block(n + 1, next + 1);
        total += b;
        n = next;
        out.last_block = std::abs(scale * b);
        if (std::abs(b) <= tol * std::abs(total) || n >= n_cap) break;
    }
    out.value = scale * total;
    out.n_used = n;
    out.stability = out.last_block / std::max(std::abs(out.value), 1e-300);
    return out;
}

}  // namespace d3lab::voronoi
