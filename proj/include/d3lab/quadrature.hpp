#pragma once

// Globally adaptive Gauss-Kronrod (7/15) and fixed Gauss-Legendre rules.
// Subdivision order is fully deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <tuple>
#include <utility>
#include <vector>

#include "d3lab/error.hpp"

namespace d3lab::quad {

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T, class F>
Result<T> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const T fc = f(c);
    T kron = fc * kWgk[7];
    T gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const T f1 = f(c - dx), f2 = f(c + dx);
        kron += (f1 + f2) * kWgk[j];
        if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
    }
    Result<T> r;
    r.value = kron * h;
    r.error = magnitude((kron - gauss) * h);
    r.evaluations = 15;
    return r;
}

}  // namespace detail

// Integrates f over [a, b] until the summed error estimate is below
// max(abs_tol, rel_tol * |value|) or max_intervals is hit. Never throws;
// check Result::converged.
template <class T, class F>
Result<T> gauss_kronrod(F f, double a, double b, double abs_tol, double rel_tol, int max_intervals = 4000) {
    struct Piece {
        double lo, hi;
        Result<T> r;
    };
    std::vector<Piece> pieces{{a, b, detail::gk15<T>(f, a, b)}};
    int evals = 15;
    auto totals = [&pieces] {
        T v{};
        double e = 0.0;
        for (const auto& p : pieces) {
            v += p.r.value;
            e += p.r.error;
        }
        return std::pair<T, double>{v, e};
    };
    T total{};
    double total_err = 0.0;
    std::tie(total, total_err) = totals();
    auto done = [&] { return total_err <= std::max(abs_tol, rel_tol * detail::magnitude(total)); };
    while (!done() && static_cast<int>(pieces.size()) < max_intervals) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < pieces.size(); ++i)
            if (pieces[i].r.error > pieces[worst].r.error) worst = i;
        const Piece p = pieces[worst];
        const double mid = 0.5 * (p.lo + p.hi);
        if (!(mid > p.lo && mid < p.hi)) break;
        pieces[worst] = {p.lo, mid, detail::gk15<T>(f, p.lo, mid)};
        pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(worst) + 1, Piece{mid, p.hi, detail::gk15<T>(f, mid, p.hi)});
        evals += 30;
        std::tie(total, total_err) = totals();
    }
    Result<T> out;
    out.value = total;
    out.error = total_err;
    out.evaluations = evals;
    out.converged = done();
    return out;
}

// Same, but throws QuadratureError on failure.
template <class T, class F>
T integrate(F f, double a, double b, double abs_tol, double rel_tol, int max_intervals = 4000) {
    auto r = gauss_kronrod<T>(f, a, b, abs_tol, rel_tol, max_intervals);
    if (!r.converged) throw QuadratureError("adaptive quadrature did not converge", r.error);
    return r.value;
}

// n-point Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
public:
    explicit GaussLegendre(int n);
    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    template <class T, class F>
    T apply(F& f, double a, double b) const {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        T s{};
        for (std::size_t i = 0; i < nodes_.size(); ++i) s += f(c + h * nodes_[i]) * weights_[i];
        return s * h;
    }

private:
    std::vector<double> nodes_, weights_;
};

}  // namespace d3lab::quad
