#include "d3lab/mainterm.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <quadmath.h>
#include <string>

#include "d3lab/error.hpp"

namespace d3lab::mainterm {

LaurentExpansion::LaurentExpansion(int lo, std::vector<double> coeffs) : lo_(lo), c_(std::move(coeffs)) {
    if (c_.empty()) throw DomainError("LaurentExpansion: at least one coefficient required");
}

int LaurentExpansion::pole_order() const noexcept {
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (c_[i] != 0.0) return std::max(0, -(lo_ + static_cast<int>(i)));
    return 0;
}

double LaurentExpansion::coeff(int j) const {
    if (j < lo_) return 0.0;
    if (j > hi()) throw DomainError("LaurentExpansion: coefficient " + std::to_string(j) + " beyond truncation order");
    return c_[static_cast<std::size_t>(j - lo_)];
}

LaurentExpansion LaurentExpansion::operator*(const LaurentExpansion& o) const {
    const int lo = lo_ + o.lo_;
    const int top = std::min(hi() + o.lo_, o.hi() + lo_);
    std::vector<double> out(static_cast<std::size_t>(top - lo + 1), 0.0);
    for (int i = lo_; i <= hi(); ++i)
        for (int j = o.lo_; j <= o.hi(); ++j)
            if (i + j <= top) out[static_cast<std::size_t>(i + j - lo)] += coeff(i) * o.coeff(j);
    return {lo, std::move(out)};
}

LaurentExpansion LaurentExpansion::operator+(const LaurentExpansion& o) const {
    const int lo = std::min(lo_, o.lo_);
    const int top = std::min(hi(), o.hi());
    std::vector<double> out(static_cast<std::size_t>(top - lo + 1), 0.0);
    for (int j = lo; j <= top; ++j) out[static_cast<std::size_t>(j - lo)] = coeff(j) + o.coeff(j);
    return {lo, std::move(out)};
}

LaurentExpansion LaurentExpansion::operator*(double s) const {
    auto c = c_;
    for (auto& v : c) v *= s;
    return {lo_, std::move(c)};
}

LaurentExpansion LaurentExpansion::shifted(int k) const { return {lo_ + k, c_}; }

LaurentExpansion LaurentExpansion::truncated(int j) const {
    if (j < lo_) throw DomainError("LaurentExpansion: truncation below the leading order");
    if (j >= hi()) return *this;
    return {lo_, std::vector<double>(c_.begin(), c_.begin() + (j - lo_ + 1))};
}

std::complex<double> LaurentExpansion::evaluate(std::complex<double> u) const {
    std::complex<double> s{};
    for (int j = hi(); j >= lo_; --j) s += c_[static_cast<std::size_t>(j - lo_)] * std::pow(u, j);
    return s;
}

namespace {

using quad = __float128;

// Bernoulli numbers B_0..B_n from the standard recurrence.
std::vector<quad> bernoulli(int n) {
    std::vector<quad> b(static_cast<std::size_t>(n) + 1, 0);
    b[0] = 1;
    for (int m = 1; m <= n; ++m) {
        quad s = 0, binom = 1;  // C(m+1, j)
        for (int j = 0; j < m; ++j) {
            s += binom * b[static_cast<std::size_t>(j)];
            binom = binom * (m + 1 - j) / (j + 1);
        }
        b[static_cast<std::size_t>(m)] = -s / (m + 1);
    }
    return b;
}

// gamma_n = sum_{k<N} f(k) - log^{n+1}N/(n+1) + f(N)/2 - sum_j B_2j/(2j)! f^(2j-1)(N),
// f(x) = log^n(x)/x, in quad precision so the partial sums do not cancel away.
quad stieltjes_em(int n, int N, int terms, const std::vector<quad>& B) {
    const quad L = logq(static_cast<quad>(N));
    quad s = 0;
    for (int k = 2; k < N; ++k) s += powq(logq(static_cast<quad>(k)), n) / k;
    if (n == 0) s += 1;
    s -= powq(L, n + 1) / (n + 1);
    s += powq(L, n) / N / 2;
    // f^(r)(x) = x^{-1-r} P_r(log x) with P_0 = L^n and P_{r+1} = -(1+r) P_r + P_r'.
    std::vector<quad> P(static_cast<std::size_t>(n) + 1, 0);
    P[static_cast<std::size_t>(n)] = 1;
    quad fact = 1;  // (2j)!
    int r = 0;
    for (int j = 1; j <= terms; ++j) {
        while (r < 2 * j - 1) {
            std::vector<quad> next(P.size(), 0);
            for (std::size_t i = 0; i < P.size(); ++i) {
                next[i] += -(1 + r) * P[i];
                if (i > 0) next[i - 1] += static_cast<quad>(i) * P[i];
            }
            P.swap(next);
            ++r;
        }
        quad poly = 0;
        for (std::size_t i = P.size(); i-- > 0;) poly = poly * L + P[i];
        fact *= static_cast<quad>(2 * j - 1) * (2 * j);
        s -= B[static_cast<std::size_t>(2 * j)] / fact * poly * powq(static_cast<quad>(N), -1 - r);
    }
    return s;
}

}  // namespace

const std::vector<long double>& stieltjes_constants(int count) {
    static std::mutex mu;
    static std::vector<long double> cache;
    std::lock_guard lock(mu);
    if (static_cast<int>(cache.size()) < count) {
        const int terms = 20;
        const auto B = bernoulli(2 * terms);
        cache.clear();
        for (int n = 0; n < count; ++n) cache.push_back(static_cast<long double>(stieltjes_em(n, 60 + 8 * n, terms, B)));
    }
    return cache;
}

LaurentExpansion zeta_laurent(int J) {
    if (J < 0) throw DomainError("zeta_laurent: J must be >= 0");
    const auto& g = stieltjes_constants(std::max(24, J + 1));
    std::vector<double> c(static_cast<std::size_t>(J) + 2);
    c[0] = 1.0;
    long double fact = 1.0L;
    for (int n = 0; n <= J; ++n) {
        if (n > 0) fact *= n;
        c[static_cast<std::size_t>(n) + 1] = static_cast<double>((n % 2 ? -1.0L : 1.0L) * g[static_cast<std::size_t>(n)] / fact);
    }
    return {-1, std::move(c)};
}

LaurentExpansion zeta_power_laurent(int k, int J) {
    if (k < 1) throw DomainError("zeta_power_laurent: k must be >= 1");
    const auto z = zeta_laurent(J + k - 1);
    LaurentExpansion out = z;
    for (int i = 1; i < k; ++i) out = out * z;
    return out.truncated(J);
}

LaurentExpansion zeta3_laurent(int J) {
    if (J > 4) throw DomainError("zeta3_laurent: J must be <= 4");
    return zeta_power_laurent(3, J);
}

LaurentExpansion exp_series(double c, int J) {
    std::vector<double> out(static_cast<std::size_t>(J) + 1);
    double t = 1.0;
    for (int j = 0; j <= J; ++j) {
        out[static_cast<std::size_t>(j)] = t;
        t *= c / (j + 1);
    }
    return {0, std::move(out)};
}

namespace {

void check_args(i64 q, i64 delta, int k) {
    if (q < 1) throw DomainError("restricted series: q must be >= 1");
    if (delta < 1 || q % delta != 0)
        throw DomainError("restricted series: delta = " + std::to_string(delta) + " does not divide q = " + std::to_string(q));
    if (k < 2 || k > 4) throw DomainError("restricted series: k must be in [2, 4]");
}

int valuation(u64 n, u64 p) {
    int e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

// Local factor as a polynomial in X = p^{-s}: sum_i poly[i] X^i.
std::vector<double> local_polynomial(u64 p, int e, bool exact_valuation, int k) {
    const auto dk = [k](int j) { return static_cast<double>(arith::binomial(static_cast<u64>(j + k - 1), static_cast<u64>(k - 1))); };
    std::vector<double> poly(static_cast<std::size_t>(k) + 1, 0.0);
    if (exact_valuation) {
        // d_k(p^e) (1 - X)^k
        for (int l = 0; l <= k; ++l)
            poly[static_cast<std::size_t>(l)] = dk(e) * (l % 2 ? -1.0 : 1.0) * static_cast<double>(arith::binomial(static_cast<u64>(k), static_cast<u64>(l)));
    } else {
        // (1 - X)^k sum_j d_k(p^{e+j}) X^j, a polynomial of degree < k.
        (void)p;
        for (int i = 0; i < k; ++i) {
            double s = 0.0;
            for (int l = 0; l <= i; ++l)
                s += (l % 2 ? -1.0 : 1.0) * static_cast<double>(arith::binomial(static_cast<u64>(k), static_cast<u64>(l))) * dk(e + i - l);
            poly[static_cast<std::size_t>(i)] = s;
        }
    }
    return poly;
}

struct LocalData {
    u64 p;
    std::vector<double> poly;
};

std::vector<LocalData> local_factors(i64 q, i64 delta, int k) {
    std::vector<LocalData> out;
    const u64 qq = static_cast<u64>(q), dd = static_cast<u64>(delta);
    for (const auto& pe : arith::factorize(qq)) {
        const int e = valuation(dd, pe.prime);
        const bool exact = e < pe.exponent;  // p divides q / delta
        out.push_back({pe.prime, local_polynomial(pe.prime, e, exact, k)});
    }
    return out;
}

}  // namespace

LaurentExpansion restricted_series_laurent(i64 q, i64 delta, int k, int J) {
    check_args(q, delta, k);
    const int T = J + k;
    // delta^{-s} = delta^{-1} exp(-(s-1) log delta)
    LaurentExpansion rest = exp_series(-std::log(static_cast<double>(delta)), T) * (1.0 / static_cast<double>(delta));
    for (const auto& lf : local_factors(q, delta, k)) {
        const double lp = std::log(static_cast<double>(lf.p));
        std::vector<double> taylor(static_cast<std::size_t>(T) + 1, 0.0);
        for (std::size_t i = 0; i < lf.poly.size(); ++i) {
            if (lf.poly[i] == 0.0) continue;
            // X^i = p^{-i} exp(-i (s-1) log p)
            const auto e = exp_series(-static_cast<double>(i) * lp, T);
            const double scale = lf.poly[i] * std::pow(static_cast<double>(lf.p), -static_cast<double>(i));
            for (int j = 0; j <= T; ++j) taylor[static_cast<std::size_t>(j)] += scale * e.coeff(j);
        }
        rest = rest * LaurentExpansion(0, std::move(taylor));
    }
    return (zeta_power_laurent(k, J) * rest).truncated(J);
}

std::complex<double> restricted_series_at(i64 q, i64 delta, std::complex<double> s, std::complex<double> zeta_s, int k) {
    check_args(q, delta, k);
    std::complex<double> v = std::pow(zeta_s, k) * std::exp(-s * std::log(static_cast<double>(delta)));
    for (const auto& lf : local_factors(q, delta, k)) {
        const std::complex<double> X = std::exp(-s * std::log(static_cast<double>(lf.p)));
        std::complex<double> f{}, xp{1.0, 0.0};
        for (double c : lf.poly) {
            f += c * xp;
            xp *= X;
        }
        v *= f;
    }
    return v;
}

double residue_xs(const LaurentExpansion& F, double x) {
    if (F.lo() < -3) throw DomainError("residue_xs: pole order above 3");
    // G = F / s = F / (1 + u)
    std::vector<double> geo(static_cast<std::size_t>(std::max(0, -F.lo())) + 1);
    for (std::size_t j = 0; j < geo.size(); ++j) geo[j] = j % 2 ? -1.0 : 1.0;
    const LaurentExpansion G = F * LaurentExpansion(0, geo);
    const double L = std::log(x);
    double res = 0.0, pw = 1.0, fact = 1.0;
    for (int j = 0; j <= -1 - G.lo(); ++j) {
        res += G.coeff(-1 - j) * pw / fact;
        pw *= L;
        fact *= j + 1;
    }
    return res;
}

double MainTermPoly::evaluate(double x) const {
    const double L = std::log(x);
    return x * ((A2 * L + A1) * L + A0);
}

namespace {

MainTermPoly poly_from(const LaurentExpansion& F, i64 q, i64 delta, int k, double weight) {
    std::vector<double> geo{1.0, -1.0, 1.0, -1.0};
    const LaurentExpansion G = F * LaurentExpansion(0, geo);
    MainTermPoly m;
    m.q = q;
    m.delta = delta;
    m.k = k;
    m.A2 = G.coeff(-3) / 2.0 * weight;
    m.A1 = G.coeff(-2) * weight;
    m.A0 = G.coeff(-1) * weight;
    return m;
}

}  // namespace

MainTermPoly mainterm_poly(i64 q, i64 delta, int k) {
    const auto D = restricted_series_laurent(q, delta, k, 3);
    return poly_from(D, q, delta, k, 1.0 / static_cast<double>(arith::euler_phi(static_cast<u64>(q / delta))));
}

double mainterm_progression(i64 q, i64 a, double x, int k) {
    if (q < 1) throw DomainError("mainterm_progression: q must be >= 1");
    if (x < 2) throw DomainError("mainterm_progression: x must be >= 2");
    const i64 r = arith::mod(a, q);
    const i64 delta = r == 0 ? q : std::gcd(r, q);
    return mainterm_poly(q, delta, k).evaluate(x);
}

LaurentExpansion expsum_polar(i64 q, int k, int J) {
    if (q < 1) throw DomainError("expsum_polar: q must be >= 1");
    LaurentExpansion total;
    bool first = true;
    for (u64 d : arith::divisors(static_cast<u64>(q))) {
        const i64 delta = static_cast<i64>(d);
        const u64 rest = static_cast<u64>(q) / d;
        const int mu = arith::mobius(rest);
        if (mu == 0) continue;
        const auto term = restricted_series_laurent(q, delta, k, J) * (mu / static_cast<double>(arith::euler_phi(rest)));
        total = first ? term : total + term;
        first = false;
    }
    return total;
}

MainTermPoly expsum_poly(i64 q, int k) { return poly_from(expsum_polar(q, k, 3), q, 0, k, 1.0); }

double mainterm_expsum(const arith::ReducedFraction& point, double x, int k) {
    return expsum_poly(point.denominator(), k).evaluate(x);
}

double laurent_residue(i64 q, i64 delta, double x, int k) {
    return residue_xs(restricted_series_laurent(q, delta, k, 3), x);
}

double contour_residue(i64 q, i64 delta, double x, int k, int points, double radius) {
    check_args(q, delta, k);
    const auto z = zeta_laurent(20);
    const double L = std::log(x);
    std::complex<double> acc{};
    for (int j = 0; j < points; ++j) {
        const double th = 2.0 * std::numbers::pi * (j + 0.5) / points;
        const std::complex<double> u = std::polar(radius, th);
        const std::complex<double> s = 1.0 + u;
        const auto D = restricted_series_at(q, delta, s, z.evaluate(u), k);
        // (1/2 pi i) oint g du with du = i u dtheta  ->  mean of g(u) u
        acc += D * std::exp(u * L) / s * u;
    }
    return (acc / static_cast<double>(points)).real();
}

}  // namespace d3lab::mainterm
