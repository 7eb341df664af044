#include "d3lab/variance.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "d3lab/error.hpp"
#include "d3lab/fft.hpp"
#include "d3lab/mainterm.hpp"
#include "d3lab/parallel.hpp"
#include "d3lab/simd.hpp"

namespace d3lab::variance {

namespace {

void check_args(i64 q, double x, const arith::DivisorTable& table) {
    if (q < 1) throw DomainError("variance: q must be >= 1");
    if (!(x >= 2)) throw DomainError("variance: x must be >= 2");
    if (static_cast<double>(table.limit()) < std::floor(x))
        throw DomainError("variance: sieve limit " + std::to_string(table.limit()) + " is below x");
}

// Q <= x^e with slack for pow rounding, so q = x^{2/3} exactly at x = 1e6 stays inside.
bool at_most(double Q, double x, double e) { return Q <= std::pow(x, e) * (1 + 1e-12); }

double rel_dev(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

std::vector<u64> progression_sums(i64 q, double x, const arith::DivisorTable& table) {
    check_args(q, x, table);
    const u64 top = static_cast<u64>(std::floor(x));
    const u64 uq = static_cast<u64>(q);
    std::vector<u64> S(uq, 0);
    u64 r = 1 % uq;
    for (u64 n = 1; n <= top; ++n) {
        S[r] += table[n];
        if (++r == uq) r = 0;
    }
    return S;
}

std::vector<cplx> delta_all(i64 q, double x, const arith::DivisorTable& table, Transform t) {
    const auto S = progression_sums(q, x, table);
    std::vector<cplx> in(S.size());
    for (std::size_t r = 0; r < S.size(); ++r) in[r] = static_cast<double>(S[r]);
    auto out = t == Transform::Chirp ? fft::dft(in, +1) : fft::direct_dft(in, +1);
    // f depends on a/q only through the reduced denominator.
    std::map<i64, double> f;
    for (i64 a = 0; a < q; ++a) {
        const auto pt = arith::ReducedFraction::reduce(a, q);
        auto it = f.find(pt.denominator());
        if (it == f.end()) it = f.emplace(pt.denominator(), mainterm::mainterm_expsum(pt, x, table.k())).first;
        out[static_cast<std::size_t>(a)] -= it->second;
    }
    return out;
}

double progression_error(i64 q, i64 a, double x, const arith::DivisorTable& table) {
    if (a < 1 || a > q) throw DomainError("progression_error: need 1 <= a <= q");
    const auto S = progression_sums(q, x, table);
    return static_cast<double>(S[static_cast<std::size_t>(a % q)]) - mainterm::mainterm_progression(q, a, x, table.k());
}

std::vector<double> progression_errors(i64 q, double x, const arith::DivisorTable& table) {
    const auto S = progression_sums(q, x, table);
    std::map<i64, double> M;
    std::vector<double> E(S.size());
    for (i64 r = 0; r < q; ++r) {
        const i64 g = r == 0 ? q : std::gcd(r, q);
        auto it = M.find(g);
        if (it == M.end()) it = M.emplace(g, mainterm::mainterm_poly(q, g, table.k()).evaluate(x)).first;
        E[static_cast<std::size_t>(r)] = static_cast<double>(S[static_cast<std::size_t>(r)]) - it->second;
    }
    return E;
}

double bound_thm1(double x, i64 q) { return x * std::pow(static_cast<double>(q), 1.5); }
double bound_thm2(double x, i64 q) { return std::sqrt(x) * std::pow(static_cast<double>(q), 0.75); }

double bound_nguyen(double x, i64 q) {
    const double Q = static_cast<double>(q);
    if (Q < 1) return std::numeric_limits<double>::quiet_NaN();
    if (at_most(Q, x, 0.25)) return std::pow(x, 11.0 / 12.0);
    if (at_most(Q, x, 4.0 / 9.0)) return std::pow(x, 7.0 / 9.0) * std::sqrt(Q);
    if (at_most(Q, x, 0.5)) return x;
    if (at_most(Q, x, 2.0 / 3.0)) return std::pow(x, 5.0 / 6.0) * std::pow(Q, 0.25);
    return std::numeric_limits<double>::quiet_NaN();
}

double bound_bhs(double x, i64 q) {
    const double Q = static_cast<double>(q);
    if (Q < 1) return std::numeric_limits<double>::quiet_NaN();
    if (at_most(Q, x, 1.0 / 6.0)) return std::pow(x, 0.75);
    if (at_most(Q, x, 1.0 / 3.0)) return std::pow(x, 2.0 / 3.0) * std::sqrt(Q);
    if (at_most(Q, x, 0.5)) return std::pow(x, 0.7) * std::pow(Q, 0.4);
    if (Q <= x) return std::pow(x, 0.8) * std::pow(Q, 0.2);
    return std::numeric_limits<double>::quiet_NaN();
}

double bound_blomer_v2(double x) { return x; }
double bound_blomer_v1(double x, i64 q) { return std::sqrt(x * static_cast<double>(q)); }

double divisor_decomposition_check(i64 q, double x, const arith::DivisorTable& table) {
    const auto left_d = delta_all(q, x, table);
    simd::CompensatedSum left;
    for (const auto& d : left_d) left.add(std::norm(d));
    simd::CompensatedSum right;
    for (u64 d : arith::divisors(static_cast<u64>(q))) {
        const i64 di = static_cast<i64>(d);
        const auto level = delta_all(di, x, table);
        for (i64 a = 0; a < di; ++a)
            if (std::gcd(a, di) == 1) right.add(std::norm(level[static_cast<std::size_t>(a)]));
    }
    return rel_dev(left.value(), right.value());
}

VarianceReport variance_report(i64 q, double x, const arith::DivisorTable& table, bool with_decomp) {
    check_args(q, x, table);
    VarianceReport r;
    r.x = x;
    r.q = q;
    r.k = table.k();
    const auto D = delta_all(q, x, table);
    const auto E = progression_errors(q, x, table);
    simd::CompensatedSum v2, v2p, v2e, v1p, v1;
    double dmax = 0, herm = 0;
    for (i64 a = 0; a < q; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const double n2 = std::norm(D[ua]);
        v2.add(n2);
        v2e.add(E[ua] * E[ua]);
        v1.add(std::abs(E[ua]));
        if (std::gcd(a, q) == 1) {
            v2p.add(n2);
            v1p.add(std::abs(E[ua]));
        }
        dmax = std::max(dmax, std::abs(D[ua]));
        herm = std::max(herm, std::abs(D[static_cast<std::size_t>((q - a) % q)] - std::conj(D[ua])));
    }
    r.V2_all = v2.value();
    r.V2_prim = v2p.value();
    r.V2_E = v2e.value();
    r.V1_prim = v1p.value();
    r.V1_all = v1.value();
    r.hermitian_dev = dmax == 0 ? 0.0 : herm / dmax;
    r.parseval_dev = rel_dev(r.V2_E * static_cast<double>(q), r.V2_all);
    if (r.k == 3) {
        r.bound_thm1 = bound_thm1(x, q);
        r.bound_thm2 = bound_thm2(x, q);
        r.bound_nguyen = bound_nguyen(x, q);
    } else {
        r.bound_thm1 = bound_blomer_v2(x);
        r.bound_thm2 = bound_blomer_v1(x, q);
        r.bound_nguyen = bound_bhs(x, q);
    }
    r.bound_bhs = bound_bhs(x, q);
    r.ratio2 = r.V2_all / r.bound_thm1;
    r.ratio1 = r.V1_prim / r.bound_thm2;
    r.ratio1_all = r.V1_all / r.bound_thm2;
    r.decomp_dev = with_decomp ? divisor_decomposition_check(q, x, table) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols = {"x",           "q",          "V2_all",       "V2_prim",     "V2_E",
                                                  "V1_prim",     "bound_thm1", "bound_thm2",   "bound_nguyen", "ratio2",
                                                  "ratio1",      "parseval_dev", "decomp_dev"};
    return cols;
}

std::vector<report::Cell> report_row(const VarianceReport& r) {
    return {r.x,          static_cast<std::int64_t>(r.q), r.V2_all, r.V2_prim, r.V2_E,         r.V1_prim, r.bound_thm1,
            r.bound_thm2, r.bound_nguyen, r.ratio2, r.ratio1, r.parseval_dev, r.decomp_dev};
}

ScanFit fit_log_ratio(const std::vector<VarianceReport>& rows, bool use_ratio1) {
    if (rows.size() < 3) throw DomainError("fit_log_ratio: need at least 3 rows");
    // Normal equations for (1, log x, log q).
    double A[3][3] = {}, b[3] = {};
    for (const auto& r : rows) {
        const double v[3] = {1.0, std::log(r.x), std::log(static_cast<double>(r.q))};
        const double y = std::log(use_ratio1 ? r.ratio1 : r.ratio2);
        for (int i = 0; i < 3; ++i) {
            b[i] += v[i] * y;
            for (int j = 0; j < 3; ++j) A[i][j] += v[i] * v[j];
        }
    }
    // Gaussian elimination with partial pivoting.
    for (int c = 0; c < 3; ++c) {
        int p = c;
        for (int i = c + 1; i < 3; ++i)
            if (std::abs(A[i][c]) > std::abs(A[p][c])) p = i;
        std::swap(A[c], A[p]);
        std::swap(b[c], b[p]);
        if (std::abs(A[c][c]) < 1e-300) throw DomainError("fit_log_ratio: grid does not separate log x and log q");
        for (int i = c + 1; i < 3; ++i) {
            const double m = A[i][c] / A[c][c];
            for (int j = c; j < 3; ++j) A[i][j] -= m * A[c][j];
            b[i] -= m * b[c];
        }
    }
    double s[3];
    for (int i = 2; i >= 0; --i) {
        double acc = b[i];
        for (int j = i + 1; j < 3; ++j) acc -= A[i][j] * s[j];
        s[i] = acc / A[i][i];
    }
    return {s[0], s[1], s[2]};
}

std::vector<std::pair<double, i64>> default_grid() {
    std::vector<std::pair<double, i64>> g;
    for (double x : {1e4, 1e5, 1e6})
        for (double e : {1.0 / 3.0, 0.5, 2.0 / 3.0}) {
            // ceil with a guard against x^{1/3} landing a hair above an integer
            const double v = std::pow(x, e);
            const double r = std::round(v);
            g.emplace_back(x, static_cast<i64>(std::abs(v - r) < 1e-9 * v ? r : std::ceil(v)));
        }
    return g;
}

std::vector<std::pair<double, i64>> dense_grid(double x, i64 q_lo, i64 q_hi) {
    std::vector<std::pair<double, i64>> g;
    for (i64 q = q_lo; q <= q_hi; ++q) g.emplace_back(x, q);
    return g;
}

ScanResult exponent_scan(const std::vector<std::pair<double, i64>>& grid, const arith::DivisorTable& table,
                         unsigned threads, bool with_decomp) {
    ScanResult out;
    out.rows = parallel_map<VarianceReport>(grid.size(), threads, [&](std::size_t i) {
        return variance_report(grid[i].second, grid[i].first, table, with_decomp);
    });
    if (out.rows.size() >= 3) {
        out.fit2 = fit_log_ratio(out.rows, false);
        out.fit1 = fit_log_ratio(out.rows, true);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& r : out.rows) {
        const double c = r.V2_all / (r.bound_thm1 * std::pow(1 + std::log(r.x), 6));
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    out.thm1_constant = hi;
    out.thm1_spread = out.rows.empty() ? 0.0 : hi / lo;
    return out;
}

}  // namespace d3lab::variance
