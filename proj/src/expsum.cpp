#include "d3lab/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "d3lab/error.hpp"
#include "d3lab/parallel.hpp"
#include "d3lab/simd.hpp"

namespace d3lab::expsum {

using arith::mod;

namespace {

void guard(i64 q, i64 limit, bool force, const char* op, const char* alternative) {
    if (q < 1) throw DomainError(std::string(op) + ": q must be >= 1");
    if (!force && q > limit)
        throw GuardError(std::string(op) + ": q = " + std::to_string(q) + " exceeds the cost guard " +
                         std::to_string(limit) + "; " + alternative + " or pass force");
}

i64 gcd3(i64 a, i64 b, i64 c) { return std::gcd(std::gcd(a, b), c); }

// gcd(q, n) with gcd(q, 0) = q.
i64 gcd_q(i64 q, i64 n) {
    const i64 r = mod(n, q);
    return r == 0 ? q : std::gcd(r, q);
}

}  // namespace

double integer_tolerance(double abs_term_sum) {
    return 1e-6 + 64.0 * std::numeric_limits<double>::epsilon() * abs_term_sum;
}

double round_integer(cplx v, double tol, const char* what) {
    const double r = std::round(v.real());
    if (std::abs(v.imag()) > tol || std::abs(v.real() - r) > tol)
        throw CheckFailure(std::string(what) + ": value (" + std::to_string(v.real()) + ", " +
                           std::to_string(v.imag()) + ") is not within " + std::to_string(tol) + " of an integer");
    return r == 0.0 ? 0.0 : r;
}

cplx r_sum_bruteforce(const Triple& t, const ReducedFraction& point, bool force) {
    const i64 q = point.denominator();
    guard(q, kBruteForceMaxQ, force, "r_sum_bruteforce", "use r_sum_fast");
    const i64 h = point.numerator();
    const i64 a = mod(t.a, q), b = mod(t.b, q), c = mod(t.c, q);
    const arith::PhaseTable phase(q);
    simd::CompensatedComplexSum acc;
    for (i64 x = 0; x < q; ++x) {
        for (i64 y = 0; y < q; ++y) {
            const i64 base = (a * x + b * y) % q;
            const i64 hxy = (h * x % q) * y % q;
            const i64 step = mod(c - hxy, q);
            i64 arg = base;
            cplx row{};
            for (i64 z = 0; z < q; ++z) {
                row += phase[arg];
                arg += step;
                if (arg >= q) arg -= q;
            }
            acc.add(row);
        }
    }
    const cplx v = acc.value();
    if (std::abs(v.imag()) > 1e-6)
        throw CheckFailure("r_sum_bruteforce: imaginary part " + std::to_string(v.imag()) + " is not negligible");
    return {v.real(), 0.0};
}

std::vector<double> r_sum_table(i64 h, i64 q) {
    if (q < 1) throw DomainError("r_sum_table: q must be >= 1");
    if (q > 64) throw GuardError("r_sum_table: q = " + std::to_string(q) + " exceeds the table guard 64");
    h = mod(h, q);
    if (std::gcd(h, q) != 1 && q > 1) throw DomainError("r_sum_table: h must be coprime to q");
    const std::size_t n = static_cast<std::size_t>(q);
    const arith::PhaseTable phase(q);
    std::vector<cplx> table(n * n * n, cplx{});
    std::vector<cplx> g(n * n);
    for (i64 x = 0; x < q; ++x) {
        // g[b][c] = q * sum_{y : hxy = c} e(by/q)
        std::fill(g.begin(), g.end(), cplx{});
        for (i64 y = 0; y < q; ++y) {
            const std::size_t c = static_cast<std::size_t>((h * x % q) * y % q);
            for (i64 b = 0; b < q; ++b) g[static_cast<std::size_t>(b) * n + c] += phase[b * y % q];
        }
        for (i64 a = 0; a < q; ++a) {
            const cplx w = phase[a * x % q] * static_cast<double>(q);
            cplx* dst = table.data() + static_cast<std::size_t>(a) * n * n;
            for (std::size_t j = 0; j < n * n; ++j) dst[j] += w * g[j];
        }
    }
    std::vector<double> out(table.size());
    for (std::size_t j = 0; j < table.size(); ++j) {
        if (std::abs(table[j].imag()) > 1e-6) throw CheckFailure("r_sum_table: imaginary part not negligible");
        out[j] = table[j].real();
    }
    return out;
}

RSumEvaluator::RSumEvaluator(i64 q) : q_(q) {
    if (q < 1) throw DomainError("RSumEvaluator: q must be >= 1");
    for (u64 d : arith::divisors(static_cast<u64>(q))) {
        Level lv;
        lv.delta = static_cast<i64>(d);
        lv.sub = q / lv.delta;
        lv.cosines.resize(static_cast<std::size_t>(lv.sub));
        for (i64 j = 0; j < lv.sub; ++j) lv.cosines[static_cast<std::size_t>(j)] = arith::unit_phase(j, lv.sub).real();
        lv.inverse.assign(static_cast<std::size_t>(lv.sub), 0);
        for (i64 x = 0; x < lv.sub; ++x) {
            if (std::gcd(x, lv.sub) != 1) continue;
            lv.units.push_back(x);
            lv.inverse[static_cast<std::size_t>(x)] = lv.sub == 1 ? 0 : arith::mod_inverse(x, lv.sub);
        }
        levels_.push_back(std::move(lv));
    }
}

double RSumEvaluator::kloosterman_real(const Level& lv, i64 m, i64 n) const {
    // S(m, n; sub) is real; sum the cosines only.
    double s = 0.0;
    const i64 sub = lv.sub;
    for (i64 x : lv.units) {
        const i64 arg = (m * x + n * lv.inverse[static_cast<std::size_t>(x)]) % sub;
        s += lv.cosines[static_cast<std::size_t>(arg)];
    }
    return s;
}

double RSumEvaluator::operator()(const Triple& t, i64 h) const {
    const i64 q = q_;
    const i64 a = mod(t.a, q), b = mod(t.b, q), c = mod(t.c, q);
    h = mod(h, q);
    if (q > 1 && std::gcd(h, q) != 1) throw DomainError("r_sum_fast: h must be coprime to q");
    if (b == 0 && c == 0) return static_cast<double>(r_sum_degenerate(a, q));
    const i64 g = gcd3(q, b, c);
    double total = 0.0;
    for (const Level& lv : levels_) {
        if (g % lv.delta != 0) continue;
        const i64 sub = lv.sub;
        const i64 hbar = sub == 1 ? 0 : lv.inverse[static_cast<std::size_t>(h % sub)];
        const i64 bc = ((b / lv.delta) % sub) * ((c / lv.delta) % sub) % sub;
        const i64 n = bc * hbar % sub;
        total += static_cast<double>(lv.delta) * kloosterman_real(lv, a % sub, n);
    }
    return static_cast<double>(q) * total;
}

i64 r_sum_degenerate(i64 a, i64 q) {
    if (q < 1) throw DomainError("r_sum_degenerate: q must be >= 1");
    const i64 g = gcd_q(q, a);
    i64 s = 0;
    for (u64 d : arith::divisors(static_cast<u64>(g)))
        s += static_cast<i64>(d) * static_cast<i64>(arith::euler_phi(static_cast<u64>(q) / d));
    return q * s;
}

cplx r_sum_fast(const Triple& t, const ReducedFraction& point) {
    const RSumEvaluator ev(point.denominator());
    return {ev(t, point.numerator()), 0.0};
}

cplx a_sum(const ReducedFraction& point, u64 n) {
    if (n < 1) throw DomainError("a_sum: n must be >= 1");
    const i64 q = point.denominator();
    const RSumEvaluator ev(q);
    simd::CompensatedSum acc;
    for (const auto& tr : arith::ordered_triples(n)) {
        const Triple t{static_cast<i64>(tr[0] % static_cast<u64>(q)), static_cast<i64>(tr[1] % static_cast<u64>(q)),
                       static_cast<i64>(tr[2] % static_cast<u64>(q))};
        acc.add(ev(t, point.numerator()));
    }
    return {acc.value(), 0.0};
}

namespace {

double correlation_with(const RSumEvaluator& ev, const Triple& t, const Triple& t2) {
    const i64 q = ev.modulus();
    simd::CompensatedSum acc;
    double abs_sum = 0.0;
    for (i64 h = 0; h < q; ++h) {
        if (std::gcd(h, q) != 1) continue;
        const double term = ev(t, h) * ev(t2, h);
        acc.add(term);
        abs_sum += std::abs(term);
    }
    return round_integer({acc.value(), 0.0}, integer_tolerance(abs_sum), "correlation_sum");
}

}  // namespace

cplx correlation_sum(const Triple& t, const Triple& t2, i64 q, bool force) {
    guard(q, kCorrelationMaxQ, force, "correlation_sum", "reduce q");
    const RSumEvaluator ev(q);
    return {correlation_with(ev, t, t2), 0.0};
}

Lemma2Report lemma2_check(i64 q1, i64 q2, const Triple& t, const Triple& t2) {
    if (q1 < 1 || q2 < 1) throw DomainError("lemma2_check: moduli must be >= 1");
    if (std::gcd(q1, q2) != 1) throw DomainError("lemma2_check: moduli must be coprime");
    Lemma2Report r;
    r.q1 = q1;
    r.q2 = q2;
    r.t = t;
    r.t2 = t2;
    const i64 q = q1 * q2;
    r.s12 = correlation_sum(t, t2, q).real();
    r.s1 = correlation_sum(t, t2, q1).real();
    r.s2 = correlation_sum(t, t2, q2).real();
    r.abs_dev = std::abs(r.s12 - r.s1 * r.s2);
    r.rel_dev = r.abs_dev / (1.0 + std::abs(r.s12));
    r.multiplicative = r.abs_dev <= 1e-6 * (1.0 + std::abs(r.s12));

    // Splitting identity R((h q2 + h2 q1)/(q1 q2)) = R(h q2^3 / q1) R(h2 q1^3 / q2).
    const RSumEvaluator ev(q), ev1(q1), ev2(q2);
    const i64 q2c = q2 % q1 * (q2 % q1) % q1 * (q2 % q1) % q1;
    const i64 q1c = q1 % q2 * (q1 % q2) % q2 * (q1 % q2) % q2;
    r.split_ok = true;
    for (const Triple& tt : {t, t2}) {
        for (i64 h = 0; h < q1; ++h) {
            if (std::gcd(h, q1) != 1) continue;
            for (i64 h2 = 0; h2 < q2; ++h2) {
                if (std::gcd(h2, q2) != 1) continue;
                const double lhs = ev(tt, (h * q2 + h2 * q1) % q);
                const double rhs = ev1(tt, h * q2c % q1) * ev2(tt, h2 * q1c % q2);
                const double dev = std::abs(lhs - rhs);
                r.split_max_dev = std::max(r.split_max_dev, dev);
                if (dev > 1e-6 * (1.0 + std::abs(lhs))) r.split_ok = false;
                ++r.split_pairs;
            }
        }
    }
    return r;
}

std::vector<Lemma2Report> lemma2_scan(i64 max_product, std::size_t per_pair, u64 seed, unsigned threads) {
    if (max_product > kCorrelationMaxQ) throw GuardError("lemma2_scan: q1 q2 above the correlation guard");
    struct Job {
        i64 q1, q2;
        Triple t, t2;
    };
    std::vector<Job> jobs;
    std::mt19937_64 rng(seed);
    for (i64 q1 = 2; q1 * (q1 + 1) <= max_product; ++q1)
        for (i64 q2 = q1 + 1; q1 * q2 <= max_product; ++q2) {
            if (std::gcd(q1, q2) != 1) continue;
            const u64 span = static_cast<u64>(2 * q1 * q2);
            auto draw = [&] { return static_cast<i64>(1 + rng() % span); };
            for (std::size_t i = 0; i < per_pair; ++i) {
                Job j{q1, q2, {}, {}};
                j.t = {draw(), draw(), draw()};
                j.t2 = {draw(), draw(), draw()};
                jobs.push_back(j);
            }
        }
    return parallel_map<Lemma2Report>(jobs.size(), threads, [&](std::size_t i) {
        return lemma2_check(jobs[i].q1, jobs[i].q2, jobs[i].t, jobs[i].t2);
    });
}

cplx calS_bruteforce(i64 a, i64 a2, i64 b, i64 b2, i64 q, bool force) {
    guard(q, kCalSMaxQ, force, "calS_bruteforce", "use calS_closed_form for prime powers");
    a = mod(a, q);
    a2 = mod(a2, q);
    b = mod(b, q);
    b2 = mod(b2, q);
    const auto ctab = arith::ramanujan_table(q);
    const arith::PhaseTable phase(q);
    std::vector<i64> units;
    for (i64 x = 1; x <= q; ++x)
        if (std::gcd(x, q) == 1) units.push_back(x % q);
    simd::CompensatedComplexSum acc;
    double abs_sum = 0.0;
    for (i64 x : units) {
        const i64 ax = a * x % q, bx = b * x % q;
        cplx row{};
        double row_abs = 0.0;
        for (i64 x2 : units) {
            const i64 c = ctab[static_cast<std::size_t>(mod(bx - b2 * x2, q))];
            if (c == 0) continue;
            row += phase[mod(ax - a2 * x2, q)] * static_cast<double>(c);
            row_abs += std::abs(static_cast<double>(c));
        }
        acc.add(row);
        abs_sum += row_abs;
    }
    return {round_integer(acc.value(), integer_tolerance(abs_sum), "calS_bruteforce"), 0.0};
}

std::string label_name(Lemma3Label l) {
    switch (l) {
        case Lemma3Label::PDividesBB: return "P_DIVIDES_BB'";
        case Lemma3Label::P2DividesQ: return "P2_DIVIDES_Q";
        case Lemma3Label::QEqualsP: return "Q_EQUALS_P";
        default: return "UNDEFINED";
    }
}

bool is_prime_power(i64 q, i64* p, int* k) {
    if (q < 2) return false;
    const auto f = arith::factorize(static_cast<u64>(q));
    if (f.size() != 1) return false;
    if (p) *p = static_cast<i64>(f[0].prime);
    if (k) *k = f[0].exponent;
    return true;
}

Lemma3Case calS_closed_form(i64 a, i64 a2, i64 b, i64 b2, i64 p, int k, Lemma3Reading reading) {
    if (p < 2 || !arith::is_prime(static_cast<u64>(p)) || k < 1)
        throw DomainError("calS_closed_form: modulus must be p^k with p prime and k >= 1");
    i64 q = 1;
    for (int i = 0; i < k; ++i) {
        if (q > std::numeric_limits<i64>::max() / p) throw DomainError("calS_closed_form: p^k overflows");
        q *= p;
    }
    a = mod(a, q);
    a2 = mod(a2, q);
    b = mod(b, q);
    b2 = mod(b2, q);
    Lemma3Case r;
    r.q = q;
    r.p = p;
    r.calB = gcd_q(q, std::gcd(b, b2));
    r.Q = q / r.calB;
    r.B = b / r.calB;
    r.B2 = b2 / r.calB;
    r.calA = gcd_q(q, a);
    r.calA2 = gcd_q(q, a2);
    const i64 comb = reading == Lemma3Reading::Proof ? a * b2 - a2 * b : a * b - a2 * b2;
    const auto cq = [q](i64 n) { return static_cast<double>(arith::ramanujan_sum(q, n)); };
    if ((r.B % p == 0) || (r.B2 % p == 0)) {
        r.label = Lemma3Label::PDividesBB;
        r.value = cq(r.calB) * cq(a) * cq(a2);
    } else if (r.Q % (p * p) == 0) {
        r.label = Lemma3Label::P2DividesQ;
        const bool ind = r.calB == r.calA && r.calA == r.calA2;
        r.value = ind ? static_cast<double>(q) * static_cast<double>(arith::ramanujan_sum(q * r.calB, comb)) : 0.0;
    } else if (r.Q == p) {
        r.label = Lemma3Label::QEqualsP;
        const i64 qp = q / p;
        const bool ind = a % qp == 0 && a2 % qp == 0;
        const double first = ind ? static_cast<double>(q) * static_cast<double>(arith::ramanujan_sum(q * r.calB, comb)) : 0.0;
        r.value = first - static_cast<double>(r.calB) * cq(a) * cq(a2);
    } else {
        r.label = Lemma3Label::Undefined;
        r.value = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

double critical_ratio(i64 a, i64 a2, i64 b, i64 b2, i64 q, Lemma3Reading reading) {
    const double s = std::abs(calS_bruteforce(a, a2, b, b2, q, true).real());
    const i64 am = mod(a, q), a2m = mod(a2, q), bm = mod(b, q), b2m = mod(b2, q);
    const i64 comb = reading == Lemma3Reading::Proof ? am * b2m - a2m * bm : am * bm - a2m * b2m;
    const i64 calB = gcd_q(q, std::gcd(bm, b2m));
    const double denom = static_cast<double>(q) * static_cast<double>(calB) *
                         static_cast<double>(arith::sigma(static_cast<u64>(gcd_q(q, comb))));
    return s / denom;
}

namespace {

double lemma4_denominator(i64 n, i64 n2, i64 q) {
    const i64 g = gcd_q(q, std::gcd(mod(n, q), mod(n2, q)));
    const i64 f = gcd_q(q, n - n2);
    const double q3 = static_cast<double>(q) * static_cast<double>(q) * static_cast<double>(q);
    return q3 * static_cast<double>(g) * static_cast<double>(arith::sigma(static_cast<u64>(f)));
}

}  // namespace

double lemma4_ratio(const Triple& t, const Triple& t2, i64 q, bool force) {
    const double s = std::abs(correlation_sum(t, t2, q, force).real());
    return s / lemma4_denominator(t.product(), t2.product(), q);
}

CorrIdentity corr_identity(u64 n, u64 m, i64 q, bool force) {
    guard(q, kCorrIdentityMaxQ, force, "corr_identity", "reduce q");
    if (n < 1 || m < 1) throw DomainError("corr_identity: n, m must be >= 1");
    const RSumEvaluator ev(q);
    auto a_vec = [&](u64 k) {
        const auto triples = arith::ordered_triples(k);
        std::vector<double> out;
        for (i64 h = 0; h < q; ++h) {
            if (std::gcd(h, q) != 1) continue;
            simd::CompensatedSum acc;
            for (const auto& tr : triples)
                acc.add(ev({static_cast<i64>(tr[0] % static_cast<u64>(q)), static_cast<i64>(tr[1] % static_cast<u64>(q)),
                            static_cast<i64>(tr[2] % static_cast<u64>(q))},
                           h));
            out.push_back(acc.value());
        }
        return out;
    };
    const auto an = a_vec(n), am = a_vec(m);
    CorrIdentity r;
    r.lhs_re = simd::dot(an, am);
    r.lhs_im = 0.0;
    const double q3 = std::pow(static_cast<double>(q), 3);
    r.rhs = q3 * static_cast<double>(arith::ramanujan_sum(q, static_cast<i64>(n) - static_cast<i64>(m))) *
            static_cast<double>(arith::dk_from_factorization(3, arith::factorize(n))) *
            static_cast<double>(arith::dk_from_factorization(3, arith::factorize(m)));
    r.deviation = std::abs(r.lhs_re - r.rhs) / q3;
    return r;
}

double corr_identity_deviation(u64 n, u64 m, i64 q, bool force) { return corr_identity(n, m, q, force).deviation; }

Lemma3Catalog lemma3_catalog(i64 p, int k, u64 seed, std::size_t samples, i64 exhaustive_max, unsigned threads) {
    i64 q = 1;
    for (int i = 0; i < k; ++i) q *= p;
    std::vector<std::array<i64, 4>> tuples;
    if (q <= exhaustive_max) {
        for (i64 a = 0; a < q; ++a)
            for (i64 a2 = 0; a2 < q; ++a2)
                for (i64 b = 0; b < q; ++b)
                    for (i64 b2 = 0; b2 < q; ++b2) tuples.push_back({a, a2, b, b2});
    } else {
        std::mt19937_64 rng(seed ^ (static_cast<u64>(q) * 0x9E3779B97F4A7C15ULL));
        for (std::size_t i = 0; i < samples; ++i) {
            std::array<i64, 4> t;
            for (auto& v : t) v = static_cast<i64>(rng() % static_cast<u64>(q));
            tuples.push_back(t);
        }
    }
    Lemma3Catalog cat;
    cat.rows = parallel_map<Lemma3Row>(tuples.size(), threads, [&](std::size_t i) {
        const auto [a, a2, b, b2] = tuples[i];
        Lemma3Row row{q, p, a, a2, b, b2, 0.0, {}, {}, false, false};
        row.brute = calS_bruteforce(a, a2, b, b2, q, true).real();
        row.proof = calS_closed_form(a, a2, b, b2, p, k, Lemma3Reading::Proof);
        row.stated = calS_closed_form(a, a2, b, b2, p, k, Lemma3Reading::Stated);
        row.proof_match = std::abs(row.proof.value - row.brute) <= 1e-6;
        row.stated_match = std::abs(row.stated.value - row.brute) <= 1e-6;
        return row;
    });
    cat.total = cat.rows.size();
    for (const auto& r : cat.rows) {
        cat.proof_matches += r.proof_match;
        cat.stated_matches += r.stated_match;
    }
    return cat;
}

std::vector<RatioSample> lemma4_scan(i64 q_max, i64 entry_max, unsigned threads) {
    std::vector<Triple> triples;
    for (i64 a = 1; a <= entry_max; ++a)
        for (i64 b = 1; b <= entry_max; ++b)
            for (i64 c = 1; c <= entry_max; ++c) triples.push_back({a, b, c});
    return parallel_map<RatioSample>(static_cast<std::size_t>(q_max), threads, [&](std::size_t idx) {
        const i64 q = static_cast<i64>(idx) + 1;
        const RSumEvaluator ev(q);
        std::vector<i64> hs;
        for (i64 h = 0; h < q; ++h)
            if (std::gcd(h, q) == 1) hs.push_back(h);
        // Rows of R values; correlations are then entries of the Gram matrix.
        std::vector<std::vector<double>> rows(triples.size());
        for (std::size_t i = 0; i < triples.size(); ++i) {
            rows[i].resize(hs.size());
            for (std::size_t j = 0; j < hs.size(); ++j) rows[i][j] = ev(triples[i], hs[j]);
        }
        double best = 0.0;
        for (std::size_t i = 0; i < triples.size(); ++i) {
            for (std::size_t j = i; j < triples.size(); ++j) {
                const double s = std::abs(simd::dot(rows[i], rows[j]));
                best = std::max(best, s / lemma4_denominator(triples[i].product(), triples[j].product(), q));
            }
        }
        return RatioSample{q, best};
    });
}

std::vector<RatioSample> critical_scan(i64 q_max, i64 entry_max, unsigned threads, Lemma3Reading reading) {
    std::vector<i64> moduli;
    for (i64 q = 2; q <= q_max; ++q)
        if (is_prime_power(q)) moduli.push_back(q);
    return parallel_map<RatioSample>(moduli.size(), threads, [&](std::size_t idx) {
        const i64 q = moduli[idx];
        double best = 0.0;
        for (i64 a = 0; a <= entry_max; ++a)
            for (i64 a2 = 0; a2 <= entry_max; ++a2)
                for (i64 b = 0; b <= entry_max; ++b)
                    for (i64 b2 = 0; b2 <= entry_max; ++b2)
                        best = std::max(best, critical_ratio(a, a2, b, b2, q, reading));
        return RatioSample{q, best};
    });
}

FitResult fit_log_power(const std::vector<RatioSample>& samples, i64 base_q_max) {
    FitResult fit;
    for (int A = 0; A <= 3; ++A) {
        double base = 0.0, full = 0.0;
        for (const auto& s : samples) {
            const double v = s.ratio / std::pow(1.0 + std::log(static_cast<double>(s.q)), A);
            full = std::max(full, v);
            if (s.q <= base_q_max) base = std::max(base, v);
        }
        fit.constants.push_back(base);
        fit.doubled.push_back(full);
        fit.stability.push_back(base > 0 ? full / base : std::numeric_limits<double>::infinity());
        fit.holds.push_back(true);  // C_A is the maximum over the base family by construction
    }
    for (int A = 0; A <= 3; ++A) {
        if (fit.stability[static_cast<std::size_t>(A)] < 3.0) {
            fit.best = A;
            break;
        }
    }
    fit.A = fit.best;
    return fit;
}

}  // namespace d3lab::expsum
