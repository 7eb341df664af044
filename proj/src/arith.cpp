#include "d3lab/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>

#include "d3lab/error.hpp"

namespace d3lab::arith {

namespace {

constexpr u64 kTrialPrimeBound = 1'000'000;

const std::vector<std::uint32_t>& small_primes() {
    static const std::vector<std::uint32_t> primes = [] {
        std::vector<bool> composite(kTrialPrimeBound + 1, false);
        std::vector<std::uint32_t> out;
        for (u64 i = 2; i <= kTrialPrimeBound; ++i) {
            if (composite[i]) continue;
            out.push_back(static_cast<std::uint32_t>(i));
            for (u64 j = i * i; j <= kTrialPrimeBound; j += i) composite[j] = true;
        }
        return out;
    }();
    return primes;
}

void divide_out(u64& n, u64 p, Factorization& f) {
    int e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    if (e > 0) f.push_back({p, e});
}

}  // namespace

Factorization factorize(u64 n) {
    if (n == 0) throw DomainError("factorize: n = 0 has no factorization");
    Factorization f;
    for (std::uint32_t p : small_primes()) {
        const u64 pp = p;
        if (pp * pp > n) break;
        divide_out(n, pp, f);
    }
    // Past the table: plain odd trial division (only reached for n > 10^12).
    for (u64 p = kTrialPrimeBound + 1; p <= n / p; p += 2) divide_out(n, p, f);
    if (n > 1) f.push_back({n, 1});
    return f;
}

i64 mod_inverse(i64 a, i64 q) {
    if (q < 1) throw DomainError("mod_inverse: modulus must be >= 1");
    if (q == 1) return 0;
    i64 r0 = q, r1 = mod(a, q);
    i64 s0 = 0, s1 = 1;
    while (r1 != 0) {
        const i64 t = r0 / r1;
        std::tie(r0, r1) = std::pair{r1, r0 - t * r1};
        std::tie(s0, s1) = std::pair{s1, s0 - t * s1};
    }
    if (r0 != 1)
        throw DomainError("mod_inverse: " + std::to_string(a) + " is not invertible modulo " +
                          std::to_string(q));
    return mod(s0, q);
}

u64 euler_phi(const Factorization& f) {
    u64 r = 1;
    for (const auto& [p, e] : f) {
        r *= p - 1;
        for (int i = 1; i < e; ++i) r *= p;
    }
    return r;
}

u64 euler_phi(u64 n) { return euler_phi(factorize(n)); }

int mobius(const Factorization& f) {
    for (const auto& pe : f)
        if (pe.exponent > 1) return 0;
    return (f.size() % 2 == 0) ? 1 : -1;
}

int mobius(u64 n) { return mobius(factorize(n)); }

u64 sigma(u64 n) {
    u64 r = 1;
    for (const auto& [p, e] : factorize(n)) {
        u64 term = 1, pk = 1;
        for (int i = 0; i < e; ++i) {
            pk *= p;
            term += pk;
        }
        r *= term;
    }
    return r;
}

u64 divisor_count(u64 n) {
    u64 r = 1;
    for (const auto& pe : factorize(n)) r *= static_cast<u64>(pe.exponent + 1);
    return r;
}

std::vector<u64> divisors(const Factorization& f) {
    std::vector<u64> out{1};
    for (const auto& [p, e] : f) {
        const std::size_t base = out.size();
        u64 pk = 1;
        for (int i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < base; ++j) out.push_back(out[j] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<u64> divisors(u64 n) { return divisors(factorize(n)); }

u64 binomial(u64 n, u64 k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    u64 r = 1;
    for (u64 i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

bool is_prime(u64 n) {
    if (n < 2) return false;
    const auto f = factorize(n);
    return f.size() == 1 && f[0].exponent == 1;
}

cplx unit_phase(i64 a, i64 q) {
    if (q < 1) throw DomainError("unit_phase: modulus must be >= 1");
    const i64 r = mod(a, q);
    if (r == 0) return {1.0, 0.0};
    // 4r = quadrant * q + s with 0 <= s < q; angle within the quadrant is (pi/2) s/q.
    const auto four_r = static_cast<__int128>(r) * 4;
    const int quadrant = static_cast<int>(four_r / q);
    const auto s = static_cast<i64>(four_r - static_cast<__int128>(quadrant) * q);
    constexpr double half_pi = 1.57079632679489661923;
    double c, sn;
    if (2 * static_cast<__int128>(s) <= q) {
        const double t = half_pi * (static_cast<double>(s) / static_cast<double>(q));
        c = std::cos(t);
        sn = std::sin(t);
    } else {
        const double t = half_pi * (static_cast<double>(q - s) / static_cast<double>(q));
        c = std::sin(t);
        sn = std::cos(t);
    }
    if (s == 0) {
        c = 1.0;
        sn = 0.0;
    }
    switch (quadrant) {
        case 0: return {c, sn};
        case 1: return {-sn, c};
        case 2: return {-c, -sn};
        default: return {sn, -c};
    }
}

PhaseTable::PhaseTable(i64 q) : q_(q) {
    if (q < 1) throw DomainError("PhaseTable: modulus must be >= 1");
    table_.resize(static_cast<std::size_t>(q));
    for (i64 j = 0; j < q; ++j) table_[static_cast<std::size_t>(j)] = unit_phase(j, q);
}

ReducedFraction ReducedFraction::reduce(i64 a, i64 q) {
    if (q < 1) throw DomainError("ReducedFraction: denominator must be >= 1");
    const i64 r = mod(a, q);
    if (r == 0) return {0, 1};
    const i64 g = std::gcd(r, q);
    return {r / g, q / g};
}

ReducedFraction ReducedFraction::checked(i64 h, i64 q) {
    if (q < 1) throw DomainError("ReducedFraction: denominator must be >= 1");
    const i64 r = mod(h, q);
    if (q == 1) return {0, 1};
    if (std::gcd(r, q) != 1)
        throw DomainError("ReducedFraction: " + std::to_string(h) + "/" + std::to_string(q) +
                          " is not in lowest terms");
    return {r, q};
}

i64 ramanujan_sum(i64 q, i64 n) {
    if (q < 1) throw DomainError("ramanujan_sum: q must be >= 1");
    const i64 r = mod(n, q);
    const u64 g = static_cast<u64>(r == 0 ? q : std::gcd(r, q));
    const auto fq = factorize(static_cast<u64>(q));
    i64 total = 0;
    for (u64 h : divisors(g)) {
        // mu(q/h) from the factorization of q: exponent of p in q/h.
        u64 m = static_cast<u64>(q) / h;
        int mu = 1;
        for (const auto& pe : fq) {
            int e = 0;
            while (m % pe.prime == 0) {
                m /= pe.prime;
                ++e;
            }
            if (e > 1) {
                mu = 0;
                break;
            }
            if (e == 1) mu = -mu;
        }
        total += mu * static_cast<i64>(h);
    }
    return total;
}

i64 ramanujan_sum_bruteforce(i64 q, i64 n) {
    if (q < 1) throw DomainError("ramanujan_sum_bruteforce: q must be >= 1");
    cplx s{0.0, 0.0};
    const i64 nr = mod(n, q);
    for (i64 a = 1; a <= q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        s += unit_phase(static_cast<i64>((static_cast<__int128>(a) * nr) % q), q);
    }
    const double rounded = std::round(s.real());
    if (std::abs(s.imag()) > 1e-6 || std::abs(s.real() - rounded) > 1e-6)
        throw CheckFailure("ramanujan_sum_bruteforce: defining sum for c_" + std::to_string(q) +
                           "(" + std::to_string(n) + ") is not integral");
    return static_cast<i64>(rounded);
}

std::vector<i64> ramanujan_table(i64 q) {
    if (q < 1) throw DomainError("ramanujan_table: q must be >= 1");
    // c_q(r) depends on r only through gcd(r, q).
    std::vector<i64> by_gcd(static_cast<std::size_t>(q) + 1, 0);
    for (u64 d : divisors(static_cast<u64>(q))) by_gcd[d] = ramanujan_sum(q, static_cast<i64>(d));
    std::vector<i64> out(static_cast<std::size_t>(q));
    for (i64 r = 0; r < q; ++r) out[static_cast<std::size_t>(r)] = by_gcd[r == 0 ? q : std::gcd(r, q)];
    return out;
}

cplx kloosterman_sum(i64 n, i64 m, i64 q) {
    if (q < 1) throw DomainError("kloosterman_sum: q must be >= 1");
    const i64 nr = mod(n, q), mr = mod(m, q);
    cplx s{0.0, 0.0};
    for (i64 a = 1; a <= q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        const i64 abar = mod_inverse(a, q);
        const auto arg = (static_cast<__int128>(nr) * a + static_cast<__int128>(mr) * abar) % q;
        s += unit_phase(static_cast<i64>(arg), q);
    }
    return s;
}

std::vector<std::array<u64, 3>> ordered_triples(u64 n) {
    if (n == 0) throw DomainError("ordered_triples: n must be >= 1");
    std::vector<std::array<u64, 3>> out;
    for (u64 a : divisors(n))
        for (u64 b : divisors(n / a)) out.push_back({a, b, n / a / b});
    return out;
}

DivisorTable::DivisorTable(int k, u64 limit, std::vector<std::uint32_t> values)
    : k_(k), limit_(limit), values_(std::move(values)) {
    if (values_.size() != limit_ + 1) throw DomainError("DivisorTable: value count does not match limit");
}

DivisorTable sieve_dk(int k, u64 limit) {
    if (k < 2 || k > 4) throw DomainError("sieve_dk: k must be in [2, 4], got " + std::to_string(k));
    if (limit < 1) throw DomainError("sieve_dk: limit must be >= 1");
    if (limit > DivisorTable::kMaxLimit)
        throw CapacityError("sieve_dk: limit " + std::to_string(limit) + " exceeds the supported maximum " +
                            std::to_string(DivisorTable::kMaxLimit));

    std::vector<std::uint32_t> values;
    std::vector<std::uint32_t> least_prime;
    std::vector<std::uint8_t> exponent;
    try {
        values.assign(limit + 1, 0);
        least_prime.assign(limit + 1, 0);
        exponent.assign(limit + 1, 0);
    } catch (const std::bad_alloc&) {
        throw CapacityError("sieve_dk: cannot allocate tables for limit " + std::to_string(limit));
    }

    // binom[e] = d_k(p^e); exponents stay below 32 for limit < 2^31.
    std::array<u64, 40> binom{};
    for (u64 e = 0; e < binom.size(); ++e) binom[e] = binomial(e + static_cast<u64>(k) - 1, static_cast<u64>(k) - 1);

    std::vector<std::uint32_t> primes;
    values[1] = 1;
    for (u64 i = 2; i <= limit; ++i) {
        if (least_prime[i] == 0) {
            least_prime[i] = static_cast<std::uint32_t>(i);
            exponent[i] = 1;
            values[i] = static_cast<std::uint32_t>(k);
            primes.push_back(static_cast<std::uint32_t>(i));
        }
        for (std::uint32_t p : primes) {
            const u64 m = i * p;
            if (p > least_prime[i] || m > limit) break;
            least_prime[m] = p;
            if (p == least_prime[i]) {
                const int e = exponent[i] + 1;
                exponent[m] = static_cast<std::uint8_t>(e);
                values[m] = static_cast<std::uint32_t>(values[i] / binom[e - 1] * binom[e]);
            } else {
                exponent[m] = 1;
                values[m] = values[i] * static_cast<std::uint32_t>(k);
            }
        }
    }
    return DivisorTable(k, limit, std::move(values));
}

u64 dk_bruteforce(int k, u64 n) {
    if (k < 1) throw DomainError("dk_bruteforce: k must be >= 1");
    if (k == 1) return 1;
    u64 count = 0;
    for (u64 d = 1; d <= n; ++d)
        if (n % d == 0) count += dk_bruteforce(k - 1, n / d);
    return count;
}

u64 dk_from_factorization(int k, const Factorization& f) {
    u64 r = 1;
    for (const auto& pe : f) r *= binomial(static_cast<u64>(pe.exponent + k - 1), static_cast<u64>(k - 1));
    return r;
}

}  // namespace d3lab::arith
