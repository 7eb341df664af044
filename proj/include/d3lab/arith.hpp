#pragma once

// Exact integer arithmetic: factorization, multiplicative functions,
// d_k sieves, Ramanujan and Kloosterman sums.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace d3lab::arith {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using cplx = std::complex<double>;

struct PrimePower {
    u64 prime;
    int exponent;
    bool operator==(const PrimePower&) const = default;
};

// Primes strictly increasing; empty for n = 1.
using Factorization = std::vector<PrimePower>;

Factorization factorize(u64 n);

// Least nonnegative residue of a modulo q (q >= 1).
constexpr i64 mod(i64 a, i64 q) {
    const i64 r = a % q;
    return r < 0 ? r + q : r;
}

// Inverse of a modulo q by extended Euclid. Throws DomainError if gcd(a, q) != 1.
i64 mod_inverse(i64 a, i64 q);

u64 euler_phi(u64 n);
u64 euler_phi(const Factorization& f);
int mobius(u64 n);
int mobius(const Factorization& f);
u64 sigma(u64 n);  // sum of divisors
u64 divisor_count(u64 n);
std::vector<u64> divisors(u64 n);  // ascending
std::vector<u64> divisors(const Factorization& f);
u64 binomial(u64 n, u64 k);
bool is_prime(u64 n);

// e(a/q) = exp(2 pi i a / q), evaluated from the reduced residue with exact
// quadrant folding so that large |a| costs no accuracy.
cplx unit_phase(i64 a, i64 q);

// Table of e(j/q) for j = 0..q-1.
class PhaseTable {
public:
    explicit PhaseTable(i64 q);
    i64 modulus() const noexcept { return q_; }
    const cplx& operator[](i64 j) const noexcept { return table_[static_cast<std::size_t>(j)]; }
    cplx at(i64 a) const noexcept { return table_[static_cast<std::size_t>(mod(a, q_))]; }
    std::span<const cplx> values() const noexcept { return table_; }

private:
    i64 q_;
    std::vector<cplx> table_;
};

// h/q in lowest terms with 0 <= h < q; the only fraction with h = 0 is 0/1.
class ReducedFraction {
public:
    ReducedFraction() = default;
    // Reduces a/q; q >= 1.
    static ReducedFraction reduce(i64 a, i64 q);
    // Requires gcd(h, q) = 1 (after taking h mod q); throws otherwise.
    static ReducedFraction checked(i64 h, i64 q);

    i64 numerator() const noexcept { return h_; }
    i64 denominator() const noexcept { return q_; }
    bool operator==(const ReducedFraction&) const = default;

private:
    ReducedFraction(i64 h, i64 q) : h_(h), q_(q) {}
    i64 h_ = 0;
    i64 q_ = 1;
};

// c_q(n) by the divisor formula sum_{h | (q,n)} mu(q/h) h. Production path.
i64 ramanujan_sum(i64 q, i64 n);

// c_q(n) from the defining sum over reduced residues, rounded.
// Throws CheckFailure if the float sum is not within 1e-6 of an integer.
i64 ramanujan_sum_bruteforce(i64 q, i64 n);

// c_q(r) for r = 0..q-1.
std::vector<i64> ramanujan_table(i64 q);

// S_{n,m}(q) = sum'_{a mod q} e((n a + m abar)/q). Real up to rounding.
cplx kloosterman_sum(i64 n, i64 m, i64 q);

// Ordered triples (a, b, c) of positive integers with abc = n.
std::vector<std::array<u64, 3>> ordered_triples(u64 n);

// d_k(1..N), immutable after construction.
class DivisorTable {
public:
    static constexpr u64 kMaxLimit = u64{1} << 31;

    DivisorTable(int k, u64 limit, std::vector<std::uint32_t> values);

    int k() const noexcept { return k_; }
    u64 limit() const noexcept { return limit_; }
    // d_k(n) for 1 <= n <= limit; index 0 holds 0.
    std::uint32_t operator[](u64 n) const noexcept { return values_[n]; }
    std::span<const std::uint32_t> values() const noexcept { return values_; }
    bool operator==(const DivisorTable&) const = default;

private:
    int k_;
    u64 limit_;
    std::vector<std::uint32_t> values_;
};

// Linear sieve over the multiplicative function with d_k(p^e) = C(e+k-1, k-1).
// Throws DomainError for k outside [2, 4] or N < 1, CapacityError if N is too large.
DivisorTable sieve_dk(int k, u64 limit);

// d_k(n) by enumeration of ordered k-tuples; test oracle only.
u64 dk_bruteforce(int k, u64 n);

// d_k(n) from the factorization.
u64 dk_from_factorization(int k, const Factorization& f);

}  // namespace d3lab::arith
