#include <numeric>

#include "d3lab/arith.hpp"
#include "d3lab/error.hpp"
#include "doctest.h"

using namespace d3lab;
using namespace d3lab::arith;

TEST_CASE("d_k table values") {
    const auto t3 = sieve_dk(3, 2000);
    CHECK(t3[1] == 1);
    CHECK(t3[4] == 6);
    CHECK(t3[8] == 10);
    CHECK(t3[6] == 9);
    const auto t2 = sieve_dk(2, 2000);
    CHECK(t2[12] == 6);
    for (u64 n = 1; n <= 2000; ++n) {
        REQUIRE(t2[n] == dk_bruteforce(2, n));
        REQUIRE(t3[n] == dk_bruteforce(3, n));
    }
}

TEST_CASE("d_k table invariants") {
    const auto t = sieve_dk(4, 5000);
    for (u64 n = 2; n <= 5000; ++n) {
        const auto f = factorize(n);
        REQUIRE(t[n] == dk_from_factorization(4, f));
        if (f.size() == 1 && f[0].exponent == 1) REQUIRE(t[n] == 4);
    }
    for (u64 m = 1; m <= 70; ++m)
        for (u64 n = 1; n <= 70; ++n)
            if (std::gcd(m, n) == 1) REQUIRE(t[m * n] == t[m] * t[n]);
}

TEST_CASE("sieve errors") {
    CHECK_THROWS_AS(sieve_dk(1, 10), DomainError);
    CHECK_THROWS_AS(sieve_dk(5, 10), DomainError);
    CHECK_THROWS_AS(sieve_dk(3, 0), DomainError);
    CHECK_THROWS_AS(sieve_dk(3, DivisorTable::kMaxLimit + 1), CapacityError);
}

TEST_CASE("factorize") {
    CHECK(factorize(1).empty());
    CHECK(factorize(12) == Factorization{{2, 2}, {3, 1}});
    CHECK(factorize(97) == Factorization{{97, 1}});
    CHECK(factorize(999999000001ULL) == Factorization{{999999000001ULL, 1}});
    CHECK(factorize(1000000000000ULL) == Factorization{{2, 12}, {5, 12}});
    CHECK_THROWS_AS(factorize(0), DomainError);
    for (u64 n = 1; n < 3000; ++n) {
        u64 prod = 1;
        for (const auto& pe : factorize(n)) {
            REQUIRE(is_prime(pe.prime));
            for (int i = 0; i < pe.exponent; ++i) prod *= pe.prime;
        }
        REQUIRE(prod == n);
    }
}

TEST_CASE("multiplicative helpers") {
    CHECK(euler_phi(1) == 1);
    CHECK(euler_phi(12) == 4);
    CHECK(mobius(30) == -1);
    CHECK(mobius(12) == 0);
    CHECK(sigma(12) == 28);
    CHECK(divisor_count(12) == 6);
    CHECK(divisors(12) == std::vector<u64>{1, 2, 3, 4, 6, 12});
    CHECK(mod_inverse(3, 7) == 5);
    CHECK_THROWS_AS(mod_inverse(4, 8), DomainError);
}

TEST_CASE("unit phase") {
    CHECK(unit_phase(0, 5) == cplx{1, 0});
    CHECK(std::abs(unit_phase(1, 2) - cplx{-1, 0}) == 0.0);
    CHECK(std::abs(unit_phase(1, 4) - cplx{0, 1}) == 0.0);
    CHECK(std::abs(unit_phase(-1, 4) - cplx{0, -1}) == 0.0);
    for (i64 q = 1; q < 200; ++q)
        for (i64 a = -q; a < 2 * q; ++a) {
            const auto z = unit_phase(a, q);
            REQUIRE(std::abs(std::abs(z) - 1.0) < 1e-15);
            REQUIRE(std::abs(z - std::polar(1.0, 2 * M_PI * mod(a, q) / q)) < 1e-14);
        }
    // Large numerators reduce exactly.
    CHECK(std::abs(unit_phase(1000000000000007LL, 1000000000000000LL) - unit_phase(7, 1000000000000000LL)) == 0.0);
}

TEST_CASE("reduced fractions") {
    const auto f = ReducedFraction::reduce(6, 8);
    CHECK(f.numerator() == 3);
    CHECK(f.denominator() == 4);
    CHECK(ReducedFraction::reduce(0, 9) == ReducedFraction::reduce(0, 1));
    CHECK_THROWS_AS(ReducedFraction::checked(2, 4), DomainError);
}

TEST_CASE("Ramanujan sums") {
    for (i64 n = -5; n < 20; ++n) CHECK(ramanujan_sum(1, n) == 1);
    CHECK(ramanujan_sum(6, 0) == 2);
    CHECK(ramanujan_sum(6, 3) == -2);
    CHECK(ramanujan_sum(5, 2) == -1);
    CHECK(ramanujan_sum(6, -3) == -2);
    for (i64 q = 1; q <= 200; q += 7)
        for (i64 n = 0; n <= 200; n += 3) REQUIRE(ramanujan_sum(q, n) == ramanujan_sum_bruteforce(q, n));
    for (i64 q1 = 1; q1 <= 50; ++q1)
        for (i64 q2 = 1; q2 <= 50; ++q2) {
            if (std::gcd(q1, q2) != 1) continue;
            for (i64 n = 0; n <= 50; n += 5) REQUIRE(ramanujan_sum(q1 * q2, n) == ramanujan_sum(q1, n) * ramanujan_sum(q2, n));
        }
    for (i64 q = 1; q <= 200; ++q)
        for (i64 n = 1; n <= 200; ++n) {
            const i64 g = std::gcd(q, n);
            REQUIRE(std::abs(ramanujan_sum(q, n)) <= static_cast<i64>(sigma(static_cast<u64>(g))));
        }
}

TEST_CASE("Kloosterman sums") {
    CHECK(std::abs(kloosterman_sum(1, 1, 2) - cplx{1, 0}) < 1e-12);
    CHECK(std::abs(kloosterman_sum(1, 1, 3) - cplx{-1, 0}) < 1e-12);
    for (i64 q = 1; q <= 60; ++q)
        for (i64 m = 0; m < 8; ++m) REQUIRE(std::abs(kloosterman_sum(0, m, q).real() - ramanujan_sum(q, m)) < 1e-9);
    for (i64 q = 2; q <= 500; q += 13)
        for (i64 n = 1; n < 6; ++n)
            for (i64 m = 0; m < 6; ++m) {
                const auto s = kloosterman_sum(n, m, q);
                REQUIRE(std::abs(s - kloosterman_sum(m, n, q)) < 1e-9);
                REQUIRE(std::abs(s.imag()) < 1e-9 * q);
                const double g = static_cast<double>(std::gcd(std::gcd(n, m), q));
                REQUIRE(std::abs(s) <= divisor_count(q) * std::sqrt(double(q)) * std::sqrt(g) + 1e-9);
            }
}

TEST_CASE("ordered triples") {
    CHECK(ordered_triples(1).size() == 1);
    CHECK(ordered_triples(4).size() == 6);
    CHECK(ordered_triples(12).size() == 18);
}
