#pragma once

// Complete exponential sums attached to the ternary divisor function:
// the triple sum R_{a,b,c}(h/q), A_{h/q}(n), correlation sums over h, and
// the two-variable sum calS together with its prime-power closed form.

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "d3lab/arith.hpp"

namespace d3lab::expsum {

using arith::i64;
using arith::ReducedFraction;
using arith::u64;
using cplx = std::complex<double>;

struct Triple {
    i64 a = 0, b = 0, c = 0;
    i64 product() const { return a * b * c; }
    bool operator==(const Triple&) const = default;
};

// Default cost guards; every guarded entry point takes `force` to bypass.
inline constexpr i64 kBruteForceMaxQ = 200;
inline constexpr i64 kCorrelationMaxQ = 60;
inline constexpr i64 kCalSMaxQ = 500;
inline constexpr i64 kCorrIdentityMaxQ = 40;

// Literal triple loop over x, y, z mod q. The result is real; a residual
// imaginary part above 1e-6 raises CheckFailure and is otherwise dropped.
cplx r_sum_bruteforce(const Triple& t, const ReducedFraction& point, bool force = false);

// All R_{a,b,c}(h/q) for a, b, c mod q at once, laid out as [(a*q + b)*q + c].
// Uses the separable form sum_z e(z(c - hxy)/q) = q [c = hxy], O(q^4).
// Independent of the divisor reduction used by r_sum_fast.
std::vector<double> r_sum_table(i64 h, i64 q);

// Divisor reduction to Kloosterman sums of modulus q/delta with delta | (q, b, c).
// Precomputes per-modulus tables so repeated evaluation at one q is cheap.
class RSumEvaluator {
public:
    explicit RSumEvaluator(i64 q);
    i64 modulus() const noexcept { return q_; }
    // Requires gcd(h, q) = 1; arguments may be any integers.
    double operator()(const Triple& t, i64 h) const;

private:
    struct Level {
        i64 delta, sub;                 // sub = q / delta
        std::vector<double> cosines;    // cos(2 pi j / sub)
        std::vector<i64> inverse;       // inverse mod sub, 0 for non-units
        std::vector<i64> units;
    };
    double kloosterman_real(const Level& lv, i64 m, i64 n) const;

    i64 q_;
    std::vector<Level> levels_;  // one per divisor of q, ascending delta
};

cplx r_sum_fast(const Triple& t, const ReducedFraction& point);

// Closed form for q | b and q | c: q * sum_{d | (q, a)} d phi(q/d).
i64 r_sum_degenerate(i64 a, i64 q);

// A_{h/q}(n) = sum over ordered (a, b, c) with abc = n of R_{a,b,c}(h/q).
cplx a_sum(const ReducedFraction& point, u64 n);

// sum over reduced h mod q of R_{t}(h/q) * conj(R_{t2}(h/q)); integer valued,
// rounded (CheckFailure if it does not round cleanly).
cplx correlation_sum(const Triple& t, const Triple& t2, i64 q, bool force = false);

// Tolerance for rounding a float sum known to be an integer.
double integer_tolerance(double abs_term_sum);
// Rounds v to the nearest integer if within tol (imag too), else CheckFailure.
double round_integer(cplx v, double tol, const char* what);

struct Lemma2Report {
    i64 q1 = 1, q2 = 1;
    Triple t, t2;
    double s12 = 0, s1 = 0, s2 = 0;
    double abs_dev = 0, rel_dev = 0;
    bool multiplicative = false;
    int split_pairs = 0;
    double split_max_dev = 0;
    bool split_ok = false;
    bool pass() const { return multiplicative && split_ok; }
};

Lemma2Report lemma2_check(i64 q1, i64 q2, const Triple& t, const Triple& t2);

// All coprime pairs 2 <= q1 < q2 with q1 q2 <= max_product, per_pair seeded
// triple pairs each with entries in [1, 2 q1 q2]. Deterministic order.
std::vector<Lemma2Report> lemma2_scan(i64 max_product, std::size_t per_pair, u64 seed, unsigned threads = 1);

// sum over reduced X, X' mod q of e((aX - a'X')/q) c_q(bX - b'X'); integer valued.
cplx calS_bruteforce(i64 a, i64 a2, i64 b, i64 b2, i64 q, bool force = false);

enum class Lemma3Label { PDividesBB, P2DividesQ, QEqualsP, Undefined };
std::string label_name(Lemma3Label l);

// Which linear combination enters the Ramanujan sum in the second and third
// cases: ab' - a'b (as used in the proof) or ab - a'b' (as printed in the
// statement). The proof form is the default reading.
enum class Lemma3Reading { Proof, Stated };

struct Lemma3Case {
    i64 q = 1, p = 1;
    i64 calB = 1, Q = 1, B = 0, B2 = 0, calA = 1, calA2 = 1;
    Lemma3Label label = Lemma3Label::Undefined;
    double value = 0;
};

// Classifies and evaluates the closed form for q = p^k (k >= 1).
Lemma3Case calS_closed_form(i64 a, i64 a2, i64 b, i64 b2, i64 p, int k,
                            Lemma3Reading reading = Lemma3Reading::Proof);

// |calS| / (q * gcd(q,b,b') * sigma(gcd(q, ab' - a'b))) with gcd(q, 0) = q.
double critical_ratio(i64 a, i64 a2, i64 b, i64 b2, i64 q, Lemma3Reading reading = Lemma3Reading::Proof);

// |S| / (q^3 gcd(q,n,n') sigma(gcd(q, n - n'))) with n = abc, n' = a'b'c'.
double lemma4_ratio(const Triple& t, const Triple& t2, i64 q, bool force = false);

struct CorrIdentity {
    double lhs_re = 0, lhs_im = 0, rhs = 0, deviation = 0;
};
// Measures sum_h A_{h/q}(n) conj(A_{h/q}(m)) against q^3 c_q(n-m) d_3(n) d_3(m).
CorrIdentity corr_identity(u64 n, u64 m, i64 q, bool force = false);
double corr_identity_deviation(u64 n, u64 m, i64 q, bool force = false);

// ---- scans ----

struct Lemma3Row {
    i64 q, p, a, a2, b, b2;
    double brute;
    Lemma3Case proof, stated;
    bool proof_match, stated_match;
};

struct Lemma3Catalog {
    std::vector<Lemma3Row> rows;  // every evaluated tuple, deterministic order
    std::size_t total = 0, proof_matches = 0, stated_matches = 0;
};

// Exhaustive when q <= exhaustive_max, otherwise `samples` seeded tuples.
Lemma3Catalog lemma3_catalog(i64 p, int k, u64 seed, std::size_t samples = 20000,
                             i64 exhaustive_max = 32, unsigned threads = 1);

struct FitResult {
    int A = 0;
    std::vector<double> constants;  // C_A for A = 0..3 on the base family
    std::vector<double> doubled;    // same on the doubled family
    std::vector<double> stability;  // doubled / base
    std::vector<bool> holds;        // bound holds on the base family with C_A
    int best = -1;                  // smallest A with stability < 3, -1 if none
};

struct RatioSample {
    i64 q;
    double ratio;
};

// Maxima per modulus of lemma4_ratio over all pairs of triples with entries
// in [1, entry_max].
std::vector<RatioSample> lemma4_scan(i64 q_max, i64 entry_max, unsigned threads = 1);
// Maxima per prime-power modulus q <= q_max of critical_ratio over entries in [0, entry_max].
std::vector<RatioSample> critical_scan(i64 q_max, i64 entry_max, unsigned threads = 1,
                                       Lemma3Reading reading = Lemma3Reading::Proof);

// C_A = max ratio / (1 + log q)^A for A = 0..3 on q <= base_q_max and on the full sample set.
FitResult fit_log_power(const std::vector<RatioSample>& samples, i64 base_q_max);

bool is_prime_power(i64 q, i64* p = nullptr, int* k = nullptr);

}  // namespace d3lab::expsum
