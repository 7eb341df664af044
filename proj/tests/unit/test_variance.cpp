#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "d3lab/arith.hpp"
#include "d3lab/error.hpp"
#include "d3lab/mainterm.hpp"
#include "d3lab/report.hpp"
#include "d3lab/simd.hpp"
#include "d3lab/variance.hpp"
#include "doctest.h"

using namespace d3lab;
using namespace d3lab::variance;

namespace {

const arith::DivisorTable& d3_table() {
    static const auto t = arith::sieve_dk(3, 100000);
    return t;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("progression sums") {
    const auto& t = d3_table();
    const auto S2 = progression_sums(2, 10, t);
    CHECK(S2[1] == 16);
    const auto S1 = progression_sums(1, 100, t);
    u64 total = 0;
    for (u64 n = 1; n <= 100; ++n) total += t[n];
    CHECK(S1[0] == total);
    const auto S = progression_sums(37, 5000.5, t);
    u64 acc = 0;
    for (u64 v : S) acc += v;
    CHECK(acc == std::accumulate(t.values().begin() + 1, t.values().begin() + 5001, u64{0}));
    CHECK_THROWS_AS(progression_sums(3, 2e5, t), DomainError);
    CHECK_THROWS_AS(progression_sums(0, 100, t), DomainError);
}

TEST_CASE("delta: chirp against direct transform") {
    const auto& t = d3_table();
    for (i64 q : {7, 12, 30}) {
        const auto a = delta_all(q, 1e4, t, Transform::Chirp);
        const auto b = delta_all(q, 1e4, t, Transform::Direct);
        double scale = 0;
        for (const auto& v : b) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9 * scale);
    }
}

TEST_CASE("delta: conjugate symmetry and q = 1") {
    const auto& t = d3_table();
    for (i64 q : {5, 12, 97}) {
        const auto D = delta_all(q, 1e5, t);
        for (i64 a = 1; a < q; ++a) {
            const auto u = D[static_cast<std::size_t>(a)], v = D[static_cast<std::size_t>(q - a)];
            CHECK(std::abs(u - std::conj(v)) <= 1e-9 * std::max(std::abs(u), 1.0));
        }
    }
    const auto D1 = delta_all(1, 1e5, t);
    CHECK(std::abs(D1[0].imag()) == 0.0);
    CHECK(std::abs(D1[0]) <= std::pow(1e5, 0.8));
    CHECK(std::abs(D1[0].real() - progression_error(1, 1, 1e5, t)) <= 1e-9 * std::abs(D1[0].real()));
}

TEST_CASE("delta: reduction invariance") {
    const auto& t = d3_table();
    const auto D12 = delta_all(12, 3e4, t);
    const auto D4 = delta_all(4, 3e4, t);
    const auto D6 = delta_all(6, 3e4, t);
    // 3/12 = 1/4, 9/12 = 3/4, 2/12 = 1/6, 10/12 = 5/6
    CHECK(std::abs(D12[3] - D4[1]) <= 1e-9 * std::abs(D4[1]));
    CHECK(std::abs(D12[9] - D4[3]) <= 1e-9 * std::abs(D4[3]));
    CHECK(std::abs(D12[2] - D6[1]) <= 1e-9 * std::abs(D6[1]));
    CHECK(std::abs(D12[10] - D6[5]) <= 1e-9 * std::abs(D6[5]));
}

TEST_CASE("progression errors partition the q = 1 error") {
    const auto& t = d3_table();
    const double E1 = progression_error(1, 1, 1e5, t);
    for (i64 q : {2, 6, 11, 60, 317}) {
        const auto E = progression_errors(q, 1e5, t);
        simd::CompensatedSum s;
        for (double e : E) s.add(e);
        CHECK(std::abs(s.value() - E1) <= 1e-6 * std::abs(E1));
        CHECK(E[static_cast<std::size_t>(1 % q)] == doctest::Approx(progression_error(q, 1, 1e5, t)).epsilon(1e-12));
        CHECK(E[0] == doctest::Approx(progression_error(q, q, 1e5, t)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(progression_error(5, 0, 1e3, t), DomainError);
    CHECK_THROWS_AS(progression_error(5, 6, 1e3, t), DomainError);
}

TEST_CASE("progression errors change sign") {
    const auto E = progression_errors(11, 1e5, d3_table());
    int pos = 0, neg = 0;
    for (double e : E) (e > 0 ? pos : neg) += 1;
    CHECK(pos > 0);
    CHECK(neg > 0);
}

TEST_CASE("Parseval and Cauchy-Schwarz") {
    const auto& t = d3_table();
    for (i64 q = 2; q <= 50; ++q) {
        const auto r = variance_report(q, 1e4, t, false);
        CHECK(r.parseval_dev <= 1e-9);
        CHECK(r.hermitian_dev <= 1e-9);
        CHECK(r.V2_all >= r.V2_prim);
        CHECK(r.V2_prim >= 0);
        const auto E = progression_errors(q, 1e4, t);
        double prim2 = 0;
        for (i64 a = 1; a <= q; ++a)
            if (std::gcd(a, q) == 1) prim2 += E[static_cast<std::size_t>(a % q)] * E[static_cast<std::size_t>(a % q)];
        CHECK(r.V1_prim <= std::sqrt(static_cast<double>(arith::euler_phi(static_cast<u64>(q))) * prim2) * (1 + 1e-12));
    }
}

TEST_CASE("divisor decomposition") {
    const auto& t = d3_table();
    for (i64 q = 1; q <= 60; ++q) CHECK(divisor_decomposition_check(q, 1e4, t) <= 1e-9);
    CHECK(divisor_decomposition_check(1, 1e4, t) == 0.0);
    // prime q: |Delta(0/1)|^2 plus the reduced fractions mod q
    const auto D = delta_all(13, 1e4, t);
    const auto D1 = delta_all(1, 1e4, t);
    double left = 0, right = std::norm(D1[0]);
    for (std::size_t a = 0; a < D.size(); ++a) {
        left += std::norm(D[a]);
        if (a != 0) right += std::norm(D[a]);
    }
    CHECK(rel(left, right) <= 1e-9);
}

TEST_CASE("golden report q = 3, x = 1000") {
    const auto& t = d3_table();
    const auto r = variance_report(3, 1e3, t);
    // independent numpy + mpmath computation
    CHECK(rel(r.V2_E, 3485.0451079723825) <= 1e-9);
    CHECK(rel(r.V1_prim, 61.10340021585034) <= 1e-9);
    CHECK(rel(progression_error(3, 1, 1e3, t), 44.55170010792517) <= 1e-9);
    CHECK(rel(progression_error(3, 3, 1e3, t), -35.01760056033527) <= 1e-9);
    report::Table tab(report_columns());
    tab.add_row(report_row(r));
    std::ostringstream got;
    tab.write_csv(got);
    std::ifstream in(std::string(D3LAB_FIXTURE_DIR) + "/variance_q3_x1000.csv");
    REQUIRE(in.good());
    std::stringstream want;
    want << in.rdbuf();
    CHECK(got.str() == want.str());
}

TEST_CASE("rho2 regression at x = 1e5, q = 317") {
    const auto r = variance_report(317, 1e5, d3_table(), false);
    CHECK(r.ratio2 * std::pow(317.0, 1.5) * 1e5 == doctest::Approx(r.V2_all).epsilon(1e-14));
    CHECK(rel(r.ratio2, 22.380620436782273) <= 1e-9);
}

TEST_CASE("bound formulas") {
    const double x = 1e6;
    CHECK(bound_thm1(x, 100) == doctest::Approx(1e9));
    CHECK(bound_thm2(x, 10000) == doctest::Approx(1e6));
    CHECK(bound_nguyen(x, 10) == doctest::Approx(std::pow(x, 11.0 / 12.0)));
    CHECK(bound_nguyen(x, 100) == doctest::Approx(std::pow(x, 7.0 / 9.0) * 10));
    CHECK(bound_nguyen(x, 1000) == doctest::Approx(x));
    CHECK(bound_nguyen(x, 10000) == doctest::Approx(std::pow(x, 5.0 / 6.0) * 10));
    CHECK(std::isnan(bound_nguyen(x, 10001)));
    CHECK(bound_bhs(x, 10) == doctest::Approx(std::pow(x, 0.75)));
    CHECK(bound_bhs(x, 50) == doctest::Approx(1e4 * std::sqrt(50.0)));
    CHECK(bound_bhs(x, 1000) == doctest::Approx(std::pow(x, 0.7) * std::pow(1000.0, 0.4)));
    CHECK(bound_bhs(x, 1e6) == doctest::Approx(std::pow(x, 0.8) * std::pow(1e6, 0.2)));
    CHECK(std::isnan(bound_bhs(x, 1000001)));
    // theorem 2 beats Nguyen for x^{1/3} < q < x^{2/3}; the two meet at q = x^{2/3}
    for (const auto& [gx, q] : default_grid()) {
        const double Q = static_cast<double>(q);
        if (Q <= std::cbrt(gx)) continue;
        const double n = bound_nguyen(gx, q);
        if (std::isnan(n)) continue;
        if (Q < std::pow(gx, 2.0 / 3.0) * (1 - 1e-12))
            CHECK(bound_thm2(gx, q) < n);
        else
            CHECK(bound_thm2(gx, q) == doctest::Approx(n).epsilon(1e-12));
    }
    CHECK(bound_thm2(1e6, 10000) == doctest::Approx(bound_nguyen(1e6, 10000)).epsilon(1e-12));
}

TEST_CASE("grids") {
    const auto g = default_grid();
    REQUIRE(g.size() == 9);
    const i64 want[] = {22, 100, 465, 47, 317, 2155, 100, 1000, 10000};
    for (std::size_t i = 0; i < 9; ++i) CHECK(g[i].second == want[i]);
    const auto d = dense_grid();
    CHECK(d.size() == 199);
    CHECK(d.front().second == 2);
    CHECK(d.back().second == 200);
}

TEST_CASE("scan is thread independent and fits exact data") {
    const auto& t = d3_table();
    std::vector<std::pair<double, i64>> grid = {{1e4, 22}, {1e4, 100}, {3e4, 40}, {1e5, 47}, {1e5, 317}};
    const auto a = exponent_scan(grid, t, 1, false);
    const auto b = exponent_scan(grid, t, 4, false);
    REQUIRE(a.rows.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(a.rows[i].V2_all == b.rows[i].V2_all);
        CHECK(a.rows[i].V1_prim == b.rows[i].V1_prim);
    }
    CHECK(a.fit2.slope_logq == b.fit2.slope_logq);
    // synthetic rows with log rho = 1 + 0.2 log x - 0.3 log q
    std::vector<VarianceReport> rows;
    for (const auto& [x, q] : grid) {
        VarianceReport r;
        r.x = x;
        r.q = q;
        r.ratio2 = std::exp(1 + 0.2 * std::log(x) - 0.3 * std::log(static_cast<double>(q)));
        r.ratio1 = r.ratio2;
        rows.push_back(r);
    }
    const auto f = fit_log_ratio(rows, false);
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.slope_logx == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(f.slope_logq == doctest::Approx(-0.3).epsilon(1e-9));
    rows.resize(2);
    CHECK_THROWS_AS(fit_log_ratio(rows, false), DomainError);
}

TEST_CASE("d2 companion mode") {
    const auto t2 = arith::sieve_dk(2, 100000);
    const auto r = variance_report(30, 1e5, t2);
    CHECK(r.k == 2);
    CHECK(r.parseval_dev <= 1e-9);
    CHECK(r.decomp_dev <= 1e-9);
    CHECK(r.bound_thm1 == 1e5);
    CHECK(r.bound_thm2 == doctest::Approx(std::sqrt(3e6)));
    CHECK(r.bound_nguyen == r.bound_bhs);
    // classical divisor problem error is far below x^{1/2}
    CHECK(std::abs(progression_error(1, 1, 1e5, t2)) < std::sqrt(1e5));
}
