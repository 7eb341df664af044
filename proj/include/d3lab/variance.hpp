#pragma once

// Variance of d_k in progressions: residue-class sums, the twisted errors
// Delta(a/q) for all a at once, the progression errors E_x(q, a), and the
// aggregates compared against the Theorem 1 / Theorem 2 bounds and the older
// piecewise bounds of Banks, Heath-Brown and Shparlinski (k = 2) and Nguyen (k = 3).

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "d3lab/arith.hpp"
#include "d3lab/report.hpp"

namespace d3lab::variance {

using arith::i64;
using arith::u64;
using cplx = std::complex<double>;

// S_r = sum_{n <= x, n = r mod q} d_k(n), r = 0..q-1. Exact integers.
std::vector<u64> progression_sums(i64 q, double x, const arith::DivisorTable& table);

enum class Transform { Chirp, Direct };

// Delta(a/q) for a = 0..q-1: DFT of S_r with e(+ra/q), minus f of the reduced fraction.
std::vector<cplx> delta_all(i64 q, double x, const arith::DivisorTable& table, Transform t = Transform::Chirp);

// E_x(q, a) = S_{a mod q} - M_x(q, a), 1 <= a <= q.
double progression_error(i64 q, i64 a, double x, const arith::DivisorTable& table);
// All a = 1..q, stored at index a mod q.
std::vector<double> progression_errors(i64 q, double x, const arith::DivisorTable& table);

// Reference bound formulas with the x^eps factor dropped. NaN outside their ranges.
double bound_thm1(double x, i64 q);    // x q^{3/2}
double bound_thm2(double x, i64 q);    // x^{1/2} q^{3/4}
double bound_nguyen(double x, i64 q);  // Nguyen, k = 3, q <= x^{2/3}
double bound_bhs(double x, i64 q);     // Banks et al., k = 2, q <= x
double bound_blomer_v2(double x);      // x, k = 2
double bound_blomer_v1(double x, i64 q);  // (x q)^{1/2}, k = 2

struct VarianceReport {
    double x = 0;
    i64 q = 0;
    int k = 3;
    double V2_all = 0, V2_prim = 0, V2_E = 0, V1_prim = 0, V1_all = 0;
    double bound_thm1 = 0, bound_thm2 = 0, bound_nguyen = 0, bound_bhs = 0;
    double ratio2 = 0;      // V2_all / bound_thm1
    double ratio1 = 0;      // V1_prim / bound_thm2
    double ratio1_all = 0;  // V1_all / bound_thm2
    double parseval_dev = 0, decomp_dev = 0, hermitian_dev = 0;
};

// For k = 2 the "thm" columns carry Blomer's bounds and nguyen carries the Banks et al. bound.
VarianceReport variance_report(i64 q, double x, const arith::DivisorTable& table, bool with_decomp = true);

// |sum_a |Delta(a/q)|^2 - sum_{d | q} sum'_{a mod d} |Delta(a/d)|^2| / left side.
double divisor_decomposition_check(i64 q, double x, const arith::DivisorTable& table);

const std::vector<std::string>& report_columns();
std::vector<report::Cell> report_row(const VarianceReport& r);

struct ScanFit {
    double intercept = 0, slope_logx = 0, slope_logq = 0;
};
// Least squares log rho = c0 + c1 log x + c2 log q.
ScanFit fit_log_ratio(const std::vector<VarianceReport>& rows, bool use_ratio1);

std::vector<std::pair<double, i64>> default_grid();
std::vector<std::pair<double, i64>> dense_grid(double x = 1e5, i64 q_lo = 2, i64 q_hi = 200);

struct ScanResult {
    std::vector<VarianceReport> rows;
    ScanFit fit2, fit1;
    // max / min of V2_all / (x q^{3/2} (1 + log x)^6) over the rows
    double thm1_constant = 0, thm1_spread = 0;
};

// Rows in grid order; grid points run in parallel, each point single-threaded.
ScanResult exponent_scan(const std::vector<std::pair<double, i64>>& grid, const arith::DivisorTable& table,
                         unsigned threads = 1, bool with_decomp = true);

}  // namespace d3lab::variance
