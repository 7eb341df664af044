// d3lab command line: one subcommand per operation family.
//
// Exit status: 0 ok, 1 a checked invariant failed (first failing tuple on
// stderr), 2 usage error (offending flag on stderr).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "d3lab/arith.hpp"
#include "d3lab/error.hpp"
#include "d3lab/expsum.hpp"
#include "d3lab/mainterm.hpp"
#include "d3lab/report.hpp"
#include "d3lab/sieve_cache.hpp"
#include "d3lab/variance.hpp"
#include "d3lab/voronoi.hpp"
#include "json.hpp"

#ifndef D3LAB_VERSION
#define D3LAB_VERSION "0.0.0"
#endif

namespace {

using namespace d3lab;
using arith::i64;
using arith::u64;
using json = nlohmann::ordered_json;
using report::Cell;
using report::Table;

struct UsageError : std::runtime_error {
    UsageError(const std::string& flag, const std::string& msg) : std::runtime_error(flag + ": " + msg) {}
};

struct Globals {
    std::string format = "csv";
    std::string out;
    std::string cache_dir;
    unsigned threads = 1;
    u64 seed = 1;
    u64 sieve_limit = 0;
    bool force = false;
};

// Per-run state filled by the subcommand.
struct Run {
    std::optional<Table> table;
    json metadata = json::object();
    std::vector<std::string> csv_meta;  // keys of metadata echoed as "# k=v" lines above a CSV
    std::optional<std::string> scalar;  // bare value instead of a table
    json scalar_json;
    std::string failure;                // first failing tuple, empty if all checks held
    std::vector<std::string> notes;     // summary lines for stderr
};

std::string num(double v) { return report::format_number(v); }

json jnum(double v) { return std::isfinite(v) ? json(report::round12(v)) : json(report::format_number(v)); }

void emit(const Globals& g, const Run& run) {
    std::ostringstream os;
    if (run.scalar) {
        if (g.format == "json")
            os << run.scalar_json.dump(2) << '\n';
        else
            os << *run.scalar << '\n';
    } else if (run.table) {
        if (g.format == "json") {
            os << run.table->to_json(run.metadata).dump(2) << '\n';
        } else {
            for (const auto& k : run.csv_meta) {
                const auto& v = run.metadata.at(k);
                os << "# " << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
            }
            run.table->write_csv(os);
        }
    }
    if (g.out.empty()) {
        std::cout << os.str();
        std::cout.flush();
        return;
    }
    std::ofstream f(g.out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + g.out + " for writing");
    f << os.str();
    if (!f) throw IoError("write failed for " + g.out);
}

json base_metadata(const std::string& cmd) {
    json m = json::object();
    m["command"] = cmd;
    m["version"] = D3LAB_VERSION;
    return m;
}

arith::DivisorTable load_table(const Globals& g, int k, double x) {
    u64 limit = static_cast<u64>(std::floor(x));
    limit = std::max(limit, g.sieve_limit);
    if (g.cache_dir.empty()) return arith::sieve_dk(k, limit);
    return sieve_cache::load_or_build(g.cache_dir, k, limit, std::cerr);
}

expsum::Triple triple(const std::vector<i64>& v) { return {v[0], v[1], v[2]}; }

void need_coprime(i64 h, i64 q) {
    if (std::gcd(arith::mod(h, q), q) != 1) throw UsageError("--h", "must be coprime to --q");
}

void x_range(double x) {
    if (!(x >= 2)) throw UsageError("--x", "must be >= 2");
    if (x > static_cast<double>(arith::DivisorTable::kMaxLimit)) throw UsageError("--x", "above the sieve capacity");
}

// ---- config file ----

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--config", "cannot read " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("--config", path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto l = s.find_first_not_of(" \t\r");
            const auto r = s.find_last_not_of(" \t\r");
            return l == std::string::npos ? std::string() : s.substr(l, r - l + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

// Splices config values for options not given on the command line right
// after the subcommand token, so explicit flags always win.
std::vector<std::string> merge_config(const CLI::App& app, std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    const auto kv = read_config(path);
    std::size_t sub_at = args.size();
    const CLI::App* sub = nullptr;
    for (std::size_t i = 1; i < args.size() && !sub; ++i) {
        for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; }))
            if (s->get_name() == args[i]) {
                sub = s;
                sub_at = i;
                break;
            }
    }
    std::map<std::string, const CLI::Option*> known;
    auto collect = [&](const CLI::App* a) {
        for (const auto* o : a->get_options())
            for (const auto& n : o->get_lnames()) known[n] = o;
    };
    collect(&app);
    if (sub) collect(sub);
    std::vector<std::string> extra;
    for (const auto& [key, value] : kv) {
        if (key == "config") continue;
        const auto it = known.find(key);
        if (it == known.end()) throw UsageError("--config", "unknown key '" + key + "'");
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        if (it->second->get_type_size() == 0) {
            if (value == "1" || value == "true" || value == "on" || value == "yes") extra.push_back(flag);
        } else {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    const std::size_t at = sub ? sub_at + 1 : args.size();
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
    return args;
}

// ---- subcommands ----

void add_sieve(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("sieve", "Table of d_k(n), n <= x, by the multiplicative linear sieve; cached on disk with --cache-dir");
    static double x = 1e6;
    static int k = 3;
    s->add_option("--x", x, "sieve limit")->required();
    s->add_option("--k", k, "fold count")->check(CLI::Range(2, 4));
    s->callback([&] {
        x_range(x);
        const auto t = load_table(g, k, x);
        u64 sum = 0, mx = 0;
        for (u64 n = 1; n <= t.limit(); ++n) {
            sum += t[n];
            mx = std::max<u64>(mx, t[n]);
        }
        Table tab({"k", "N", "sum_dk", "max_dk", "cache"});
        tab.add_row({std::int64_t{k}, static_cast<std::int64_t>(t.limit()), static_cast<std::int64_t>(sum),
                     static_cast<std::int64_t>(mx),
                     g.cache_dir.empty() ? std::string() : sieve_cache::cache_path(g.cache_dir, k, t.limit()).string()});
        run.table = std::move(tab);
        run.metadata = base_metadata("sieve");
        run.metadata["sieve_limit"] = t.limit();
    });
}

void add_csum(CLI::App& app, Globals&, Run& run) {
    auto* s = app.add_subcommand("csum", "Ramanujan sum c_q(n) (multiplicative evaluation, checked against the direct sum)");
    static i64 q = 1, n = 0;
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->add_option("--n", n, "argument")->required();
    s->callback([&] {
        const i64 v = arith::ramanujan_sum(q, n);
        if (q <= 100000) {
            const i64 b = arith::ramanujan_sum_bruteforce(q, n);
            if (b != v)
                run.failure = "q=" + std::to_string(q) + " n=" + std::to_string(n) + " multiplicative=" +
                              std::to_string(v) + " direct=" + std::to_string(b);
        }
        run.scalar = std::to_string(v);
        run.scalar_json = {{"q", q}, {"n", n}, {"c_q(n)", v}};
    });
}

void add_kloosterman(CLI::App& app, Globals&, Run& run) {
    auto* s = app.add_subcommand("kloosterman", "Kloosterman sum S(n, m; q) over invertible residues");
    static i64 q = 1, n = 0, m = 0;
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->add_option("--n", n, "first argument")->required();
    s->add_option("--m", m, "second argument")->required();
    s->callback([&] {
        const auto v = arith::kloosterman_sum(n, m, q);
        if (std::abs(v.imag()) > 1e-6 * (1 + static_cast<double>(q)))
            run.failure = "q=" + std::to_string(q) + " n=" + std::to_string(n) + " m=" + std::to_string(m) +
                          " imaginary part " + num(v.imag());
        run.scalar = num(v.real());
        run.scalar_json = {{"q", q}, {"n", n}, {"m", m}, {"S", jnum(v.real())}};
    });
}

void add_rsum(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("rsum", "Complete triple sum R_{a,b,c}(h/q) of the Voronoi dual side; divisor reduction vs literal loop");
    static i64 q = 1, h = 1;
    static std::vector<i64> t = {1, 1, 1};
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->add_option("--h", h, "numerator, coprime to q");
    s->add_option("--t", t, "a,b,c")->delimiter(',')->expected(3);
    s->callback([&] {
        need_coprime(h, q);
        const auto pt = arith::ReducedFraction::checked(h, q);
        const double fast = expsum::r_sum_fast(triple(t), pt).real();
        double brute = std::nan("");
        if (q <= expsum::kBruteForceMaxQ || g.force) {
            brute = expsum::r_sum_bruteforce(triple(t), pt, true).real();
            if (std::abs(fast - brute) > 1e-6 * (1 + std::abs(brute)))
                run.failure = "q=" + std::to_string(q) + " h=" + std::to_string(h) + " fast=" + num(fast) +
                              " brute=" + num(brute);
        } else {
            run.notes.push_back("brute force skipped above q=" + std::to_string(expsum::kBruteForceMaxQ) +
                                " (use --force)");
        }
        Table tab({"q", "h", "a", "b", "c", "fast", "brute"});
        tab.add_row({q, arith::mod(h, q), t[0], t[1], t[2], fast, brute});
        run.table = std::move(tab);
        run.metadata = base_metadata("rsum");
    });
}

void add_asum(CLI::App& app, Globals&, Run& run) {
    auto* s = app.add_subcommand("asum", "A_{h/q}(n): sum of R_{a,b,c}(h/q) over ordered factorisations abc = n");
    static i64 q = 1, h = 1;
    static u64 n = 1;
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->add_option("--h", h, "numerator, coprime to q");
    s->add_option("--n", n, "argument")->required()->check(CLI::PositiveNumber);
    s->callback([&] {
        need_coprime(h, q);
        const auto v = expsum::a_sum(arith::ReducedFraction::checked(h, q), n);
        Table tab({"q", "h", "n", "A"});
        tab.add_row({q, arith::mod(h, q), static_cast<std::int64_t>(n), v.real()});
        run.table = std::move(tab);
        run.metadata = base_metadata("asum");
    });
}

void add_corr(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("corr", "Correlation S(q) = sum over reduced h of R_t(h/q) conj R_t2(h/q) (Lemma 2 sum)");
    static i64 q = 1;
    static std::vector<i64> t = {1, 1, 1}, t2 = {1, 1, 1};
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->add_option("--t", t, "a,b,c")->delimiter(',')->expected(3);
    s->add_option("--t2", t2, "a',b',c'")->delimiter(',')->expected(3);
    s->callback([&] {
        const auto v = expsum::correlation_sum(triple(t), triple(t2), q, g.force);
        Table tab({"q", "a", "b", "c", "a2", "b2", "c2", "S"});
        tab.add_row({q, t[0], t[1], t[2], t2[0], t2[1], t2[2], v.real()});
        run.table = std::move(tab);
        run.metadata = base_metadata("corr");
    });
}

void add_lemma2(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("lemma2-check", "Lemma 2: multiplicativity of the correlation sum over coprime q1 q2 <= --q");
    static i64 q = 60;
    static u64 n = 16;
    s->add_option("--q", q, "largest product q1 q2")->check(CLI::Range(6, 60));
    s->add_option("--n", n, "triple pairs per (q1, q2)")->check(CLI::PositiveNumber);
    s->callback([&] {
        const auto reps = expsum::lemma2_scan(q, n, g.seed, g.threads);
        Table tab({"q1", "q2", "a", "b", "c", "a2", "b2", "c2", "s12", "s1", "s2", "abs_dev", "split_pairs",
                   "split_max_dev", "pass"});
        for (const auto& r : reps) {
            tab.add_row({r.q1, r.q2, r.t.a, r.t.b, r.t.c, r.t2.a, r.t2.b, r.t2.c, r.s12, r.s1, r.s2, r.abs_dev,
                         std::int64_t{r.split_pairs}, r.split_max_dev, std::int64_t{r.pass() ? 1 : 0}});
            if (!r.pass() && run.failure.empty()) {
                std::ostringstream os;
                os << "q1=" << r.q1 << " q2=" << r.q2 << " t=(" << r.t.a << ',' << r.t.b << ',' << r.t.c << ") t2=("
                   << r.t2.a << ',' << r.t2.b << ',' << r.t2.c << ") S(q1q2)=" << num(r.s12)
                   << " S(q1)S(q2)=" << num(r.s1 * r.s2);
                run.failure = os.str();
            }
        }
        run.notes.push_back("lemma2: " + std::to_string(reps.size()) + " tuples");
        run.table = std::move(tab);
        run.metadata = base_metadata("lemma2-check");
        run.metadata["seed"] = g.seed;
    });
}

void add_lemma3(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("lemma3-check", "Lemma 3: prime-power closed form of calS against brute force, full catalog");
    static i64 p = 2;
    static int k = 1;
    static u64 n = 20000;
    s->add_option("--p", p, "prime")->required()->check(CLI::PositiveNumber);
    s->add_option("--k", k, "exponent")->check(CLI::Range(1, 12));
    s->add_option("--n", n, "samples when p^k > 32")->check(CLI::PositiveNumber);
    s->callback([&] {
        if (!arith::is_prime(static_cast<u64>(p))) throw UsageError("--p", "must be prime");
        const auto cat = expsum::lemma3_catalog(p, k, g.seed, n, 32, g.threads);
        Table tab({"q", "p", "a", "a2", "b", "b2", "brute", "closed", "label", "match", "stated", "stated_match"});
        for (const auto& r : cat.rows)
            tab.add_row({r.q, r.p, r.a, r.a2, r.b, r.b2, r.brute, r.proof.value, expsum::label_name(r.proof.label),
                         std::string(r.proof_match ? "match" : "mismatch"), r.stated.value,
                         std::string(r.stated_match ? "match" : "mismatch")});
        const double frac = cat.total ? static_cast<double>(cat.proof_matches) / static_cast<double>(cat.total) : 1.0;
        run.notes.push_back("lemma3: " + std::to_string(cat.proof_matches) + "/" + std::to_string(cat.total) +
                            " match, stated reading " + std::to_string(cat.stated_matches) + "/" +
                            std::to_string(cat.total));
        if (frac < 0.99) {
            for (const auto& r : cat.rows)
                if (!r.proof_match) {
                    run.failure = "q=" + std::to_string(r.q) + " (a,a',b,b')=(" + std::to_string(r.a) + "," +
                                  std::to_string(r.a2) + "," + std::to_string(r.b) + "," + std::to_string(r.b2) +
                                  ") brute=" + num(r.brute) + " closed=" + num(r.proof.value);
                    break;
                }
        }
        run.table = std::move(tab);
        run.metadata = base_metadata("lemma3-check");
        run.metadata["seed"] = g.seed;
        run.metadata["match_fraction"] = jnum(frac);
    });
}

void add_lemma4(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("lemma4-scan", "Lemma 4 and the critical bound: max ratios per modulus and the fitted (1+log q)^A constants");
    static i64 q = 60, n = 6;
    static std::string family = "lemma4";
    s->add_option("--q", q, "base family moduli <= q; the doubled family runs to 2q")->check(CLI::Range(2, 200));
    s->add_option("--n", n, "largest triple entry")->check(CLI::Range(1, 12));
    s->add_option("--family", family, "lemma4 | critical")->check(CLI::IsMember({"lemma4", "critical"}));
    s->callback([&] {
        const auto samples = family == "lemma4" ? expsum::lemma4_scan(2 * q, n, g.threads)
                                                : expsum::critical_scan(2 * q, n, g.threads);
        const auto fit = expsum::fit_log_power(samples, q);
        Table tab({"q", "ratio"});
        for (const auto& r : samples) tab.add_row({r.q, r.ratio});
        run.table = std::move(tab);
        run.metadata = base_metadata("lemma4-scan");
        run.metadata["family"] = family;
        auto fj = json::array();
        for (int A = 0; A <= 3; ++A) {
            const auto i = static_cast<std::size_t>(A);
            fj.push_back({{"A", A},
                          {"C", jnum(fit.constants[i])},
                          {"C_doubled", jnum(fit.doubled[i])},
                          {"stability", jnum(fit.stability[i])}});
            run.notes.push_back("A=" + std::to_string(A) + " C=" + num(fit.constants[i]) + " doubled=" +
                                num(fit.doubled[i]) + " ratio=" + num(fit.stability[i]));
        }
        run.metadata["fit"] = fj;
        run.metadata["best_A"] = fit.best;
        if (fit.best < 0) run.failure = "no A <= 3 keeps the constant within x3 when the family is doubled";
    });
}

void add_corr_identity(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("corr-identity", "Orthogonality of A_{h/q}: sum_h A(n) conj A(m) against q^3 c_q(n-m) d_3(n) d_3(m)");
    static u64 n = 1, m = 1;
    static i64 q = 1;
    s->add_option("--n", n, "first argument")->required()->check(CLI::PositiveNumber);
    s->add_option("--m", m, "second argument")->required()->check(CLI::PositiveNumber);
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->callback([&] {
        const auto r = expsum::corr_identity(n, m, q, g.force);
        Table tab({"n", "m", "q", "lhs_re", "lhs_im", "rhs", "deviation"});
        tab.add_row({static_cast<std::int64_t>(n), static_cast<std::int64_t>(m), q, r.lhs_re, r.lhs_im, r.rhs,
                     r.deviation});
        if (r.deviation > 1e-6)
            run.failure = "n=" + std::to_string(n) + " m=" + std::to_string(m) + " q=" + std::to_string(q) +
                          " deviation=" + num(r.deviation);
        run.table = std::move(tab);
        run.metadata = base_metadata("corr-identity");
    });
}

void add_mainterm(CLI::App& app, Globals&, Run& run) {
    auto* s = app.add_subcommand("mainterm", "Main term M_x(q, a) = x(A2 log^2 x + A1 log x + A0) from the residue at s = 1");
    static i64 q = 1, a = 1;
    static int k = 3;
    static double x = 0;
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->add_option("--a", a, "residue class");
    s->add_option("--k", k, "fold count")->check(CLI::Range(2, 3));
    s->add_option("--x", x, "also evaluate at x");
    s->callback([&] {
        const i64 delta = std::gcd(arith::mod(a, q), q) == 0 ? q : std::gcd(arith::mod(a, q), q);
        const auto p = mainterm::mainterm_poly(q, delta, k);
        Table tab({"q", "delta", "k", "A2", "A1", "A0", "x", "M"});
        tab.add_row({p.q, p.delta, std::int64_t{p.k}, p.A2, p.A1, p.A0, x, x > 0 ? p.evaluate(x) : std::nan("")});
        run.table = std::move(tab);
        run.metadata = base_metadata("mainterm");
        json poly = {{"q", p.q}, {"delta", p.delta}, {"k", p.k}, {"A2", jnum(p.A2)}, {"A1", jnum(p.A1)}, {"A0", jnum(p.A0)}};
        run.metadata["MainTermPoly"] = poly;
    });
}

void add_kernel(CLI::App& app, Globals&, Run& run) {
    auto* s = app.add_subcommand("kernel", "Voronoi kernel U(X) by contour integration of (Gamma(s/2)/Gamma((1-s)/2))^3 X^-s");
    static double x = 1000;
    static u64 n = 31;
    static double c = 0.10;
    s->add_option("--x", x, "largest X; samples are log spaced from 1")->check(CLI::Range(1.0, 1e8));
    s->add_option("--n", n, "number of samples")->check(CLI::Range(2, 100000));
    s->add_option("--c-abscissa", c, "Re s of the vertical line, in (0, 1/6)");
    s->callback([&] {
        voronoi::KernelQuadrature quad;
        quad.c = c;
        try {
            quad.validate();
        } catch (const DomainError& e) {
            throw UsageError("--c-abscissa", e.what());
        }
        Table tab({"X", "U", "T", "imag_residue"});
        for (u64 i = 0; i < n; ++i) {
            const double X = std::pow(x, static_cast<double>(i) / static_cast<double>(n - 1));
            const auto v = voronoi::kernel_U_detail(X, quad);
            tab.add_row({X, v.value, v.T, v.imag_residue});
        }
        run.table = std::move(tab);
        run.metadata = base_metadata("kernel");
        run.metadata["c"] = jnum(c);
        run.metadata["T"] = "max(10, 8 X^(1/3))";
        run.csv_meta = {"c", "T"};
    });
}

void add_wtransform(CLI::App& app, Globals&, Run& run) {
    auto* s = app.add_subcommand("wtransform", "Transform hat w_q(n) = int w(t) U(pi^3 n t / q^3) dt of the smooth window");
    static double x = 1e4, Y = 100;
    static i64 q = 10;
    static u64 n_max = 1000;
    s->add_option("--x", x, "window end")->required();
    s->add_option("--Y", Y, "ramp width")->required();
    s->add_option("--q", q, "modulus")->required()->check(CLI::PositiveNumber);
    s->add_option("--n-max", n_max, "largest n")->check(CLI::Range(u64{1}, u64{1} << 24));
    s->callback([&] {
        if (!(Y >= 1)) throw UsageError("--Y", "must be >= 1");
        if (!(x >= 3 * Y)) throw UsageError("--x", "must be >= 3 Y");
        const auto w = voronoi::smooth_window(x, Y);
        const voronoi::WTransformTable tabw(q, n_max, w);
        Table tab({"n", "N", "w_hat"});
        for (u64 n = 1; n <= n_max; ++n)
            tab.add_row({static_cast<std::int64_t>(n), voronoi::dual_frequency(q, n), tabw(n)});
        run.table = std::move(tab);
        run.metadata = base_metadata("wtransform");
        run.metadata["x"] = jnum(x);
        run.metadata["Y"] = jnum(Y);
        run.metadata["q"] = q;
        run.metadata["c"] = jnum(tabw.abscissa());
        run.metadata["T"] = jnum(tabw.tau_max());
        run.metadata["cutoff"] = jnum(voronoi::w_transform_cutoff(x, Y, q));
        run.csv_meta = {"x", "Y", "q", "c", "T"};
    });
}

void add_voronoi_compare(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("voronoi-compare", "Voronoi formula for d_3: first dual term against the smoothed twisted sum");
    static double x = 1e4, Y = 1e3;
    static i64 q = 2, h = 1;
    static u64 n_max = 0;
    s->add_option("--x", x, "window end")->required();
    s->add_option("--Y", Y, "ramp width")->required();
    s->add_option("--q", q, "modulus")->required()->check(CLI::Range(i64{2}, i64{60}));
    s->add_option("--h", h, "numerator, coprime to q");
    s->add_option("--n-max", n_max, "fixed dual length (0: double until stable)");
    s->callback([&] {
        x_range(x);
        if (!(Y >= 1)) throw UsageError("--Y", "must be >= 1");
        if (!(x >= 3 * Y)) throw UsageError("--x", "must be >= 3 Y");
        need_coprime(h, q);
        const auto pt = arith::ReducedFraction::checked(h, q);
        const auto w = voronoi::smooth_window(x, Y);
        const auto t = load_table(g, 3, x);
        const auto direct = voronoi::smoothed_delta_direct(pt, w, t);
        const auto dual = voronoi::dual_sum_eval(pt, w, n_max, 1e-7, g.threads);
        const double ratio = std::abs(dual.value) / std::abs(direct);
        Table tab({"q", "h", "x", "Y", "direct_re", "direct_im", "dual_re", "dual_im", "ratio", "n_used", "cutoff",
                   "stability"});
        tab.add_row({q, pt.numerator(), x, Y, direct.real(), direct.imag(), dual.value.real(), dual.value.imag(), ratio,
                     static_cast<std::int64_t>(dual.n_used), dual.cutoff, dual.stability});
        if (!(ratio >= 0.1 && ratio <= 10))
            run.failure = "q=" + std::to_string(q) + " h=" + std::to_string(h) + " |dual|/|direct|=" + num(ratio);
        run.table = std::move(tab);
        run.metadata = base_metadata("voronoi-compare");
        run.metadata["sieve_limit"] = t.limit();
        run.metadata["Y"] = jnum(Y);
    });
}

struct XQK {
    double x = 1e4;
    i64 q = 1;
    int k = 3;
};

void xqk_options(CLI::App* s, XQK& a) {
    s->add_option("--x", a.x, "summation limit")->required();
    s->add_option("--q", a.q, "modulus")->required()->check(CLI::Range(i64{1}, i64{1} << 31));
    s->add_option("--k", a.k, "fold count (2 runs the d_2 companion)")->check(CLI::Range(2, 3));
}

json variance_metadata(const std::string& cmd, u64 limit, double x, i64 q) {
    auto m = base_metadata(cmd);
    m["sieve_limit"] = limit;
    m["Y"] = jnum(std::sqrt(x) * std::pow(static_cast<double>(q), 0.75));
    return m;
}

void add_delta(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("delta", "Delta(a/q) = sum_{n<=x} d_k(n) e(na/q) - f for all a (Theorem 1 summand)");
    static XQK a;
    xqk_options(s, a);
    s->callback([&] {
        x_range(a.x);
        const auto t = load_table(g, a.k, a.x);
        const auto D = variance::delta_all(a.q, a.x, t);
        Table tab({"a", "re", "im", "abs"});
        for (std::size_t i = 0; i < D.size(); ++i)
            tab.add_row({static_cast<std::int64_t>(i), D[i].real(), D[i].imag(), std::abs(D[i])});
        run.table = std::move(tab);
        run.metadata = variance_metadata("delta", t.limit(), a.x, a.q);
    });
}

void check_report(const variance::VarianceReport& r, Run& run) {
    if (!run.failure.empty()) return;
    auto where = [&] { return "x=" + num(r.x) + " q=" + std::to_string(r.q) + " "; };
    if (!(r.parseval_dev <= 1e-9))
        run.failure = where() + "parseval_dev=" + num(r.parseval_dev);
    else if (!std::isnan(r.decomp_dev) && !(r.decomp_dev <= 1e-9))
        run.failure = where() + "decomp_dev=" + num(r.decomp_dev);
    else if (!(r.hermitian_dev <= 1e-9))
        run.failure = where() + "hermitian_dev=" + num(r.hermitian_dev);
}

void add_variance(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("variance", "Theorems 1 and 2: variance report for one (x, q) with Parseval and decomposition checks");
    static XQK a;
    xqk_options(s, a);
    s->callback([&] {
        x_range(a.x);
        const auto t = load_table(g, a.k, a.x);
        const auto r = variance::variance_report(a.q, a.x, t);
        Table tab(variance::report_columns());
        tab.add_row(variance::report_row(r));
        check_report(r, run);
        run.table = std::move(tab);
        run.metadata = variance_metadata("variance", t.limit(), a.x, a.q);
        run.metadata["k"] = a.k;
        run.metadata["V1_all"] = jnum(r.V1_all);
        run.metadata["bound_bhs"] = jnum(r.bound_bhs);
    });
}

void add_decomp(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("decomp-check", "Divisor decomposition sum_a |Delta(a/q)|^2 = sum_{d|q} sum'_a |Delta(a/d)|^2");
    static XQK a;
    xqk_options(s, a);
    s->callback([&] {
        x_range(a.x);
        const auto t = load_table(g, a.k, a.x);
        const double dev = variance::divisor_decomposition_check(a.q, a.x, t);
        Table tab({"x", "q", "decomp_dev"});
        tab.add_row({a.x, a.q, dev});
        if (!(dev <= 1e-9)) run.failure = "x=" + num(a.x) + " q=" + std::to_string(a.q) + " decomp_dev=" + num(dev);
        run.table = std::move(tab);
        run.metadata = variance_metadata("decomp-check", t.limit(), a.x, a.q);
    });
}

std::vector<std::pair<double, i64>> parse_grid(const std::string& spec, double dense_x) {
    if (spec == "default") return variance::default_grid();
    if (spec == "dense") return variance::dense_grid(dense_x);
    std::vector<std::pair<double, i64>> g;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("--grid", "expected default, dense or x:q;x:q...");
        try {
            std::size_t used = 0;
            const double x = std::stod(item.substr(0, colon), &used);
            const long long q = std::stoll(item.substr(colon + 1));
            if (x < 2 || q < 1) throw std::invalid_argument("range");
            g.emplace_back(x, static_cast<i64>(q));
        } catch (const std::exception&) {
            throw UsageError("--grid", "bad entry '" + item + "'");
        }
    }
    if (g.empty()) throw UsageError("--grid", "empty grid");
    return g;
}

void add_scan(CLI::App& app, Globals& g, Run& run) {
    auto* s = app.add_subcommand("scan", "Theorems 1 and 2: exponent scan of V2/(x q^1.5) and V1/(x^0.5 q^0.75) with log-log fits");
    static std::string grid = "default";
    static int k = 3;
    static double x = 1e5;
    s->add_option("--grid", grid, "default | dense | x:q;x:q;...");
    s->add_option("--k", k, "fold count")->check(CLI::Range(2, 3));
    s->add_option("--x", x, "x for the dense grid");
    s->callback([&] {
        const auto pts = parse_grid(grid, x);
        double xmax = 0;
        for (const auto& p : pts) xmax = std::max(xmax, p.first);
        x_range(xmax);
        const auto t = load_table(g, k, xmax);
        const auto res = variance::exponent_scan(pts, t, g.threads);
        Table tab(variance::report_columns());
        for (const auto& r : res.rows) {
            tab.add_row(variance::report_row(r));
            check_report(r, run);
        }
        run.table = std::move(tab);
        run.metadata = base_metadata("scan");
        run.metadata["sieve_limit"] = t.limit();
        run.metadata["Y"] = "x^(1/2) q^(3/4)";
        run.metadata["k"] = k;
        if (res.rows.size() >= 3) {
            auto fit = [](const variance::ScanFit& f) {
                return json{{"intercept", jnum(f.intercept)}, {"slope_logx", jnum(f.slope_logx)},
                            {"slope_logq", jnum(f.slope_logq)}};
            };
            run.metadata["fit_ratio2"] = fit(res.fit2);
            run.metadata["fit_ratio1"] = fit(res.fit1);
            run.notes.push_back("rho2 slopes: log x " + num(res.fit2.slope_logx) + ", log q " +
                                num(res.fit2.slope_logq));
            run.notes.push_back("rho1 slopes: log x " + num(res.fit1.slope_logx) + ", log q " +
                                num(res.fit1.slope_logq));
        }
        run.metadata["thm1_constant"] = jnum(res.thm1_constant);
        run.metadata["thm1_spread"] = jnum(res.thm1_spread);
    });
}

int run_main(int argc, char** argv) {
    CLI::App app{"d3lab: experiments on the ternary divisor function in arithmetic progressions"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    Run run;
    std::string config;
    app.add_option("--format", g.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", g.out, "write the report here instead of stdout");
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
    app.add_option("--cache-dir", g.cache_dir, "directory for sieve table files");
    app.add_option("--seed", g.seed, "seed for sampled scans");
    app.add_option("--sieve-limit", g.sieve_limit, "sieve at least this far");
    app.add_flag("--force", g.force, "override cost guards");
    app.add_option("--config", config, "flat key=value file; flags on the command line win");

    add_sieve(app, g, run);
    add_csum(app, g, run);
    add_kloosterman(app, g, run);
    add_rsum(app, g, run);
    add_asum(app, g, run);
    add_corr(app, g, run);
    add_lemma2(app, g, run);
    add_lemma3(app, g, run);
    add_lemma4(app, g, run);
    add_corr_identity(app, g, run);
    add_mainterm(app, g, run);
    add_kernel(app, g, run);
    add_wtransform(app, g, run);
    add_voronoi_compare(app, g, run);
    add_delta(app, g, run);
    add_variance(app, g, run);
    add_decomp(app, g, run);
    add_scan(app, g, run);

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = merge_config(app, args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const GuardError& e) {
        std::cerr << "error: " << e.what() << " (--force overrides)\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        emit(g, run);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    for (const auto& n : run.notes) std::cerr << n << '\n';
    if (!run.failure.empty()) {
        std::cerr << "check failed: " << run.failure << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run_main(argc, argv); }
