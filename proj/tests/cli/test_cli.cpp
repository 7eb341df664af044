#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Result {
    int status;
    std::string out;
};

// stdout only; stderr goes to a scratch file read back on demand
Result run(const std::string& args, std::string* err = nullptr) {
    const auto errfile = std::filesystem::temp_directory_path() / "d3lab_cli_stderr.txt";
    const std::string cmd = std::string(D3LAB_CLI) + " " + args + " 2>" + errfile.string();
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    const int st = pclose(p);
    if (err) {
        std::ifstream in(errfile);
        std::stringstream ss;
        ss << in.rdbuf();
        *err = ss.str();
    }
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

int lines(const std::string& s) {
    int c = 0;
    for (char ch : s) c += ch == '\n';
    return c;
}

std::string field(const std::string& csv_line, int idx) {
    std::stringstream ss(csv_line);
    std::string f;
    for (int i = 0; i <= idx; ++i) std::getline(ss, f, ',');
    return f;
}

}  // namespace

TEST_CASE("csum prints the Ramanujan sum") {
    auto r = run("csum --q 6 --n 3");
    CHECK(r.status == 0);
    CHECK(r.out == "-2\n");
    r = run("csum --q 6 --n 3 --format json");
    CHECK(nlohmann::json::parse(r.out)["c_q(n)"] == -2);
}

TEST_CASE("variance csv is one row with Parseval plumbing intact") {
    const auto r = run("variance --x 10000 --q 30 --format csv");
    CHECK(r.status == 0);
    REQUIRE(lines(r.out) == 2);
    CHECK(r.out.rfind("x,q,V2_all,V2_prim,V2_E,V1_prim,bound_thm1,bound_thm2,bound_nguyen,ratio2,ratio1,parseval_dev,decomp_dev\n", 0) == 0);
    const auto row = r.out.substr(r.out.find('\n') + 1);
    CHECK(field(row, 0) == "10000");
    CHECK(field(row, 1) == "30");
    CHECK(std::stod(field(row, 11)) <= 1e-9);
}

TEST_CASE("variance json mirror carries metadata") {
    const auto r = run("variance --x 10000 --q 30 --format json");
    CHECK(r.status == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["metadata"]["sieve_limit"] == 10000);
    CHECK(j["metadata"].contains("Y"));
    CHECK(j["metadata"].contains("version"));
    CHECK(j["rows"].size() == 1);
    CHECK(j["rows"][0]["q"] == 30);
}

TEST_CASE("lemma3 catalog row") {
    const auto r = run("lemma3-check --p 3 --k 1");
    CHECK(r.status == 0);
    CHECK(r.out.find("\n3,3,0,0,1,1,2,2,Q_EQUALS_P,match,") != std::string::npos);
    CHECK(lines(r.out) == 82);
}

TEST_CASE("usage errors exit 2 and name the flag") {
    std::string err;
    auto r = run("csum --q 0 --n 3", &err);
    CHECK(r.status == 2);
    CHECK(err.find("--q") != std::string::npos);
    r = run("rsum --q 6 --h 2", &err);
    CHECK(r.status == 2);
    CHECK(err.find("--h") != std::string::npos);
    r = run("variance --x 1e4 --q 3 --format xml", &err);
    CHECK(r.status == 2);
    CHECK(err.find("--format") != std::string::npos);
    r = run("scan --grid 10:", &err);
    CHECK(r.status == 2);
    CHECK(err.find("--grid") != std::string::npos);
    r = run("", &err);
    CHECK(r.status == 2);
    r = run("corr --q 61", &err);
    CHECK(r.status == 2);
    CHECK(err.find("--force") != std::string::npos);
}

TEST_CASE("runtime failures exit 1") {
    std::string err;
    const auto r = run("csum --q 6 --n 3 --out /proc/d3lab_no_such_dir/out.csv", &err);
    CHECK(r.status == 1);
    CHECK(err.find("/proc/d3lab_no_such_dir/out.csv") != std::string::npos);
}

TEST_CASE("help names the result behind each subcommand") {
    CHECK(run("lemma2-check --help").out.find("Lemma 2") != std::string::npos);
    CHECK(run("lemma3-check --help").out.find("Lemma 3") != std::string::npos);
    CHECK(run("lemma4-scan --help").out.find("Lemma 4") != std::string::npos);
    CHECK(run("variance --help").out.find("Theorem") != std::string::npos);
    CHECK(run("scan --help").out.find("Theorem") != std::string::npos);
    CHECK(run("voronoi-compare --help").out.find("Voronoi") != std::string::npos);
    CHECK(run("--help").status == 0);
}

TEST_CASE("config file with flag override") {
    const auto cfg = std::filesystem::temp_directory_path() / "d3lab_cli_test.cfg";
    {
        std::ofstream f(cfg);
        f << "# comment\nq = 6\nn=3\n";
    }
    CHECK(run("csum --config " + cfg.string()).out == "-2\n");
    CHECK(run("csum --config " + cfg.string() + " --n 4").out == "-1\n");
    {
        std::ofstream f(cfg);
        f << "bogus=1\n";
    }
    std::string err;
    CHECK(run("csum --q 6 --n 3 --config " + cfg.string(), &err).status == 2);
    CHECK(err.find("bogus") != std::string::npos);
    std::filesystem::remove(cfg);
}

TEST_CASE("kernel and wtransform dumps carry a metadata header") {
    auto r = run("kernel --x 100 --n 3");
    CHECK(r.status == 0);
    CHECK(r.out.rfind("# c=0.1\n# T=", 0) == 0);
    CHECK(r.out.find("X,U,T,imag_residue\n1,0.205460487225,") != std::string::npos);
    r = run("wtransform --x 10000 --Y 1000 --q 3 --n-max 4");
    CHECK(r.status == 0);
    for (const char* k : {"# x=", "# Y=", "# q=3", "# c=", "# T="}) CHECK(r.out.find(k) != std::string::npos);
    CHECK(r.out.find("n,N,w_hat\n") != std::string::npos);
    CHECK(lines(r.out) == 5 + 1 + 4);
}

TEST_CASE("reports are identical across thread counts and written with --out") {
    const auto dir = std::filesystem::temp_directory_path() / "d3lab_cli_threads";
    std::filesystem::create_directories(dir);
    const auto a = run("scan --grid '10000:22;10000:100;30000:31;30000:174' --threads 1");
    const auto b = run("scan --grid '10000:22;10000:100;30000:31;30000:174' --threads 4");
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    const auto f = (dir / "l2.csv").string();
    CHECK(run("lemma2-check --q 30 --n 4 --threads 3 --out " + f).status == 0);
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == run("lemma2-check --q 30 --n 4 --threads 1").out);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sieve uses the cache directory") {
    const auto dir = std::filesystem::temp_directory_path() / "d3lab_cli_cache";
    std::filesystem::remove_all(dir);
    std::string err;
    auto r = run("sieve --x 1000 --cache-dir " + dir.string(), &err);
    CHECK(r.status == 0);
    CHECK(std::filesystem::exists(dir / "d3_1000.d3pl"));
    {
        std::fstream io(dir / "d3_1000.d3pl", std::ios::binary | std::ios::in | std::ios::out);
        io.seekp(40);
        io.put('\x7f');
    }
    const auto again = run("sieve --x 1000 --cache-dir " + dir.string(), &err);
    CHECK(again.status == 0);
    CHECK(err.find("rebuilding") != std::string::npos);
    CHECK(again.out == r.out);
    std::filesystem::remove_all(dir);
}

TEST_CASE("mainterm emits the polynomial") {
    const auto r = run("mainterm --q 1 --x 100000 --format json");
    CHECK(r.status == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["metadata"]["MainTermPoly"]["A2"].get<double>() == doctest::Approx(0.5));
}
