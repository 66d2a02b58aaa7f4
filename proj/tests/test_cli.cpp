#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "pcp/cli.hpp"

using namespace pcp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("pcp_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& name) const { return (path / name).string(); }
};

int run(std::initializer_list<std::string> args) {
    std::vector<std::string> argv{"pcp"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::vector<const char*> raw;
    for (const std::string& a : argv) raw.push_back(a.c_str());
    return cli::run_cli(static_cast<int>(raw.size()), raw.data());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("generate writes deterministic files with the naming convention") {
    TempDir tmp;
    CHECK(run({"generate", "--vertices", "10", "--k", "2", "--piles", "5", "--seeds", "1,2,3",
               "--out-dir", tmp.str("")}) == cli::kExitOk);
    for (int s : {1, 2, 3}) CHECK(fs::exists(tmp.str("v10c5k2s" + std::to_string(s) + ".pcp")));

    std::string first = slurp(tmp.str("v10c5k2s1.pcp"));
    // no overwrite without --force
    CHECK(run({"generate", "--vertices", "10", "--k", "2", "--piles", "5", "--seeds", "1",
               "--out-dir", tmp.str("")}) == cli::kExitUsage);
    CHECK(run({"generate", "--vertices", "10", "--k", "2", "--piles", "5", "--seeds", "1",
               "--out-dir", tmp.str(""), "--force"}) == cli::kExitOk);
    CHECK(slurp(tmp.str("v10c5k2s1.pcp")) == first);
}

TEST_CASE("generate rejects a non-divisible vertex count") {
    TempDir tmp;
    CHECK(run({"generate", "--vertices", "10", "--k", "3", "--piles", "5", "--seeds", "1",
               "--out-dir", tmp.str("")}) == cli::kExitUsage);
}

TEST_CASE("solve emits a csv row and exits zero on optimal") {
    TempDir tmp;
    REQUIRE(run({"generate", "--vertices", "8", "--k", "2", "--piles", "5", "--seeds", "1",
                 "--out-dir", tmp.str("")}) == cli::kExitOk);
    std::string csv = tmp.str("runs.csv");
    CHECK(run({"solve", "--instance", tmp.str("v8c5k2s1.pcp"), "--pricing", "exact", "--csv",
               csv}) == cli::kExitOk);
    std::string text = slurp(csv);
    CHECK(text.rfind(cli::kCsvSchema, 0) == 0);
    CHECK(text.find("v8c5k2s1") != std::string::npos);
    CHECK(text.find("optimal") != std::string::npos);

    CHECK(run({"solve", "--instance", tmp.str("missing.pcp")}) == cli::kExitUsage);
    CHECK(run({"solve", "--instance", tmp.str("v8c5k2s1.pcp"), "--pricing", "nope"}) ==
          cli::kExitUsage);
}

TEST_CASE("csv rows are bit-reproducible apart from wall times") {
    TempDir tmp;
    REQUIRE(run({"generate", "--vertices", "8", "--k", "2", "--piles", "2", "--seeds", "4",
                 "--out-dir", tmp.str("")}) == cli::kExitOk);
    Instance inst = read_instance(tmp.str("v8c2k2s4.pcp"));
    Config cfg;
    cfg.set("pricing.backend", "bsb");
    cfg.set("pricing.restarts", "8");
    cfg.set("qaia.steps", "200");
    cfg.set("bnp.seed", "7");
    cli::RunRecord a = cli::run_solve(inst, "x", cfg);
    cli::RunRecord b = cli::run_solve(inst, "x", cfg);
    CHECK(a.obj == b.obj);
    CHECK(a.gap_percent == b.gap_percent);
    CHECK(a.n_p == b.n_p);
    CHECK(a.n_c == b.n_c);
    CHECK(a.n_n == b.n_n);
}

TEST_CASE("bench runs a manifest and reports failures without stopping") {
    TempDir tmp;
    REQUIRE(run({"generate", "--vertices", "8", "--k", "2", "--piles", "5", "--seeds", "1,2",
                 "--out-dir", tmp.str("")}) == cli::kExitOk);
    std::string manifest = tmp.str("manifest.txt");
    {
        std::ofstream out(manifest);
        out << "# three runs, one broken\n";
        out << tmp.str("v8c5k2s1.pcp") << " exact 0\n";
        out << tmp.str("v8c5k2s2.pcp") << " exact 0\n";
        out << tmp.str("nope.pcp") << " exact 0\n";
    }
    std::string csv = tmp.str("bench.csv");
    CHECK(run({"bench", "--manifest", manifest, "--csv", csv}) == cli::kExitOk);
    std::string text = slurp(csv);
    int rows = 0;
    for (char ch : text)
        if (ch == '\n') ++rows;
    CHECK(rows == 2 + 3); // schema + header + three records
    CHECK(text.find("error") != std::string::npos);
}

TEST_CASE("report aggregates per size and backend and rejects unknown schemas") {
    TempDir tmp;
    std::string csv = tmp.str("r.csv");
    {
        std::ofstream out(csv);
        out << cli::kCsvSchema << "\n" << cli::kCsvHeader << "\n";
        out << "a,10,9,5,18,0.00,0.100,0.010,0.020,5,10,1,exact,1,optimal\n";
        out << "b,10,9,5,18,0.00,0.300,0.010,0.020,5,10,1,exact,2,optimal\n";
        out << "c,20,30,10,21,10.00,1.000,0.100,0.200,9,30,3,bsb,1,time-limit\n";
        out << "garbage row that should be skipped\n";
    }
    CHECK(run({"report", "--csv", csv, "--out-dir", tmp.str("plots")}) == cli::kExitOk);
    std::string gap = slurp(tmp.str("plots/gap_vs_v.tsv"));
    std::string tt = slurp(tmp.str("plots/time_vs_v.tsv"));
    CHECK(gap.find("V\texact\tbsb") == 0);
    CHECK(gap.find("10\t0.00\t") != std::string::npos);
    CHECK(gap.find("20\t\t10.00") != std::string::npos);
    CHECK(tt.find("10\t0.200\t") != std::string::npos); // mean of 0.1 and 0.3

    std::string bad = tmp.str("bad.csv");
    {
        std::ofstream out(bad);
        out << "schema=99\nheader\n";
    }
    CHECK(run({"report", "--csv", bad, "--out-dir", tmp.str("plots2")}) == cli::kExitInternal);
}

TEST_CASE("run record csv round trip") {
    cli::RunRecord r;
    r.instance_name = "v10c5k2s1";
    r.V = 10;
    r.E = 13;
    r.N = 5;
    r.obj = 18;
    r.gap_percent = 0.0;
    r.t_total_s = 0.5;
    r.t_rmp_s = 0.1;
    r.t_pricing_s = 0.2;
    r.n_p = 39;
    r.n_c = 120;
    r.n_n = 10;
    r.backend = "exact";
    r.seed = 1;
    r.status = "optimal";
    auto back = cli::RunRecord::from_csv(r.to_csv());
    REQUIRE(back.has_value());
    CHECK(back->instance_name == r.instance_name);
    CHECK(back->obj == r.obj);
    CHECK(back->backend == r.backend);
    CHECK(back->status == r.status);
    CHECK_FALSE(cli::RunRecord::from_csv("not,a,row").has_value());
}
