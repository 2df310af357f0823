#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qpa/report.hpp"

// QPA_CLI_PATH is injected by the build as the absolute path of the `qpa`
// binary; every case below drives the real executable end to end.

namespace fs = std::filesystem;

namespace {

const std::string kOut = "/tmp/qpa_cli_test_out";

int run_cli(const std::string& args, const std::string& stdout_file = "") {
    std::string cmd = std::string("\"") + QPA_CLI_PATH + "\" " + args;
    cmd += stdout_file.empty() ? " >/dev/null" : (" >" + stdout_file);
    cmd += " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CleanDir {
    CleanDir() { fs::remove_all(kOut); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("qpa list: prints the bundled scenarios and exits 0") {
    CleanDir guard;
    fs::create_directories(kOut);
    CHECK(run_cli("list", kOut + "/list.txt") == 0);
    const std::string out = slurp(kOut + "/list.txt");
    CHECK(out == "scenario1\nscenario2\nscenario3\nscenario4\n");
}

TEST_CASE("qpa run: writes results.csv and results.json for all six mechanisms") {
    CleanDir guard;
    const int rc = run_cli("run --scenario scenario1 --trials 4 --seed 7 --out " + kOut);
    CHECK(rc == 0);
    REQUIRE(fs::exists(kOut + "/results.csv"));
    REQUIRE(fs::exists(kOut + "/results.json"));

    std::ifstream csv(kOut + "/results.csv");
    const std::vector<qpa::CsvRow> rows = qpa::parse_results_csv(csv);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].mechanism == "qp-repl");
    CHECK(rows[0].trials == 4);
    CHECK(rows[0].has_kl);
    CHECK(!rows[2].has_kl);   // qp-multi
}

TEST_CASE("qpa run: exit codes separate usage from validation problems") {
    CleanDir guard;
    CHECK(run_cli("run --scenario scenario99 --trials 2 --out " + kOut) == 2);
    CHECK(run_cli("run --mechanisms bogus --trials 2 --out " + kOut) == 1);
    CHECK(run_cli("run --mechanisms qp-repl --replacement without --trials 2 --out " + kOut) == 1);
    CHECK(run_cli("run --replacement sideways --trials 2 --out " + kOut) == 1);
    CHECK(run_cli("run --trials 1 --out " + kOut) == 2);
    CHECK(run_cli("run --provider replay --trials 2 --out " + kOut) == 1);
    CHECK(run_cli("nonsense-subcommand") == 1);
}

TEST_CASE("qpa run: a replay trace feeds the weights") {
    CleanDir guard;
    fs::create_directories(kOut);
    {
        std::ofstream trace(kOut + "/trace.json");
        trace << R"({"trials": [
            [[0.80, 0.62, 0.67, 0.61, 0.49, 0.59],
             [0.80, 0.62, 0.67, 0.61, 0.49, 0.59],
             [0.80, 0.62, 0.67, 0.61, 0.49, 0.59]],
            [[0.70, 0.55, 0.60, 0.55, 0.45, 0.50],
             [0.70, 0.55, 0.60, 0.55, 0.45, 0.50],
             [0.70, 0.55, 0.60, 0.55, 0.45, 0.50]]
        ]})";
    }
    const int rc = run_cli("run --scenario scenario1 --provider replay --replay-file " +
                           kOut + "/trace.json --trials 4 --seed 7 --out " + kOut);
    CHECK(rc == 0);
    const std::string sidecar = slurp(kOut + "/results.json");
    CHECK(sidecar.find("\"provider\": \"replay\"") != std::string::npos);
}

TEST_CASE("qpa verify: passes, prints one line per check, writes verification.json") {
    CleanDir guard;
    fs::create_directories(kOut);
    const int rc = run_cli("verify --suite vcg --instances 5 --seed 3 --out " + kOut,
                           kOut + "/verify.txt");
    CHECK(rc == 0);
    const std::string out = slurp(kOut + "/verify.txt");
    CHECK(out.find("[ok]   vcg/exhaustive-re-enumeration") != std::string::npos);
    CHECK(out.find("[ok]   vcg/zero-coupling-zero-payments") != std::string::npos);
    CHECK(out.find("all checks passed") != std::string::npos);
    const std::string json = slurp(kOut + "/verification.json");
    CHECK(json.find("\"all_pass\": true") != std::string::npos);

    CHECK(run_cli("verify --suite bogus --out " + kOut) == 1);
}

TEST_CASE("qpa run: QP_AUCTION_SEED overrides the flag and is recorded") {
    CleanDir guard;
    const std::string cmd = "QP_AUCTION_SEED=99 \"" + std::string(QPA_CLI_PATH) +
                            "\" run --scenario scenario2 --trials 2 --seed 7 --out " +
                            kOut + " >/dev/null 2>&1";
    const int env_rc = std::system(cmd.c_str());
    REQUIRE(env_rc != -1);
    CHECK(WEXITSTATUS(env_rc) == 0);
    const std::string sidecar = slurp(kOut + "/results.json");
    CHECK(sidecar.find("\"base_seed\": 99") != std::string::npos);
    CHECK(sidecar.find("\"seed_from_env\": true") != std::string::npos);

    const std::string bad = "QP_AUCTION_SEED=not-a-number \"" + std::string(QPA_CLI_PATH) +
                            "\" run --trials 2 --out " + kOut + " >/dev/null 2>&1";
    const int bad_rc = std::system(bad.c_str());
    REQUIRE(bad_rc != -1);
    CHECK(WEXITSTATUS(bad_rc) == 2);
}

}  // TEST_SUITE
