#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(SPQM_CLI_PATH) + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("missing --dt is a usage error") {
    CHECK(run("simulate --kappa 1 --t-final 1") == 2);
    CHECK(slurp("cli_stderr.txt").find("--dt") != std::string::npos);
    CHECK(slurp("cli_stderr.txt").find("Usage") != std::string::npos);
}

TEST_CASE("invalid configuration is a usage error") {
    CHECK(run("simulate --dt 0.3 --t-final 1") == 2);
    CHECK(run("simulate --dt 0.01 --kappa -1") == 2);
    CHECK(run("moments --format xml") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("") == 2);
}

TEST_CASE("moments sweep ends at n(5) = 5/6") {
    REQUIRE(run("moments --kappa 1 --t-final 5 --out cli_moments.csv") == 0);
    std::ifstream in("cli_moments.csv");
    std::string meta_line, header, line, last;
    std::getline(in, meta_line);
    const auto meta = nlohmann::json::parse(meta_line);
    CHECK(meta["subcommand"] == "moments");
    CHECK(meta["t_final"] == 5.0);
    CHECK(meta.contains("version"));
    std::getline(in, header);
    CHECK(header.rfind("t,kT,n,m,q", 0) == 0);
    while (std::getline(in, line)) last = line;
    std::stringstream ss(last);
    std::string t, kT, n;
    std::getline(ss, t, ',');
    std::getline(ss, kT, ',');
    std::getline(ss, n, ',');
    CHECK(std::stod(t) == doctest::Approx(5.0));
    CHECK(std::stod(n) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("simulate is deterministic for a fixed seed") {
    REQUIRE(run("simulate --dt 0.01 --t-final 1 --paths 20 --seed 3 --out cli_a.csv") == 0);
    REQUIRE(run("simulate --dt 0.01 --t-final 1 --paths 20 --seed 3 --out cli_b.csv") == 0);
    CHECK(slurp("cli_a.csv") == slurp("cli_b.csv"));
    REQUIRE(::setenv("SPQM_NUM_THREADS", "3", 1) == 0);
    REQUIRE(run("simulate --dt 0.01 --t-final 1 --paths 20 --seed 3 --out cli_c.csv") == 0);
    ::unsetenv("SPQM_NUM_THREADS");
    CHECK(slurp("cli_a.csv") == slurp("cli_c.csv"));
}

TEST_CASE("JSON output is one object per line after the metadata") {
    REQUIRE(run("povm --dt 1e-3 --t-final 0.3 --dim 8 --paths 200 --format json --out cli_povm.jsonl") == 0);
    std::ifstream in("cli_povm.jsonl");
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        CHECK_FALSE(nlohmann::json::parse(line, nullptr, false).is_discarded());
        ++n;
    }
    CHECK(n == 10);
}

TEST_CASE("key=value config file supplies the options") {
    {
        std::ofstream cfg("cli_config.ini");
        cfg << "kappa=1\nt-final=0.5\ndt=0.01\n";
    }
    REQUIRE(run("distributions --config cli_config.ini --paths 200 --points 5 --out cli_dist.csv") == 0);
    const std::string out = slurp("cli_dist.csv");
    CHECK(out.find("\"dt\":0.01") != std::string::npos);
    CHECK(out.find("sigma") != std::string::npos);
}

TEST_CASE("verify runs a subset and reports through the exit status") {
    CHECK(run("verify --dt 1e-3 --only 2,11,12 --out cli_verify.jsonl --format json") == 0);
    CHECK(slurp("cli_stderr.txt").find("PASS") != std::string::npos);
}
