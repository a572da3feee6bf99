#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pefcert/cli.hpp"
#include "pefcert/distributions.hpp"
#include "pefcert/io.hpp"

using namespace pefcert;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("model and family subcommands") {
    const Run r = run({"model", "--kind", "tsirelson"});
    REQUIRE(r.code == 0);
    CHECK(io::model_from_json(r.out).size() == 80);
    const Run f = run({"family", "--family", "werner", "--I", "2.5"});
    REQUIRE(f.code == 0);
    CHECK(io::distribution_from_json(f.out) == family_werner(2.5 / (2 * std::sqrt(2.0))));
}

TEST_CASE("exit codes and JSON errors") {
    CHECK(run({"family", "--family", "werner", "--p", "2"}).code == 1);
    CHECK(run({"nonsense"}).code == 1);
    const Run r = run({"family", "--family", "werner", "--p", "2", "--error-json"});
    CHECK(r.code == 1);
    CHECK(r.err.find("\"error\":\"validation\"") != std::string::npos);
}

TEST_CASE("simulate then certify") {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string log = (dir / "pefcert_cli_test_log.csv").string();
    REQUIRE(run({"simulate", "--family", "werner", "--p", "1.0", "--n", "5000", "--seed", "7", "--out", log}).code == 0);
    const Run c1 = run({"certify", "--log", log, "--family", "werner", "--p", "1.0", "--b", "16", "--epsilon", "1e-3",
                        "--kappa", "0.5"});
    const Run c2 = run({"certify", "--log", log, "--family", "werner", "--p", "1.0", "--b", "16", "--epsilon", "1e-3",
                        "--kappa", "0.5"});
    REQUIRE(c1.code == 0);
    CHECK(c1.out == c2.out);
    const EntropyCertificate cert = io::certificate_from_json(c1.out);
    CHECK(cert.success);
    CHECK(cert.n == 5000);
    std::remove(log.c_str());
}

TEST_CASE("plan and rates") {
    const Run p = run({"plan", "--family", "werner", "--I", "2.828", "--epsilon", "1e-6"});
    REQUIRE(p.code == 0);
    CHECK(io::plan_from_json(p.out).f_pm > 4.0);
    const Run sweep = run({"plan", "--family", "werner", "--sweep", "2.5,2.7"});
    REQUIRE(sweep.code == 0);
    CHECK(std::count(sweep.out.begin(), sweep.out.end(), '\n') == 3);
    const Run r = run({"rates", "--family", "werner", "--p", "0.9", "--betas", "0.1,0.2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("beta,g_bits,beta_g_bits\n0.1,", 0) == 0);
}
