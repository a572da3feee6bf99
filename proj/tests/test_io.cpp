#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "pefcert/distributions.hpp"
#include "pefcert/errors.hpp"
#include "pefcert/io.hpp"

using namespace pefcert;

TEST_CASE("format_real round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e-7}) {
        CHECK(std::strtod(io::format_real(v).c_str(), nullptr) == v);
    }
    CHECK(io::format_real(0.5) == "0.5");
    CHECK(io::format_real(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("model and distribution documents round-trip") {
    const TrialModel m = ns_model();
    const TrialModel back = io::model_from_json(io::model_to_json(m));
    CHECK(back.size() == m.size());
    CHECK(back.kind() == m.kind());
    for (std::size_t k = 0; k < m.size(); ++k) CHECK(back.vertices()[k] == m.vertices()[k]);

    const TrialDistribution nu = family_werner(0.87);
    CHECK(io::distribution_from_json(io::distribution_to_json(nu)) == nu);
    CHECK_THROWS_AS(io::distribution_from_json("{\"probs\": [1, 2]}"), ValidationError);
    CHECK_THROWS_AS(io::distribution_from_json("not json"), ValidationError);
}

TEST_CASE("PEF, certificate and plan documents round-trip") {
    const PefSolution s = optimize_pef(ns_model(), family_werner(1.0), 0.3);
    const Pef p = io::pef_from_json(io::pef_to_json(s.pef, s.report));
    CHECK(p.values == s.pef.values);
    CHECK(p.beta == s.pef.beta);

    EntropyCertificate c;
    c.success = false;
    c.log2_Tn = -std::numeric_limits<double>::infinity();
    c.n = 7;
    c.beta = 0.1;
    const std::string text = io::certificate_to_json(c);
    CHECK(text.find("null") != std::string::npos);
    const EntropyCertificate c2 = io::certificate_from_json(text);
    CHECK(std::isinf(c2.log2_Tn));
    CHECK(c2.n == 7);

    PlanResult r;
    r.i_hat = 2.5;
    r.n_pef = 123.25;
    r.f_eat = 80.125;
    const PlanResult r2 = io::plan_from_json(io::plan_to_json(r));
    CHECK(r2.n_pef == r.n_pef);
    CHECK(r2.f_eat == r.f_eat);
    // keys come out sorted
    const std::string plan = io::plan_to_json(r);
    CHECK(plan.find("\"I_hat\"") < plan.find("\"beta0\""));
    CHECK(plan.find("\"beta0\"") < plan.find("\"n_eat\""));
}

TEST_CASE("trial logs") {
    std::vector<TrialRecord> recs = {{1, 0, 1, 1, 0}, {2, 1, 1, 0, 0}, {5, 0, 0, 1, 1}};
    std::stringstream ss;
    io::write_trial_log(ss, recs);
    CHECK(io::read_trial_log(ss) == recs);

    std::istringstream bad_header("t,x,y,a,b\n");
    CHECK_THROWS_AS(io::read_trial_log(bad_header), ValidationError);
    std::istringstream bad_value("trial,x,y,a,b\n1,0,0,0,0\n2,0,3,0,0\n");
    try {
        io::read_trial_log(bad_value);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream bad_order("trial,x,y,a,b\n2,0,0,0,0\n2,0,0,0,0\n");
    CHECK_THROWS_AS(io::read_trial_log(bad_order), ValidationError);
}

TEST_CASE("CSV emitters") {
    std::ostringstream rates;
    io::write_rate_csv(rates, {{0.5, 0.25, 0.125, true}});
    CHECK(rates.str() == "beta,g_bits,beta_g_bits\n0.5,0.25,0.125\n");
    std::ostringstream plans;
    io::write_plan_csv(plans, {PlanResult{}});
    CHECK(plans.str().rfind("I_hat,n_pef,n_pef_upper,n_pm,n_eat,f_pm,f_eat\n", 0) == 0);
}
