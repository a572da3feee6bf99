#include <doctest.h>

#include <cmath>

#include "pefcert/distributions.hpp"
#include "pefcert/errors.hpp"
#include "pefcert/pefopt.hpp"

using namespace pefcert;

namespace {

// E_sigma[F sigma(C|Z)^beta] for every vertex, computed cell by cell.
double worst_lhs(const TrialModel& m, const CellTable& f, double beta) {
    double worst = 0.0;
    for (const auto& v : m.vertices()) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < kCells; ++i) {
            if (v[i] > 0) lhs += f[i] * v[i] * std::pow(v.conditional(i), beta);
        }
        worst = std::max(worst, lhs);
    }
    return worst;
}

}  // namespace

TEST_CASE("optimized PEFs are feasible and report their own objective") {
    const TrialModel m = ns_model();
    for (double beta : {0.01, 0.1, 0.5, 2.0}) {
        const TrialDistribution nu = family_werner(0.9);
        const PefSolution s = optimize_pef(m, nu, beta);
        CHECK(s.report.converged);
        CHECK(worst_lhs(m, s.pef.values, beta) <= 1.0 + 1e-12);
        CHECK(validate_pef(m, s.pef) == doctest::Approx(worst_lhs(m, s.pef.values, beta)).epsilon(1e-12));
        CHECK(beta * pef_log_rate(s.pef, nu) == doctest::Approx(s.report.objective_bits).epsilon(1e-12));
        CHECK(s.report.objective_bits > 0.0);
    }
}

TEST_CASE("the trivial PEF is beaten but never beats the optimum") {
    const TrialModel m = ns_model();
    const TrialDistribution nu = family_werner(1.0);
    const PefSolution s = optimize_pef(m, nu, 0.2);
    // perturbations that stay feasible cannot improve the objective
    for (std::size_t i = 0; i < kCells; ++i) {
        Pef p = s.pef;
        p.values[i] *= 1.01;
        const double scale = 1.0 / std::max(1.0, validate_pef(m, p));
        for (double& v : p.values) v *= scale;
        CHECK(pef_log_rate(p, nu) <= pef_log_rate(s.pef, nu) + 1e-9);
    }
}

TEST_CASE("convex combinations of PEFs are PEFs") {
    const TrialModel m = ns_model();
    const Pef f1 = optimize_pef(m, family_werner(1.0), 0.3).pef;
    const Pef f2 = optimize_pef(m, family_unbalanced(0.4), 0.3).pef;
    for (double w : {0.1, 0.5, 0.9}) {
        CellTable c{};
        for (std::size_t i = 0; i < kCells; ++i) c[i] = w * f1.values[i] + (1 - w) * f2.values[i];
        CHECK(validate_pef(m.vertices(), c, 0.3) <= 1.0 + 1e-12);
    }
}

TEST_CASE("local realist data earns nothing") {
    const TrialModel m = ns_model();
    QuantumSetup s;
    s.visibility = 0.6;
    const PefSolution sol = optimize_pef(m, quantum_distribution(s), 0.1);
    CHECK(sol.report.objective_bits == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("argument validation") {
    const TrialModel m = ns_model();
    const TrialDistribution nu = family_werner(1.0);
    CHECK_THROWS_AS(optimize_pef(m, nu, 0.0), ValidationError);
    CHECK_THROWS_AS(optimize_pef(m, nu, -1.0), ValidationError);
    CHECK_THROWS_AS(optimize_pef(m, nu, 0.1, 0), ValidationError);
    CHECK_THROWS_AS(optimize_pef(m, nu, 0.1, 1, 0.0), ValidationError);
    CellTable cond{};
    for (std::size_t i = 0; i < kCells; ++i) cond[i] = nu.conditional(i);
    const TrialDistribution skewed = TrialDistribution::from_conditionals(InputDistribution({0.1, 0.2, 0.3, 0.4}), cond);
    CHECK_THROWS_AS(optimize_pef(m, skewed, 0.1), ValidationError);
    Pef zero;
    zero.beta = 0.1;
    CHECK_THROWS_AS(pef_log_rate(zero, nu), ValidationError);
}
