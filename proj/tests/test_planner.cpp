#include <doctest.h>

#include <cmath>

#include "pefcert/distributions.hpp"
#include "pefcert/errors.hpp"
#include "pefcert/planner.hpp"

using namespace pefcert;

TEST_CASE("PM baseline count") {
    const double eps = 1e-6;
    const double i_hat = 2.5;
    const double delta = (i_hat - 2) / (4 + 2 * std::sqrt(2.0));
    CHECK(n_pm(eps, i_hat) == doctest::Approx(-2 * std::log(eps) / (delta * delta)));
}

TEST_CASE("PEF trial counts") {
    RatePoint p{0.5, 0.1, 0.05, true};
    CHECK(n_pef_at(10, 1e-3, 0.5, p) == doctest::Approx((5 - std::log2(1e-3) - 1.5 * std::log2(0.5)) / 0.05));
    CHECK(n_pef_upper(10, 1e-3, 0.5, 0.05, 0.5) == doctest::Approx(n_pef_at(10, 1e-3, 0.5, p)));
    const std::vector<RatePoint> flat = {{0.1, 0.0, 0.0, true}};
    CHECK_FALSE(n_pef(0, 1e-3, 1, flat).finite);

    const TrialModel m = ns_model();
    const TrialDistribution nu = family_werner(0.95);
    const auto grid = default_beta_grid();
    CHECK(grid.size() == 40);
    const TrialCount refined = n_pef(64, 1e-6, 1e-3, m, nu, grid);
    const TrialCount coarse = n_pef(64, 1e-6, 1e-3, rate_curve(m, nu, grid));
    CHECK(refined.finite);
    CHECK(refined.n <= coarse.n + 1e-9);
}

TEST_CASE("EAT rate function") {
    CHECK(eat_g(0.75) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eat_g(kEatPMax) == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : {0.76, 0.8, 0.84}) {
        const double h = 1e-6;
        CHECK(eat_dg(p) == doctest::Approx((eat_g(p + h) - eat_g(p - h)) / (2 * h)).epsilon(1e-6));
        // tangent lies below the convex function
        CHECK(eat_f_min(0.78, p) <= eat_g(p) + 1e-12);
    }
    CHECK_THROWS_AS(eat_dg(kEatPMax), ValidationError);
}

TEST_CASE("EAT trial count solves its defining equation") {
    const EatCount c = n_eat(32, 1e-6, 1e-2, 0.84);
    EatParams p;
    p.omega_exp = 0.84;
    p.p_t = c.p_t_star;
    p.epsilon = 1e-6;
    p.kappa = 1e-2;
    CHECK(c.n * eat_rate(p, c.n) == doctest::Approx(32.0).epsilon(1e-9));
    // the chosen p_t beats its neighbours
    CHECK(c.n <= n_eat_at(32, 1e-6, 1e-2, 0.84, std::max(0.75, c.p_t_star - 1e-3)) + 1e-6);
    CHECK(c.n <= n_eat_at(32, 1e-6, 1e-2, 0.84, c.p_t_star + 1e-3) + 1e-6);
}

TEST_CASE("improvement factors") {
    const PlanResult r = improvement_factors(family_werner(1.0), 0, 1e-6, 1);
    CHECK(r.f_pm == doctest::Approx(r.n_pm0 / r.n_pef_upper));
    CHECK(r.f_eat == doctest::Approx(r.n_eat / r.n_pef_upper));
    CHECK(r.n_pef <= r.n_pef_upper + 1e-9);
    CHECK(r.f_pm > 1.0);
    CHECK(r.f_eat > r.f_pm);
}

TEST_CASE("padded trial count exceeds the expected-value count") {
    const TrialModel m = ns_model();
    const TrialDistribution nu = family_werner(0.9);
    const Pef f = optimize_pef(m, nu, 0.1).pef;
    const double mu = 0.1 * pef_log_rate(f, nu);  // E log2 F
    const double median = trials_for_success_probability(f, nu, 40.0, 0.5);
    CHECK(median == doctest::Approx(std::ceil(40.0 / mu)).epsilon(1e-9));
    CHECK(trials_for_success_probability(f, nu, 40.0, 0.99) > median);
}
