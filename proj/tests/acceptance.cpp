// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "pefcert/distributions.hpp"
#include "pefcert/pefopt.hpp"
#include "pefcert/planner.hpp"
#include "pefcert/protocol.hpp"
#include "pefcert/rates.hpp"

using namespace pefcert;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<TrialDistribution> lr_vertices(const TrialModel& model) {
    std::vector<TrialDistribution> out;
    for (const auto& v : model.vertices()) {
        if (is_deterministic(v, 1e-9)) out.push_back(v);
    }
    return out;
}

Outcome vertex_counts() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t ns = ns_model().size();
    const std::size_t ts = tsirelson_model().size();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {ns == 24 && ts == 80 && secs < 10.0, fmt("ns=%zu tsirelson=%zu in %.2fs", ns, ts, secs)};
}

// g(beta) rises monotonically to its beta -> 0 limit, so the limit is read off
// by Richardson extrapolation from beta = 0.005 and 0.0025. The raw g(0.005)
// must sit at or below the limit.
Outcome analytic_rate_theorem() {
    const TrialModel model = ns_model();
    bool ok = true;
    std::string detail;
    for (double p : {0.75, 0.85, 1.0}) {
        const TrialDistribution nu = family_werner(p);
        const double i_hat = chsh_expectation(nu);
        const double g1 = rate_point(model, nu, 0.005).g_bits;
        const double g2 = rate_point(model, nu, 0.0025).g_bits;
        const double g0 = 2.0 * g2 - g1;
        const double want = (i_hat - 2.0) / 2.0;
        const double rel = std::abs(g0 - want) / want;
        const double pg = guessing_probability_lp(model, nu).p_guess;
        const double pg_err = std::abs(pg - (6.0 - i_hat) / 4.0);
        ok = ok && rel <= 0.02 && g1 <= want + 1e-9 && pg_err <= 1e-8;
        detail += fmt("p=%.2f g(0.005)=%.6f g0=%.6f want=%.6f rel=%.1e pguess_err=%.1e; ", p, g1, g0, want, rel,
                      pg_err);
    }
    return {ok, detail};
}

Outcome ratio_limit() {
    const double r = asymptotic_rate_analytic(2.001).bits / single_trial_minentropy(2.001).bits;
    return {std::abs(r - 1.386) / 1.386 <= 0.005, fmt("ratio=%.6f", r)};
}

Outcome gamma_equals_strength() {
    const TrialModel model = ns_model();
    bool ok = true;
    std::string detail;
    for (double p : {1.0, 0.71}) {
        const TrialDistribution nu = family_werner(p);
        const CertificateRateResult cr = certificate_rate(model, nu);
        const double s = statistical_strength(nu);
        const double diff = std::abs(cr.gamma_pef - s);
        ok = ok && cr.plateau_reached && diff <= 1e-4;
        detail += fmt("p=%.2f gamma=%.10f s=%.10f diff=%.1e; ", p, cr.gamma_pef, s, diff);
    }
    return {ok, detail};
}

Outcome beta_threshold() {
    const TrialModel model = ns_model();
    const std::vector<TrialDistribution> lr = lr_vertices(model);
    const ThresholdResult th = constraint_threshold(model);
    const auto pr = pr_boxes(InputDistribution::uniform());
    std::vector<TrialDistribution> near_pr;
    for (double w : {0.95, 0.99, 1.0}) {
        CellTable c{};
        for (std::size_t i = 0; i < kCells; ++i) c[i] = w * pr[0][i] + (1.0 - w) / 16.0;
        near_pr.emplace_back(c);
    }
    std::vector<TrialDistribution> nus = {family_werner(1.0), family_werner(0.85), family_unbalanced(0.5)};
    nus.insert(nus.end(), near_pr.begin(), near_pr.end());
    auto change = [&](const TrialDistribution& nu, double beta) {
        return optimize_pef(lr, nu, beta).report.objective_bits - optimize_pef(model, nu, beta).report.objective_bits;
    };
    double max_inactive = 0.0;
    for (const TrialDistribution& nu : nus) {
        for (double beta : {0.4151 + 1e-3, 0.5, 0.8, 1.5}) max_inactive = std::max(max_inactive, std::abs(change(nu, beta)));
    }
    double min_active = INFINITY;
    for (const TrialDistribution& nu : near_pr) min_active = std::min(min_active, change(nu, 0.35));
    const bool ok = max_inactive < 1e-8 && min_active >= 1e-6 && std::abs(th.beta_th - 0.4151) < 1e-3;
    return {ok, fmt("beta_th=%.8f inactive_change<=%.1e active_change>=%.1e", th.beta_th, max_inactive, min_active)};
}

Outcome improvement() {
    const PlanResult lo = improvement_factors(family_werner(werner_visibility_for_chsh(2.008)), 0.0, 1e-6, 1.0);
    const PlanResult hi = improvement_factors(family_werner(1.0), 0.0, 1e-6, 1.0);
    const bool ok = std::abs(lo.f_pm - 3.89) <= 0.02 && std::abs(hi.f_pm - 4.36) <= 0.02 &&
                    std::abs(lo.f_eat - 84.97) <= 0.5 && std::abs(hi.f_eat - 86.35) <= 0.5;
    return {ok, fmt("I=2.008: f_pm=%.4f f_eat=%.3f; I=2sqrt2: f_pm=%.4f f_eat=%.3f", lo.f_pm, lo.f_eat, hi.f_pm,
                    hi.f_eat)};
}

Outcome monotonicity() {
    const TrialModel model = ns_model();
    const std::vector<TrialDistribution> nus = {family_werner(1.0), family_werner(0.9), family_werner(0.75),
                                                family_unbalanced(0.4), family_eberhard(0.9)};
    std::vector<double> betas;
    for (int k = 0; k < 20; ++k) betas.push_back(0.005 * std::pow(400.0, k / 19.0));
    double worst_g = 0.0;
    double worst_bg = 0.0;
    for (const TrialDistribution& nu : nus) {
        const auto curve = rate_curve(model, nu, betas);
        for (std::size_t k = 1; k < curve.size(); ++k) {
            worst_g = std::max(worst_g, curve[k].g_bits - curve[k - 1].g_bits);
            worst_bg = std::max(worst_bg, curve[k - 1].beta_g_bits - curve[k].beta_g_bits);
        }
    }
    return {worst_g <= 1e-6 && worst_bg <= 1e-6, fmt("max g increase=%.1e max beta*g decrease=%.1e", worst_g, worst_bg)};
}

Outcome soundness() {
    const TrialModel model = ns_model();
    // a PEF tuned to the ideal Werner state, held fixed for every run
    constexpr double beta = 0.2;
    const Pef pef = optimize_pef(model, family_werner(1.0), beta).pef;
    CertificationParams params;
    params.beta = beta;
    params.epsilon = 0.1;
    params.kappa = 1.0;
    params.target_bits = std::log2(10.0) / beta;  // p^beta = 0.1, so p^beta eps = 0.01
    params.n_max = 500;

    QuantumSetup boundary;
    boundary.visibility = 1.0 / std::numbers::sqrt2;
    QuantumSetup interior;
    interior.visibility = 0.5;
    const auto det = local_deterministic_points(InputDistribution::uniform());
    const std::vector<TrialDistribution> nus = {quantum_distribution(boundary), quantum_distribution(interior),
                                                mixture(std::vector<TrialDistribution>{det[0], det[5], det[10]},
                                                        std::vector<double>{0.5, 0.3, 0.2})};
    constexpr int kRuns = 10000;
    const double bound = 0.01 + 3.0 * std::sqrt(0.01 * 0.99 / kRuns);
    bool ok = true;
    std::string detail;
    for (std::size_t d = 0; d < 3; ++d) {
        const TrialDistribution& nu = nus[d];
        const bool local = is_member(lr_vertices(model), nu, 1e-9).member;
        int wins = 0;
        for (int run = 0; run < kRuns; ++run) {
            AccumulatorState state(params, pef);
            for (const TrialRecord& r : simulate_trials(nu, params.n_max, 1000003ULL * d + run)) state.update(r);
            wins += certify(state).success;
        }
        const double freq = double(wins) / kRuns;
        ok = ok && local && freq <= bound;
        detail += fmt("dist%zu lr=%d freq=%.4f; ", d, int(local), freq);
    }
    return {ok, detail + fmt("bound=%.4f", bound)};
}

Outcome completeness() {
    const TrialModel model = ns_model();
    const TrialDistribution nu = family_werner(0.9);
    const double eps = std::exp2(-10);
    const TrialCount tc = n_pef(128.0, eps, eps, model, nu, default_beta_grid());
    CertificationParams params;
    params.beta = tc.beta_star;
    params.epsilon = eps;
    params.kappa = eps;
    params.target_bits = 128.0;
    params.n_max = static_cast<long long>(std::ceil(tc.n));
    const Pef planned = new_run(params, model, nu).current_pef();
    params.n_max = static_cast<long long>(
        std::ceil(trials_for_success_probability(planned, nu, params.threshold_log2(), 0.99)));
    int wins = 0;
    bool enough_bits = true;
    for (int run = 0; run < 100; ++run) {
        const EntropyCertificate c = run_protocol(params, model, nu, simulate_trials(nu, params.n_max, 5000 + run));
        if (c.success) {
            ++wins;
            enough_bits = enough_bits && c.entropy_bits >= 128.0 - 1e-9;
        }
    }
    return {wins >= 95 && enough_bits,
            fmt("beta=%.4f n_pef=%.0f padded_n=%lld successes=%d/100", tc.beta_star, tc.n, params.n_max, wins)};
}

Outcome eat_consistency() {
    double worst_dg = 0.0;
    for (int k = 0; k <= 200; ++k) {
        const double p = 0.75 + 1e-5 + (kEatPMax - 1e-3 - 0.75) * k / 200.0;
        const double h = 1e-6;
        const double fd = (eat_g(p + h) - eat_g(p - h)) / (2.0 * h);
        worst_dg = std::max(worst_dg, std::abs(fd - eat_dg(p)) / std::max(1.0, std::abs(fd)));
    }
    double worst_plug = 0.0;
    for (double b : {0.0, 64.0}) {
        for (double omega : {0.751, 0.8, kEatPMax}) {
            const EatCount ec = n_eat(b, 1e-6, 1e-3, omega);
            EatParams ep;
            ep.omega_exp = omega;
            ep.p_t = ec.p_t_star;
            ep.epsilon = 1e-6;
            ep.kappa = 1e-3;
            ep.b = b;
            const double lhs = ec.n * eat_rate(ep, ec.n);
            const double scale = std::max(1.0, ec.n * eat_f_min(ec.p_t_star, omega));
            worst_plug = std::max(worst_plug, std::abs(lhs - b) / scale);
        }
    }
    const double g0 = std::abs(eat_g(0.75));
    const double g1 = std::abs(eat_g(kEatPMax) - 1.0);
    return {worst_dg <= 1e-6 && worst_plug <= 1e-6 && g0 <= 1e-12 && g1 <= 1e-12,
            fmt("dg_err=%.1e plug_residual=%.1e |g(3/4)|=%.1e |g(pmax)-1|=%.1e", worst_dg, worst_plug, g0, g1)};
}

Outcome power_transport() {
    const TrialModel model = ns_model();
    const std::vector<TrialDistribution> nus = {family_werner(1.0), family_werner(0.85), family_unbalanced(0.3),
                                                family_unbalanced(0.6), family_werner(0.75)};
    double worst = 0.0;
    int count = 0;
    for (const TrialDistribution& nu : nus) {
        for (double beta : {0.05, 0.6}) {
            const Pef f = optimize_pef(model, nu, beta).pef;
            ++count;
            for (double gamma : {0.25, 0.5, 1.0}) {
                worst = std::max(worst, validate_pef(model.vertices(), f.values, beta / gamma));
                CellTable powered{};
                for (std::size_t i = 0; i < kCells; ++i) powered[i] = std::pow(f.values[i], gamma);
                worst = std::max(worst, validate_pef(model.vertices(), powered, gamma * beta));
            }
        }
    }
    return {count == 10 && worst <= 1.0 + 1e-9, fmt("%d PEFs, max constraint lhs=%.12f", count, worst)};
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"vertex counts", vertex_counts},
        {"analytic rate theorem", analytic_rate_theorem},
        {"ratio limit", ratio_limit},
        {"certificate rate equals statistical strength", gamma_equals_strength},
        {"beta threshold", beta_threshold},
        {"improvement factors", improvement},
        {"monotonicity", monotonicity},
        {"soundness", soundness},
        {"completeness", completeness},
        {"EAT consistency", eat_consistency},
        {"power transport", power_transport},
    };
    int failures = 0;
    int k = 0;
    for (const auto& [name, check] : criteria) {
        ++k;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str(), secs);
    }
    return failures == 0 ? 0 : 1;
}
