#include "pefcert/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>

#include "pefcert/distributions.hpp"
#include "pefcert/errors.hpp"

namespace pefcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit(double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " must lie in (0, 1]");
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double eat_root(double p) { return std::sqrt(std::max(0.0, 16.0 * p * (p - 1.0) + 3.0)); }

void check_eat_p(double p) {
    if (!(p >= 0.75 - 1e-15 && p <= 1.0)) throw ValidationError("EAT winning probability must lie in [3/4, 1]");
}

template <class F>
std::pair<double, double> minimize_1d(F f, double lo, double hi) {
    // Brent: golden section with parabolic steps
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, 40);
    return {r.first, r.second};
}

}  // namespace

double n_pef_at(double b, double epsilon, double kappa, const RatePoint& point) {
    if (!(point.beta_g_bits > 0.0)) return kInf;
    const double num = b * point.beta - std::log2(epsilon) - (1.0 + point.beta) * std::log2(kappa);
    return std::max(0.0, num) / point.beta_g_bits;
}

TrialCount n_pef(double b, double epsilon, double kappa, const std::vector<RatePoint>& curve) {
    if (b < 0.0) throw ValidationError("b must be nonnegative");
    check_unit(epsilon, "epsilon");
    check_unit(kappa, "kappa");
    TrialCount best{kInf, 0.0, false};
    for (const RatePoint& p : curve) {
        const double n = n_pef_at(b, epsilon, kappa, p);
        if (n < best.n) best = {n, p.beta, true};
    }
    return best;
}

TrialCount n_pef(double b, double epsilon, double kappa, const TrialModel& model, const TrialDistribution& nu,
                 const std::vector<double>& betas, int jobs) {
    const std::vector<RatePoint> curve = rate_curve(model, nu, betas, jobs);
    TrialCount best = n_pef(b, epsilon, kappa, curve);
    if (!best.finite) return best;
    std::size_t k = 0;
    while (curve[k].beta != best.beta_star) ++k;
    const double lo = k == 0 ? curve[k].beta / 2.0 : curve[k - 1].beta;
    const double hi = k + 1 == curve.size() ? curve[k].beta : curve[k + 1].beta;
    if (hi > lo) {
        auto f = [&](double beta) { return n_pef_at(b, epsilon, kappa, rate_point(model, nu, beta)); };
        const auto [beta, n] = minimize_1d(f, lo, hi);
        if (n < best.n) best = {n, beta, true};
    }
    return best;
}

double n_pef_upper(double b, double epsilon, double kappa, double gamma_pef, double beta0) {
    if (!(gamma_pef > 0.0)) throw ValidationError("n_pef_upper: certificate rate must be positive");
    if (b < 0.0) throw ValidationError("b must be nonnegative");
    check_unit(epsilon, "epsilon");
    check_unit(kappa, "kappa");
    return (b * beta0 - std::log2(epsilon) - (1.0 + beta0) * std::log2(kappa)) / gamma_pef;
}

double n_pm(double epsilon, double i_hat) {
    check_unit(epsilon, "epsilon");
    if (!(i_hat > 2.0)) throw ValidationError("n_pm: CHSH expectation must exceed 2");
    const double bias = (i_hat - 2.0) / (4.0 + 2.0 * std::numbers::sqrt2);
    return -2.0 * std::log(epsilon) / (bias * bias);
}

double eat_g(double p) {
    check_eat_p(p);
    if (p >= kEatPMax) return 1.0;
    return 1.0 - binary_entropy(0.5 + 0.5 * eat_root(p));
}

double eat_dg(double p) {
    check_eat_p(p);
    if (p >= kEatPMax) throw ValidationError("eat_dg: derivative diverges at (2+sqrt2)/4");
    const double r = eat_root(p);
    // log2(q / (1 - q)) with q = (1 + r)/2 equals 2 atanh(r) / ln 2; atanh(r)/r -> 1 as r -> 0
    const double ratio = r < 1e-8 ? 1.0 + r * r / 3.0 : std::atanh(r) / r;
    return 2.0 * ratio * (8.0 * p - 4.0) / std::numbers::ln2;
}

double eat_f_min(double p_t, double p) {
    if (p <= p_t) return eat_g(p);
    const double slope = eat_dg(p_t);
    return slope * p + (eat_g(p_t) - slope * p_t);
}

double eat_v(double p_t, double epsilon, double kappa) {
    check_unit(epsilon, "epsilon");
    check_unit(kappa, "kappa");
    return 2.0 * (std::log2(13.0) + eat_dg(p_t)) * std::sqrt(1.0 - 2.0 * std::log2(epsilon * kappa));
}

double eat_rate(const EatParams& params, double n) {
    if (!(n > 0.0)) throw ValidationError("eat_rate: n must be positive");
    check_eat_p(params.omega_exp);
    if (params.omega_exp > kEatPMax + 1e-12) throw ValidationError("omega_exp must be at most (2+sqrt2)/4");
    if (!(params.p_t >= 0.75 - 1e-15 && params.p_t < kEatPMax)) throw ValidationError("p_t must lie in [3/4, (2+sqrt2)/4)");
    return eat_f_min(params.p_t, params.omega_exp) - eat_v(params.p_t, params.epsilon, params.kappa) / std::sqrt(n);
}

double n_eat_at(double b, double epsilon, double kappa, double omega_exp, double p_t) {
    const double f = eat_f_min(p_t, omega_exp);
    if (!(f > 0.0)) return kInf;
    const double v = eat_v(p_t, epsilon, kappa);
    const double root = (v + std::sqrt(v * v + 4.0 * b * f)) / (2.0 * f);
    return root * root;
}

EatCount n_eat(double b, double epsilon, double kappa, double omega_exp) {
    if (b < 0.0) throw ValidationError("b must be nonnegative");
    if (!(omega_exp > 0.75 && omega_exp <= kEatPMax + 1e-12)) {
        throw ValidationError("n_eat: omega_exp must lie in (3/4, (2+sqrt2)/4]");
    }
    const double lo = 0.75;
    const double hi = std::min(omega_exp, kEatPMax - 1e-6);
    auto f = [&](double p_t) { return n_eat_at(b, epsilon, kappa, omega_exp, p_t); };
    constexpr int kScan = 17;
    int best_k = 0;
    double best_n = kInf;
    for (int k = 0; k < kScan; ++k) {
        const double p = lo + (hi - lo) * k / (kScan - 1);
        const double n = f(p);
        if (n < best_n) {
            best_n = n;
            best_k = k;
        }
    }
    if (!std::isfinite(best_n)) throw NumericalError("n_eat: no p_t gives a positive min-tradeoff value");
    const double a = lo + (hi - lo) * std::max(0, best_k - 1) / (kScan - 1);
    const double c = lo + (hi - lo) * std::min(kScan - 1, best_k + 1) / (kScan - 1);
    EatCount out{best_n, lo + (hi - lo) * best_k / (kScan - 1)};
    const auto [p, n] = minimize_1d(f, a, c);
    if (n < out.n) out = {n, p};
    return out;
}

std::vector<double> default_beta_grid() {
    std::vector<double> out;
    const int count = 40;
    for (int k = 0; k < count; ++k) out.push_back(0.005 * std::pow(400.0, double(k) / (count - 1)));
    return out;
}

PlanResult improvement_factors(const TrialDistribution& nu, double b, double epsilon, double kappa,
                               const TrialModel& model, int jobs) {
    PlanResult out;
    out.i_hat = chsh_expectation(nu);
    if (!(out.i_hat > 2.0)) throw ValidationError("improvement_factors: distribution does not violate CHSH");
    const CertificateRateResult cr = certificate_rate(model, nu);
    out.gamma_pef = cr.gamma_pef;
    out.beta0 = cr.beta0;
    const TrialCount tc = n_pef(b, epsilon, kappa, model, nu, default_beta_grid(), jobs);
    out.n_pef_upper = n_pef_upper(b, epsilon, kappa, cr.gamma_pef, cr.beta0);
    // beta0 is itself a candidate, and there the ratio equals the upper bound
    out.n_pef = std::min(tc.n, out.n_pef_upper);
    out.beta_star = tc.n <= out.n_pef_upper ? tc.beta_star : cr.beta0;
    out.n_pm0 = n_pm(epsilon, out.i_hat);
    const EatCount ec = n_eat(b, epsilon, kappa, std::min(kEatPMax, 0.5 + out.i_hat / 8.0));
    out.n_eat = ec.n;
    out.p_t_star = ec.p_t_star;
    out.f_pm = out.n_pm0 / out.n_pef_upper;
    out.f_eat = out.n_eat / out.n_pef_upper;
    return out;
}

PlanResult improvement_factors(const TrialDistribution& nu, double b, double epsilon, double kappa) {
    return improvement_factors(nu, b, epsilon, kappa, ns_model(nu.inputs()));
}

double trials_for_success_probability(const Pef& pef, const TrialDistribution& nu, double threshold_log2,
                                      double success_probability) {
    if (!(success_probability > 0.0 && success_probability < 1.0)) {
        throw ValidationError("success probability must lie in (0, 1)");
    }
    double mu = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) {
        if (nu[i] <= 0.0) continue;
        if (pef.values[i] <= 0.0) return kInf;
        const double l = std::log2(pef.values[i]);
        mu += nu[i] * l;
        second += nu[i] * l * l;
    }
    if (!(mu > 0.0)) return kInf;
    const double sigma = std::sqrt(std::max(0.0, second - mu * mu));
    const double z = boost::math::quantile(boost::math::normal(), success_probability);
    const double thr = std::max(0.0, threshold_log2);
    const double root = (z * sigma + std::sqrt(z * z * sigma * sigma + 4.0 * mu * thr)) / (2.0 * mu);
    return std::max(1.0, std::ceil(root * root));
}

}  // namespace pefcert
