#pragma once

// Trial-count planning for the PEF protocol and for the two baselines:
// the PM-type concentration bound and entropy accumulation (EAT).

#include <vector>

#include "pefcert/bellmodel.hpp"
#include "pefcert/pefopt.hpp"
#include "pefcert/rates.hpp"

namespace pefcert {

struct TrialCount {
    double n = 0.0;
    double beta_star = 0.0;
    /// False when no grid point has a positive rate (n is +infinity).
    bool finite = true;
};

/// (b beta - log2 eps - (1 + beta) log2 kappa) / (beta g(beta)) at one point.
double n_pef_at(double b, double epsilon, double kappa, const RatePoint& point);
/// Minimum over the grid points with positive rate.
TrialCount n_pef(double b, double epsilon, double kappa, const std::vector<RatePoint>& curve);
/// Grid minimum over betas, then Brent refinement on the bracketing interval.
TrialCount n_pef(double b, double epsilon, double kappa, const TrialModel& model, const TrialDistribution& nu,
                 const std::vector<double>& betas, int jobs = 1);

/// (b beta0 - log2 eps - (1 + beta0) log2 kappa) / gamma_pef
double n_pef_upper(double b, double epsilon, double kappa, double gamma_pef, double beta0);

/// -2 ln(eps) / ((I - 2) / (4 + 2 sqrt 2))^2
double n_pm(double epsilon, double i_hat);

struct EatParams {
    double omega_exp = 0.75;
    double p_t = 0.75;
    double epsilon = 1e-6;
    double kappa = 1.0;
    double b = 0.0;
};

inline constexpr double kEatPMax = 0.8535533905932737;  // (2 + sqrt 2) / 4

double eat_g(double p);
/// Closed-form derivative on [3/4, (2+sqrt2)/4); diverges at the right end.
double eat_dg(double p);
double eat_f_min(double p_t, double p);
double eat_v(double p_t, double epsilon, double kappa);
/// f_min(p_t, omega) - v / sqrt(n)
double eat_rate(const EatParams& params, double n);
/// Closed-form trial count for fixed p_t; +infinity when f_min <= 0.
double n_eat_at(double b, double epsilon, double kappa, double omega_exp, double p_t);

struct EatCount {
    double n = 0.0;
    double p_t_star = 0.0;
};
/// Minimum over p_t in [3/4, min(omega, (2+sqrt2)/4 - 1e-6)]: 17-point scan plus Brent refinement.
EatCount n_eat(double b, double epsilon, double kappa, double omega_exp);

struct PlanResult {
    double i_hat = 0.0;
    double n_pef = 0.0;
    double n_pef_upper = 0.0;
    double n_pm0 = 0.0;
    double n_eat = 0.0;
    double f_pm = 0.0;
    double f_eat = 0.0;
    double beta_star = 0.0;
    double p_t_star = 0.0;
    double gamma_pef = 0.0;
    double beta0 = 0.0;
};

/// All counts for one distribution; f_pm = n_pm0 / n_pef_upper and f_eat = n_eat / n_pef_upper.
PlanResult improvement_factors(const TrialDistribution& nu, double b, double epsilon, double kappa,
                               const TrialModel& model, int jobs = 1);
PlanResult improvement_factors(const TrialDistribution& nu, double b, double epsilon, double kappa);

/// Default beta grid for planning: 40 log-spaced points on [0.005, 2].
std::vector<double> default_beta_grid();

/// Smallest n with n mu - z sigma sqrt(n) >= threshold_log2, where mu and sigma
/// are the mean and standard deviation of log2 F under nu and z is the normal
/// quantile of the requested success probability.
double trials_for_success_probability(const Pef& pef, const TrialDistribution& nu, double threshold_log2,
                                      double success_probability);

}  // namespace pefcert
