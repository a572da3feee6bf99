#pragma once

// Randomness rates witnessed by PEFs: the curve g(beta), its small-beta
// limit, the certificate rate and the statistical strength against local
// realism.

#include <vector>

#include "pefcert/bellmodel.hpp"
#include "pefcert/trial.hpp"

namespace pefcert {

struct RatePoint {
    double beta = 0.0;
    double g_bits = 0.0;
    double beta_g_bits = 0.0;
    bool converged = true;
};

/// g(beta) = sup_F E_nu log2(F) / beta for every beta; jobs > 1 solves points in parallel.
std::vector<RatePoint> rate_curve(const TrialModel& model, const TrialDistribution& nu,
                                  const std::vector<double>& betas, int jobs = 1);
RatePoint rate_point(const TrialModel& model, const TrialDistribution& nu, double beta);

/// Closed-form value with a flag telling whether the input violated CHSH at all.
struct AnalyticRate {
    double bits = 0.0;
    bool violation = false;
};

/// (I - 2) / 2 for I in (2, 4].
AnalyticRate asymptotic_rate_analytic(double i_hat);
/// -log2((6 - I) / 4) for I in (2, 4].
AnalyticRate single_trial_minentropy(double i_hat);

/// Richardson extrapolation 2 g(b/2) - g(b) with b = 0.005.
double asymptotic_rate_numeric(const TrialModel& model, const TrialDistribution& nu);

struct GuessingResult {
    /// sum_k w_k sum_xy P(xy) max_ab sigma_k(ab|xy), maximized over decompositions of nu.
    double p_guess = 0.0;
    /// Total weight on vertices that are not deterministic.
    double nondeterministic_weight = 0.0;
    std::vector<double> weights;
};

/// Throws ValidationError when nu is not in the model (1e-8).
GuessingResult guessing_probability_lp(const TrialModel& model, const TrialDistribution& nu);

struct StrengthResult {
    double bits = 0.0;
    /// Certified upper bound on bits minus the true minimum.
    double gap_bits = 0.0;
    std::vector<double> weights;  // over local_deterministic_points(nu.inputs())
    int iterations = 0;
    bool converged = false;
};

/// min over local-realist mixtures sigma of D(nu || sigma) in bits.
StrengthResult statistical_strength_detail(const TrialDistribution& nu);
/// As above; throws NumericalError when the solver does not converge.
double statistical_strength(const TrialDistribution& nu);

struct CertificateRateResult {
    double gamma_pef = 0.0;
    double beta0 = 0.0;
    double strength_bits = 0.0;
    double agreement_gap = 0.0;
    bool plateau_reached = false;
    std::vector<RatePoint> trace;  // the doubling sequence
};

/// Doubles beta from 0.05 until beta g(beta) changes by less than rel_tol
/// relative (floor 1e-10 absolute), then bisects for the first beta on the plateau.
CertificateRateResult certificate_rate(const TrialModel& model, const TrialDistribution& nu,
                                       double rel_tol = 1e-6, double beta_max = 8.0);

struct ThresholdResult {
    double beta_th = 0.0;
    /// Index into model.vertices() of the vertex whose constraint binds last.
    std::size_t vertex = 0;
};

/// Smallest beta above which every non-deterministic vertex constraint is
/// implied by the deterministic ones (for all nonnegative F).
ThresholdResult constraint_threshold(const TrialModel& model, double tol = 1e-10);

/// max E_sigma F sigma(C|Z)^beta over F >= 0 satisfying all deterministic-vertex constraints.
double implied_constraint_value(const TrialModel& model, std::size_t vertex, double beta);

}  // namespace pefcert
