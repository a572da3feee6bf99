#pragma once

// Single-trial distributions: the CHSH statistic, divergences, and the three
// two-qubit families (unbalanced Bell state, Werner state, lossy detectors).

#include <array>
#include <string>

#include "pefcert/trial.hpp"

namespace pefcert {

/// Two-qubit setup: state cos(theta)|00> + sin(theta)|11> mixed with white
/// noise at the given visibility, measured with real-plane projective
/// observables cos(phi) Z + sin(phi) X. A detector fails with probability
/// 1 - eta and a failure is recorded as outcome 0.
struct QuantumSetup {
    double theta = 0.7853981633974483;
    std::array<double, 2> alice_angles{0.0, 1.5707963267948966};
    std::array<double, 2> bob_angles{0.7853981633974483, -0.7853981633974483};
    double eta = 1.0;
    double visibility = 1.0;
    InputDistribution inputs{};
};

/// sum nu(abxy) (1 - 2xy) (-1)^(a+b) / nu(xy)
double chsh_expectation(const TrialDistribution& nu);

/// Born-rule distribution of the setup; throws ValidationError on bad ranges.
TrialDistribution quantum_distribution(const QuantumSetup& setup);

/// Optimized member of a family together with the optimizer provenance.
struct FamilyPoint {
    TrialDistribution distribution;
    QuantumSetup setup;
    /// Value of the maximized objective (CHSH expectation or statistical strength in bits).
    double objective = 0.0;
    int starts = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Maximizes the CHSH expectation over the four measurement angles.
FamilyPoint optimize_unbalanced(double theta);
/// theta in (0, pi/4]
TrialDistribution family_unbalanced(double theta);
/// Werner state with visibility p in (1/sqrt2, 1], measured with the
/// CHSH-optimal angles of the maximally entangled state.
TrialDistribution family_werner(double p);
/// Werner visibility giving CHSH expectation i_hat, i.e. i_hat / (2 sqrt 2).
double werner_visibility_for_chsh(double i_hat);
/// State angle whose CHSH-optimal distribution has expectation i_hat in (2, 2 sqrt 2].
double unbalanced_theta_for_chsh(double i_hat);

/// Maximizes the statistical strength over the state angle and the four
/// measurement angles at detector efficiency eta in (2/3, 1).
FamilyPoint optimize_eberhard(double eta);
TrialDistribution family_eberhard(double eta);

/// Half the L1 distance.
double tv_distance(const TrialDistribution& nu, const TrialDistribution& nu_prime);

/// Base-2 relative entropy D(nu || sigma); +infinity when nu is not
/// absolutely continuous with respect to sigma.
double kl_divergence(const TrialDistribution& nu, const TrialDistribution& sigma);

struct DivergenceReport {
    double tv = 0.0;
    double kl_bits = 0.0;
};
DivergenceReport divergences(const TrialDistribution& nu, const TrialDistribution& sigma);

}  // namespace pefcert
