#include "pefcert/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pefcert/detail/nelder_mead.hpp"
#include "pefcert/errors.hpp"
#include "pefcert/rates.hpp"

namespace pefcert {

namespace {

constexpr double kPi = std::numbers::pi;

void check_setup(const QuantumSetup& s) {
    if (!(s.theta > 0.0 && s.theta <= kPi / 4 + 1e-15)) throw ValidationError("theta must lie in (0, pi/4]");
    if (!(s.eta >= 0.0 && s.eta <= 1.0)) throw ValidationError("eta must lie in [0, 1]");
    if (!(s.visibility >= 0.0 && s.visibility <= 1.0)) throw ValidationError("visibility must lie in [0, 1]");
}

// Both outcome-probability tables below use the one- and two-body
// expectations of the observables; the state is real so only Z/X terms survive.
struct Moments {
    double alice = 0.0;  // <A>
    double bob = 0.0;    // <B>
    double joint = 0.0;  // <A B>
};

Moments moments(const QuantumSetup& s, double phi_a, double phi_b) {
    const double c2 = std::cos(2.0 * s.theta);
    const double s2 = std::sin(2.0 * s.theta);
    Moments m;
    m.alice = s.visibility * c2 * std::cos(phi_a);
    m.bob = s.visibility * c2 * std::cos(phi_b);
    m.joint = s.visibility *
              (std::cos(phi_a) * std::cos(phi_b) + s2 * std::sin(phi_a) * std::sin(phi_b));
    return m;
}

TrialDistribution build(const QuantumSetup& s) {
    CellTable cond{};
    const double eta = s.eta;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const Moments m = moments(s, s.alice_angles[std::size_t(x)], s.bob_angles[std::size_t(y)]);
            double ideal[2][2];
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    const double sa = a ? -1.0 : 1.0;
                    const double sb = b ? -1.0 : 1.0;
                    ideal[a][b] = std::max(0.0, (1.0 + sa * m.alice + sb * m.bob + sa * sb * m.joint) / 4.0);
                }
            }
            const double pa[2] = {ideal[0][0] + ideal[0][1], ideal[1][0] + ideal[1][1]};
            const double pb[2] = {ideal[0][0] + ideal[1][0], ideal[0][1] + ideal[1][1]};
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    double p = eta * eta * ideal[a][b];
                    if (b == 0) p += eta * (1.0 - eta) * pa[a];
                    if (a == 0) p += (1.0 - eta) * eta * pb[b];
                    if (a == 0 && b == 0) p += (1.0 - eta) * (1.0 - eta);
                    cond[cell_index(x, y, a, b)] = p;
                }
            }
            // renormalize each setting against rounding in the clamps above
            double total = 0.0;
            for (int k = 0; k < 4; ++k) total += cond[cell_index(x, y, k >> 1, k & 1)];
            for (int k = 0; k < 4; ++k) cond[cell_index(x, y, k >> 1, k & 1)] /= total;
        }
    }
    return TrialDistribution::from_conditionals(s.inputs, cond);
}

// Deterministic lattice of 16 starting points for the four angles.
std::vector<std::vector<double>> angle_lattice() {
    std::vector<std::vector<double>> starts;
    const double a0[2] = {0.1, 1.7};
    const double a1[2] = {1.4, 2.9};
    const double b0[2] = {0.6, 2.2};
    const double b1[2] = {-0.7, 1.0};
    for (double p : a0) {
        for (double q : a1) {
            for (double r : b0) {
                for (double t : b1) starts.push_back({p, q, r, t});
            }
        }
    }
    return starts;
}

QuantumSetup with_angles(QuantumSetup s, const std::vector<double>& angles) {
    s.alice_angles = {angles[0], angles[1]};
    s.bob_angles = {angles[2], angles[3]};
    return s;
}

// Angles reduced to (-pi, pi] so reported setups are canonical.
double wrap(double phi) {
    double w = std::remainder(phi, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

}  // namespace

double chsh_expectation(const TrialDistribution& nu) {
    double total = 0.0;
    for (std::size_t xy = 0; xy < kInputs; ++xy) {
        const double m = nu.input_marginal(xy);
        if (m <= 0.0) throw ValidationError("chsh_expectation: setting with zero probability");
        const double sign_xy = (xy == 3) ? -1.0 : 1.0;
        const double corr = nu[4 * xy] - nu[4 * xy + 1] - nu[4 * xy + 2] + nu[4 * xy + 3];
        total += sign_xy * corr / m;
    }
    return total;
}

TrialDistribution quantum_distribution(const QuantumSetup& setup) {
    check_setup(setup);
    return build(setup);
}

FamilyPoint optimize_unbalanced(double theta) {
    if (!(theta > 0.0 && theta <= kPi / 4 + 1e-15)) throw ValidationError("theta must lie in (0, pi/4]");
    QuantumSetup base;
    base.theta = std::min(theta, kPi / 4);
    auto objective = [&](const std::vector<double>& angles) {
        return -chsh_expectation(build(with_angles(base, angles)));
    };
    detail::NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    int evals = 0;
    const auto starts = angle_lattice();
    for (const auto& start : starts) {
        detail::NelderMeadResult r = detail::nelder_mead(objective, start, 0.4, 1e-14, 4000);
        // restart from the optimum with a fresh simplex to escape collapsed simplices
        r = detail::nelder_mead(objective, r.x, 0.05, 1e-15, 4000);
        evals += r.evaluations;
        if (r.value < best.value - 1e-13) best = r;
    }
    std::vector<double> angles = best.x;
    for (double& a : angles) a = wrap(a);
    QuantumSetup setup = with_angles(base, angles);
    FamilyPoint out{build(setup), setup, -best.value, int(starts.size()), evals, best.converged};
    return out;
}

TrialDistribution family_unbalanced(double theta) {
    FamilyPoint p = optimize_unbalanced(theta);
    if (!p.converged) {
        throw NumericalError("family_unbalanced: angle search did not converge (best CHSH " +
                             std::to_string(p.objective) + ")");
    }
    return p.distribution;
}

TrialDistribution family_werner(double p) {
    if (!(p > 1.0 / std::numbers::sqrt2 && p <= 1.0)) throw ValidationError("Werner visibility must lie in (1/sqrt2, 1]");
    // the optimal angles for the maximally entangled state do not depend on the noise level
    static const QuantumSetup optimal = optimize_unbalanced(kPi / 4).setup;
    QuantumSetup s = optimal;
    s.visibility = p;
    return build(s);
}

double werner_visibility_for_chsh(double i_hat) {
    if (!(i_hat > 2.0 && i_hat <= 2.0 * std::numbers::sqrt2 + 1e-12)) {
        throw ValidationError("Werner family reaches CHSH values in (2, 2 sqrt 2]");
    }
    return std::min(1.0, i_hat / (2.0 * std::numbers::sqrt2));
}

double unbalanced_theta_for_chsh(double i_hat) {
    if (!(i_hat > 2.0 && i_hat <= 2.0 * std::numbers::sqrt2 + 1e-12)) {
        throw ValidationError("unbalanced family reaches CHSH values in (2, 2 sqrt 2]");
    }
    // maximal CHSH value of cos t|00> + sin t|11> is 2 sqrt(1 + sin^2 2t)
    const double s2 = std::min(1.0, std::sqrt(std::max(0.0, i_hat * i_hat / 4.0 - 1.0)));
    return std::asin(s2) / 2.0;
}

FamilyPoint optimize_eberhard(double eta) {
    if (!(eta > 2.0 / 3.0 && eta < 1.0)) throw ValidationError("eta must lie in (2/3, 1)");
    QuantumSetup base;
    base.eta = eta;
    // theta = (pi/4) sin^2(t) keeps the state angle in range without constraints
    auto setup_of = [&](const std::vector<double>& v) {
        QuantumSetup s = with_angles(base, {v[1], v[2], v[3], v[4]});
        const double sn = std::sin(v[0]);
        s.theta = std::max(1e-9, kPi / 4 * sn * sn);
        return s;
    };
    auto objective = [&](const std::vector<double>& v) { return -statistical_strength_detail(build(setup_of(v))).bits; };

    detail::NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    int evals = 0;
    const auto lattice = angle_lattice();
    // lossy detectors favour weakly entangled states; start below and near theta = pi/4
    const double t_starts[2] = {0.45, 1.2};
    int starts = 0;
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        std::vector<double> start{t_starts[k % 2], lattice[k][0], lattice[k][1], lattice[k][2], lattice[k][3]};
        detail::NelderMeadResult r = detail::nelder_mead(objective, start, 0.3, 1e-13, 1500);
        evals += r.evaluations;
        ++starts;
        if (r.value < best.value) best = r;
    }
    best = detail::nelder_mead(objective, best.x, 0.02, 1e-14, 3000);
    evals += best.evaluations;
    if (!(best.value < -1e-12)) {
        throw NumericalError("family_eberhard: search stuck at the local-realist boundary (strength ~ 0)");
    }
    std::vector<double> v = best.x;
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = wrap(v[k]);
    QuantumSetup setup = setup_of(v);
    return FamilyPoint{build(setup), setup, -best.value, starts, evals, best.converged};
}

TrialDistribution family_eberhard(double eta) { return optimize_eberhard(eta).distribution; }

double tv_distance(const TrialDistribution& nu, const TrialDistribution& nu_prime) {
    double total = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) total += std::abs(nu[i] - nu_prime[i]);
    return 0.5 * total;
}

double kl_divergence(const TrialDistribution& nu, const TrialDistribution& sigma) {
    double total = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) {
        if (nu[i] <= 0.0) continue;
        if (sigma[i] <= 0.0) return std::numeric_limits<double>::infinity();
        total += nu[i] * std::log2(nu[i] / sigma[i]);
    }
    return std::max(0.0, total);
}

DivergenceReport divergences(const TrialDistribution& nu, const TrialDistribution& sigma) {
    return {tv_distance(nu, sigma), kl_divergence(nu, sigma)};
}

}  // namespace pefcert
