#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <numbers>

#include "pefcert/distributions.hpp"
#include "pefcert/errors.hpp"

using namespace pefcert;

namespace {

// Independent Born-rule evaluation with explicit 4x4 matrices. Observable
// cos(phi) Z + sin(phi) X, outcome 0 is the +1 eigenvalue, and a missed
// detection is counted as outcome 0.
TrialDistribution born_oracle(const QuantumSetup& s) {
    Eigen::Vector4d psi(std::cos(s.theta), 0, 0, std::sin(s.theta));
    Eigen::Matrix4d rho = s.visibility * psi * psi.transpose() + (1.0 - s.visibility) * Eigen::Matrix4d::Identity() / 4;
    auto effect = [&](double phi, int outcome) {
        Eigen::Matrix2d obs;
        obs << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
        const Eigen::Matrix2d proj = (Eigen::Matrix2d::Identity() + (outcome == 0 ? 1.0 : -1.0) * obs) / 2;
        Eigen::Matrix2d e = s.eta * proj;
        if (outcome == 0) e += (1.0 - s.eta) * Eigen::Matrix2d::Identity();
        return e;
    };
    CellTable c{};
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    const Eigen::Matrix4d e = Eigen::kroneckerProduct(effect(s.alice_angles[x], a), effect(s.bob_angles[y], b)).eval();
                    c[cell_index(x, y, a, b)] = s.inputs(x, y) * (rho * e).trace();
                }
            }
        }
    }
    return TrialDistribution(c);
}

}  // namespace

TEST_CASE("Born rule agrees with an explicit density-matrix computation") {
    const double thetas[] = {0.2, 0.5, std::numbers::pi / 4};
    const double etas[] = {1.0, 0.85};
    const double vis[] = {1.0, 0.7};
    int k = 0;
    for (double th : thetas) {
        for (double eta : etas) {
            for (double v : vis) {
                QuantumSetup s;
                s.theta = th;
                s.eta = eta;
                s.visibility = v;
                s.alice_angles = {0.3 * k, 1.1 + 0.2 * k};
                s.bob_angles = {-0.4 + 0.1 * k, 2.0 - 0.3 * k};
                ++k;
                CHECK(max_abs_diff(quantum_distribution(s), born_oracle(s)) < 1e-13);
            }
        }
    }
}

TEST_CASE("Werner family reaches 2 sqrt2 p") {
    for (double p : {0.75, 0.9, 1.0}) {
        CHECK(chsh_expectation(family_werner(p)) == doctest::Approx(2 * std::sqrt(2.0) * p).epsilon(1e-10));
    }
    CHECK_THROWS_AS(family_werner(0.7), ValidationError);
    CHECK_THROWS_AS(family_werner(1.01), ValidationError);
    CHECK(werner_visibility_for_chsh(2.0 * std::sqrt(2.0)) == doctest::Approx(1.0));
}

TEST_CASE("unbalanced family attains 2 sqrt(1 + sin^2 2theta)") {
    for (double th : {0.15, 0.4, 0.7}) {
        const double want = 2.0 * std::sqrt(1.0 + std::pow(std::sin(2 * th), 2));
        CHECK(chsh_expectation(family_unbalanced(th)) == doctest::Approx(want).epsilon(1e-9));
        CHECK(unbalanced_theta_for_chsh(want) == doctest::Approx(th).epsilon(1e-9));
    }
    CHECK_THROWS_AS(family_unbalanced(0.0), ValidationError);
}

TEST_CASE("eberhard family records its optimizer provenance") {
    const FamilyPoint fp = optimize_eberhard(0.9);
    CHECK(fp.starts > 0);
    CHECK(fp.evaluations > 0);
    CHECK(fp.objective > 0.0);
    CHECK(fp.setup.eta == 0.9);
    CHECK(fp.setup.theta < std::numbers::pi / 4);
    CHECK_THROWS_AS(optimize_eberhard(0.6), ValidationError);
}

TEST_CASE("divergences") {
    const TrialDistribution a = family_werner(1.0);
    const TrialDistribution b = family_werner(0.8);
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(kl_divergence(a, a) == doctest::Approx(0.0));
    CHECK(tv_distance(a, b) > 0.0);
    CHECK(kl_divergence(a, b) > 0.0);
    // Pinsker: TV <= sqrt(ln2 / 2 * KL_bits)
    CHECK(tv_distance(a, b) <= std::sqrt(std::log(2.0) / 2 * kl_divergence(a, b)) + 1e-12);
    CellTable point{};
    for (std::size_t xy = 0; xy < kInputs; ++xy) point[4 * xy] = 0.25;
    CHECK(std::isinf(kl_divergence(a, TrialDistribution(point))));
    const DivergenceReport r = divergences(a, b);
    CHECK(r.tv == tv_distance(a, b));
}
