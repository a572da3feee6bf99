#include "pefcert/trial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pefcert/errors.hpp"

namespace pefcert {

namespace {

constexpr double kNormTol = 1e-12;

}  // namespace

InputDistribution::InputDistribution() : probs_{0.25, 0.25, 0.25, 0.25} {}

InputDistribution::InputDistribution(const std::array<double, kInputs>& probs) : probs_(probs) {
    double total = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p <= 0.0) {
            throw ValidationError("input distribution entries must be strictly positive");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTol) {
        throw ValidationError("input distribution must sum to 1 (got " + std::to_string(total) + ")");
    }
}

TrialDistribution::TrialDistribution(const CellTable& probs) : probs_(probs) {
    double total = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw ValidationError("trial distribution entries must be finite and nonnegative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTol) {
        throw ValidationError("trial distribution must sum to 1 (got " + std::to_string(total) + ")");
    }
}

TrialDistribution TrialDistribution::from_conditionals(const InputDistribution& inputs,
                                                       const CellTable& conditionals) {
    CellTable probs{};
    for (std::size_t i = 0; i < kCells; ++i) {
        const Cell c = cell_of(i);
        probs[i] = inputs(c.x, c.y) * conditionals[i];
    }
    return TrialDistribution(probs);
}

double TrialDistribution::input_marginal(int x, int y) const {
    return input_marginal(input_index(x, y));
}

double TrialDistribution::input_marginal(std::size_t xy) const {
    // cells of setting xy are contiguous: 4*xy .. 4*xy+3
    const std::size_t base = 4 * xy;
    return probs_[base] + probs_[base + 1] + probs_[base + 2] + probs_[base + 3];
}

double TrialDistribution::conditional(std::size_t i) const {
    const double m = input_marginal(i / 4);
    return m > 0.0 ? probs_[i] / m : 0.0;
}

InputDistribution TrialDistribution::inputs() const {
    std::array<double, kInputs> p{};
    double total = 0.0;
    for (std::size_t xy = 0; xy < kInputs; ++xy) {
        p[xy] = input_marginal(xy);
        total += p[xy];
    }
    // remove the last ulp-level normalization error before validating
    for (double& v : p) v /= total;
    return InputDistribution(p);
}

TrialDistribution mixture(std::span<const TrialDistribution> dists, std::span<const double> weights) {
    if (dists.size() != weights.size() || dists.empty()) {
        throw ValidationError("mixture: need one weight per distribution");
    }
    CellTable probs{};
    double wsum = 0.0;
    for (std::size_t k = 0; k < dists.size(); ++k) {
        if (weights[k] < 0.0) throw ValidationError("mixture: negative weight");
        wsum += weights[k];
        for (std::size_t i = 0; i < kCells; ++i) probs[i] += weights[k] * dists[k][i];
    }
    if (std::abs(wsum - 1.0) > 1e-12) throw ValidationError("mixture: weights must sum to 1");
    return TrialDistribution(probs);
}

double max_abs_diff(const TrialDistribution& lhs, const TrialDistribution& rhs) {
    double m = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) m = std::max(m, std::abs(lhs[i] - rhs[i]));
    return m;
}

}  // namespace pefcert
