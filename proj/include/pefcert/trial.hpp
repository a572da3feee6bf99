#pragma once

// Value types for a single trial of the two-party, two-setting, two-outcome
// Bell test. Cells are flattened as 8x + 4y + 2a + b.

#include <array>
#include <cstddef>
#include <span>

namespace pefcert {

inline constexpr std::size_t kCells = 16;
inline constexpr std::size_t kInputs = 4;

using CellTable = std::array<double, kCells>;

struct Cell {
    int x = 0;
    int y = 0;
    int a = 0;
    int b = 0;
};

constexpr std::size_t cell_index(int x, int y, int a, int b) {
    return static_cast<std::size_t>(8 * x + 4 * y + 2 * a + b);
}

constexpr std::size_t input_index(int x, int y) { return static_cast<std::size_t>(2 * x + y); }

constexpr Cell cell_of(std::size_t i) {
    return Cell{static_cast<int>((i >> 3) & 1), static_cast<int>((i >> 2) & 1),
                static_cast<int>((i >> 1) & 1), static_cast<int>(i & 1)};
}

/// Distribution of the setting pair (x, y); every entry strictly positive.
class InputDistribution {
public:
    InputDistribution();  // uniform
    explicit InputDistribution(const std::array<double, kInputs>& probs);

    static InputDistribution uniform() { return InputDistribution(); }

    double operator()(int x, int y) const { return probs_[input_index(x, y)]; }
    double operator[](std::size_t xy) const { return probs_[xy]; }
    const std::array<double, kInputs>& probs() const { return probs_; }

    bool operator==(const InputDistribution&) const = default;

private:
    std::array<double, kInputs> probs_;
};

/// Joint distribution over (x, y, a, b) for one trial.
class TrialDistribution {
public:
    /// Validates nonnegativity and normalization (1e-12).
    explicit TrialDistribution(const CellTable& probs);

    /// Builds nu(abxy) = P(xy) * cond[abxy], where cond sums to one per setting.
    static TrialDistribution from_conditionals(const InputDistribution& inputs,
                                               const CellTable& conditionals);

    double operator[](std::size_t i) const { return probs_[i]; }
    double at(int x, int y, int a, int b) const { return probs_[cell_index(x, y, a, b)]; }
    const CellTable& probs() const { return probs_; }
    std::span<const double, kCells> span() const { return probs_; }

    /// nu(xy) = sum_ab nu(abxy)
    double input_marginal(int x, int y) const;
    double input_marginal(std::size_t xy) const;
    /// nu(ab|xy); zero when nu(xy) == 0.
    double conditional(std::size_t i) const;
    /// Input marginal as an InputDistribution; throws if a setting has zero mass.
    InputDistribution inputs() const;

    bool operator==(const TrialDistribution&) const = default;

private:
    CellTable probs_;
};

/// Convex combination sum_k w_k * dists[k]; weights must be nonnegative and sum to one.
TrialDistribution mixture(std::span<const TrialDistribution> dists, std::span<const double> weights);

/// Largest absolute entrywise difference.
double max_abs_diff(const TrialDistribution& lhs, const TrialDistribution& rhs);

}  // namespace pefcert
