#pragma once

// The certification protocol: a running product of PEFs (kept in log2),
// early stopping once the success threshold is met, and the final entropy
// certificate.

#include <cstdint>
#include <vector>

#include "pefcert/bellmodel.hpp"
#include "pefcert/pefopt.hpp"

namespace pefcert {

struct CertificationParams {
    double beta = 1.0;
    double epsilon = 1e-6;
    double kappa = 1.0;
    double target_bits = 0.0;  // b
    long long n_max = 1;

    void validate() const;
    /// -log2 p = b + (1 + 1/beta)(-log2 kappa)
    double planned_neg_log2_p() const;
    /// beta (-log2 p) - log2 eps
    double threshold_log2() const;
};

struct TrialRecord {
    long long index = 0;
    int x = 0;
    int y = 0;
    int a = 0;
    int b = 0;

    std::size_t cell() const { return cell_index(x, y, a, b); }
    bool operator==(const TrialRecord&) const = default;
};

struct EntropyCertificate {
    bool success = false;
    double p_log2 = 0.0;
    double entropy_bits = 0.0;
    double epsilon = 0.0;
    double kappa = 0.0;
    double beta = 0.0;
    double log2_Tn = 0.0;
    long long n = 0;
    int pef_replans = 0;
};

struct UpeBound {
    double u = 1.0;
    double log2_u = 0.0;
};

class AccumulatorState {
public:
    AccumulatorState(CertificationParams params, Pef pef);

    const CertificationParams& params() const { return params_; }
    /// Replaces epsilon, kappa, b or n_max before the first trial; beta can never change.
    void set_params(const CertificationParams& params);

    double log2_T() const { return sum_ + compensation_; }
    long long trials_used() const { return used_; }
    long long trials_seen() const { return seen_; }
    bool frozen() const { return frozen_; }
    bool failed() const { return failed_; }
    int replans() const { return replans_; }
    double threshold_log2() const { return params_.threshold_log2(); }
    const Pef& current_pef() const { return pef_; }
    const std::vector<long long>& counts() const { return counts_; }

    /// Multiplies in F(abxy) of the current PEF; no-op apart from counting once frozen.
    void update(const TrialRecord& record);
    /// Installs a new PEF at the same beta; rejected once frozen.
    void install_pef(Pef pef);

private:
    void add_log(double v);

    CertificationParams params_;
    Pef pef_;
    double sum_ = 0.0;
    double compensation_ = 0.0;
    long long used_ = 0;
    long long seen_ = 0;
    bool frozen_ = false;
    bool failed_ = false;
    int replans_ = 0;
    long long last_index_ = 0;
    std::vector<long long> counts_ = std::vector<long long>(kCells, 0);
};

/// Starts a run with the PEF optimized for the planning distribution nu0.
AccumulatorState new_run(const CertificationParams& params, const TrialModel& model, const TrialDistribution& nu0);
void update(AccumulatorState& state, const TrialRecord& record);
/// Re-optimizes the PEF for empirical_nu (projected onto the model when
/// outside it). On solver failure the old PEF stays; returns whether it changed.
bool replan_pef(AccumulatorState& state, const TrialModel& model, const TrialDistribution& empirical_nu);
EntropyCertificate certify(const AccumulatorState& state);
UpeBound upe_bound(const AccumulatorState& state);

/// Add-one smoothed frequencies nu(abxy) = P(xy) (n_abxy + 1) / (n_xy + 4) with known inputs.
TrialDistribution smoothed_empirical(const std::vector<long long>& counts, const InputDistribution& inputs);

struct RunOptions {
    /// Replan every this many trials from the smoothed counts; 0 disables.
    long long replan_every = 10000;
};

/// Feeds records through a fresh run and returns its certificate.
EntropyCertificate run_protocol(const CertificationParams& params, const TrialModel& model,
                                const TrialDistribution& nu0, const std::vector<TrialRecord>& records,
                                const RunOptions& options = {});

/// i.i.d. draws from nu with mt19937_64 and 53-bit uniforms; indices start at 1.
std::vector<TrialRecord> simulate_trials(const TrialDistribution& nu, long long n, std::uint64_t seed);

/// Toeplitz hashing of raw bits with a seed of raw.size() + out_bits - 1 bits.
std::vector<std::uint8_t> toeplitz_extract(const std::vector<std::uint8_t>& raw, const std::vector<std::uint8_t>& seed,
                                           std::size_t out_bits);
/// Output bits a, b of each record in order.
std::vector<std::uint8_t> output_bits(const std::vector<TrialRecord>& records);

}  // namespace pefcert
