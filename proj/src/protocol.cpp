#include "pefcert/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "pefcert/errors.hpp"

namespace pefcert {

void CertificationParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ValidationError("kappa must lie in (0, 1]");
    if (!(target_bits >= 0.0) || !std::isfinite(target_bits)) throw ValidationError("target bits must be nonnegative");
    if (n_max < 1) throw ValidationError("n_max must be at least 1");
}

double CertificationParams::planned_neg_log2_p() const {
    return target_bits + (1.0 + 1.0 / beta) * (-std::log2(kappa));
}

double CertificationParams::threshold_log2() const { return beta * planned_neg_log2_p() - std::log2(epsilon); }

AccumulatorState::AccumulatorState(CertificationParams params, Pef pef) : params_(params), pef_(pef) {
    params_.validate();
    if (pef_.beta != params_.beta) throw ValidationError("PEF power does not match the run's beta");
}

void AccumulatorState::set_params(const CertificationParams& params) {
    if (params.beta != params_.beta) throw ValidationError("beta is fixed for the lifetime of a run");
    if (seen_ > 0) throw ValidationError("parameters cannot change after the first trial");
    params.validate();
    params_ = params;
}

void AccumulatorState::add_log(double v) {
    // Neumaier compensated summation
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
        compensation_ += (sum_ - t) + v;
    } else {
        compensation_ += (v - t) + sum_;
    }
    sum_ = t;
}

void AccumulatorState::update(const TrialRecord& record) {
    if (record.x < 0 || record.x > 1 || record.y < 0 || record.y > 1 || record.a < 0 || record.a > 1 ||
        record.b < 0 || record.b > 1) {
        throw ValidationError("trial record entries must be 0 or 1");
    }
    if (record.index <= last_index_) throw ValidationError("trial indices must be strictly increasing");
    last_index_ = record.index;
    ++seen_;
    ++counts_[record.cell()];
    if (frozen_ || failed_) return;
    const double f = pef_.values[record.cell()];
    ++used_;
    if (f <= 0.0) {
        failed_ = true;
        sum_ = -std::numeric_limits<double>::infinity();
        compensation_ = 0.0;
        return;
    }
    add_log(std::log2(f));
    if (log2_T() >= threshold_log2()) frozen_ = true;
}

void AccumulatorState::install_pef(Pef pef) {
    if (frozen_) throw ValidationError("cannot replan a frozen run");
    if (failed_) throw ValidationError("cannot replan a failed run");
    if (pef.beta != params_.beta) throw ValidationError("beta is fixed for the lifetime of a run");
    pef_ = pef;
    ++replans_;
}

AccumulatorState new_run(const CertificationParams& params, const TrialModel& model, const TrialDistribution& nu0) {
    params.validate();
    if (!is_member(model, nu0, 1e-8).member) throw ValidationError("planning distribution is not in the model");
    const PefSolution sol = optimize_pef(model, nu0, params.beta, params.n_max, params.epsilon);
    return AccumulatorState(params, sol.pef);
}

void update(AccumulatorState& state, const TrialRecord& record) { state.update(record); }

bool replan_pef(AccumulatorState& state, const TrialModel& model, const TrialDistribution& empirical_nu) {
    if (state.frozen()) throw ValidationError("cannot replan a frozen run");
    const TrialDistribution target =
        is_member(model, empirical_nu, 1e-8).member ? empirical_nu : project_to_model(model, empirical_nu);
    try {
        const PefSolution sol = optimize_pef(model, target, state.params().beta);
        state.install_pef(sol.pef);
        return true;
    } catch (const NumericalError&) {
        return false;
    }
}

EntropyCertificate certify(const AccumulatorState& state) {
    const CertificationParams& p = state.params();
    EntropyCertificate c;
    c.epsilon = p.epsilon;
    c.kappa = p.kappa;
    c.beta = p.beta;
    c.log2_Tn = state.log2_T();
    c.n = state.trials_seen();
    c.pef_replans = state.replans();
    const double neg_log2_p = p.planned_neg_log2_p();
    c.p_log2 = -neg_log2_p;
    // p must not be below 1 / |range of outputs| = 4^-n
    if (neg_log2_p > 2.0 * double(std::max<long long>(c.n, 1))) {
        throw ValidationError("planned p = 2^-" + std::to_string(neg_log2_p) + " is below 4^-n for n = " +
                              std::to_string(c.n));
    }
    c.success = !state.failed() && c.log2_Tn >= p.threshold_log2();
    c.entropy_bits = c.success ? neg_log2_p + (1.0 + 1.0 / p.beta) * std::log2(p.kappa) : 0.0;
    return c;
}

UpeBound upe_bound(const AccumulatorState& state) {
    const CertificationParams& p = state.params();
    UpeBound u;
    u.log2_u = -(state.log2_T() + std::log2(p.epsilon)) / p.beta;
    u.u = std::exp2(u.log2_u);
    return u;
}

TrialDistribution smoothed_empirical(const std::vector<long long>& counts, const InputDistribution& inputs) {
    if (counts.size() != kCells) throw ValidationError("expected 16 cell counts");
    CellTable cond{};
    for (std::size_t xy = 0; xy < kInputs; ++xy) {
        long long total = 0;
        for (std::size_t ab = 0; ab < 4; ++ab) total += counts[4 * xy + ab];
        for (std::size_t ab = 0; ab < 4; ++ab) {
            cond[4 * xy + ab] = double(counts[4 * xy + ab] + 1) / double(total + 4);
        }
    }
    return TrialDistribution::from_conditionals(inputs, cond);
}

EntropyCertificate run_protocol(const CertificationParams& params, const TrialModel& model,
                                const TrialDistribution& nu0, const std::vector<TrialRecord>& records,
                                const RunOptions& options) {
    AccumulatorState state = new_run(params, model, nu0);
    for (const TrialRecord& r : records) {
        state.update(r);
        if (options.replan_every > 0 && state.trials_seen() % options.replan_every == 0 && !state.frozen() &&
            !state.failed()) {
            replan_pef(state, model, smoothed_empirical(state.counts(), model.inputs()));
        }
    }
    return certify(state);
}

std::vector<TrialRecord> simulate_trials(const TrialDistribution& nu, long long n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("simulate_trials: n must be at least 1");
    std::array<double, kCells> cum{};
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < kCells; ++i) {
        acc += nu[i];
        cum[i] = acc;
        if (nu[i] > 0.0) last = i;
    }
    std::mt19937_64 gen(seed);
    std::vector<TrialRecord> out;
    out.reserve(std::size_t(n));
    for (long long k = 1; k <= n; ++k) {
        // 53 random bits so the sequence is the same on every platform
        const double u = double(gen() >> 11) * 0x1.0p-53;
        std::size_t cell = last;
        for (std::size_t i = 0; i <= last; ++i) {
            if (u < cum[i] && nu[i] > 0.0) {
                cell = i;
                break;
            }
        }
        const Cell c = cell_of(cell);
        out.push_back({k, c.x, c.y, c.a, c.b});
    }
    return out;
}

std::vector<std::uint8_t> toeplitz_extract(const std::vector<std::uint8_t>& raw, const std::vector<std::uint8_t>& seed,
                                           std::size_t out_bits) {
    const std::size_t n = raw.size();
    if (n == 0 || out_bits == 0) throw ValidationError("toeplitz_extract: empty input or output");
    if (seed.size() != n + out_bits - 1) throw ValidationError("toeplitz_extract: seed must have n + m - 1 bits");
    std::vector<std::uint8_t> out(out_bits, 0);
    for (std::size_t i = 0; i < out_bits; ++i) {
        std::uint8_t bit = 0;
        // T(i, j) = seed[i - j + n - 1]
        for (std::size_t j = 0; j < n; ++j) bit ^= std::uint8_t(seed[i + n - 1 - j] & raw[j] & 1u);
        out[i] = bit;
    }
    return out;
}

std::vector<std::uint8_t> output_bits(const std::vector<TrialRecord>& records) {
    std::vector<std::uint8_t> out;
    out.reserve(2 * records.size());
    for (const TrialRecord& r : records) {
        out.push_back(std::uint8_t(r.a));
        out.push_back(std::uint8_t(r.b));
    }
    return out;
}

}  // namespace pefcert
