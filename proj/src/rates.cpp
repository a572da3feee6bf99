#include "pefcert/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <Eigen/Dense>

#include "pefcert/errors.hpp"
#include "pefcert/lp.hpp"
#include "pefcert/pefopt.hpp"

namespace pefcert {

namespace {

void check_chsh_range(double i_hat) {
    if (!std::isfinite(i_hat) || i_hat > 4.0 + 1e-12) throw ValidationError("CHSH expectation must be at most 4");
}

}  // namespace

RatePoint rate_point(const TrialModel& model, const TrialDistribution& nu, double beta) {
    const PefSolution sol = optimize_pef(model, nu, beta);
    RatePoint p;
    p.beta = beta;
    p.beta_g_bits = sol.report.objective_bits;
    p.g_bits = p.beta_g_bits / beta;
    p.converged = sol.report.converged;
    return p;
}

std::vector<RatePoint> rate_curve(const TrialModel& model, const TrialDistribution& nu,
                                  const std::vector<double>& betas, int jobs) {
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0)) throw ValidationError("rate_curve: beta values must be positive");
        if (i > 0 && betas[i] < betas[i - 1]) throw ValidationError("rate_curve: beta values must be sorted");
    }
    std::vector<RatePoint> out(betas.size());
    const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), betas.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < betas.size(); ++i) out[i] = rate_point(model, nu, betas[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < betas.size(); i = next++) {
                try {
                    out[i] = rate_point(model, nu, betas[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

AnalyticRate asymptotic_rate_analytic(double i_hat) {
    check_chsh_range(i_hat);
    if (i_hat <= 2.0) return {0.0, false};
    return {(i_hat - 2.0) / 2.0, true};
}

AnalyticRate single_trial_minentropy(double i_hat) {
    check_chsh_range(i_hat);
    if (i_hat <= 2.0) return {0.0, false};
    return {-std::log2((6.0 - i_hat) / 4.0), true};
}

double asymptotic_rate_numeric(const TrialModel& model, const TrialDistribution& nu) {
    const double b = 0.005;
    return 2.0 * rate_point(model, nu, b / 2.0).g_bits - rate_point(model, nu, b).g_bits;
}

GuessingResult guessing_probability_lp(const TrialModel& model, const TrialDistribution& nu) {
    const Membership m = is_member(model, nu, 1e-8);
    if (!m.member) throw ValidationError("guessing_probability_lp: nu is not in the model");
    const auto& verts = model.vertices();
    const Eigen::Index k = Eigen::Index(verts.size());

    lp::LinearProgram prog;
    prog.cost = Eigen::VectorXd::Zero(k);
    prog.eq = Eigen::MatrixXd::Zero(Eigen::Index(kCells) + 1, k);
    prog.eq_rhs = Eigen::VectorXd::Zero(Eigen::Index(kCells) + 1);
    prog.ub = Eigen::MatrixXd::Zero(0, k);
    prog.ub_rhs = Eigen::VectorXd::Zero(0);
    for (Eigen::Index j = 0; j < k; ++j) {
        const TrialDistribution& v = verts[std::size_t(j)];
        double guess = 0.0;
        for (std::size_t xy = 0; xy < kInputs; ++xy) {
            double best = 0.0;
            for (std::size_t ab = 0; ab < 4; ++ab) best = std::max(best, v.conditional(4 * xy + ab));
            guess += model.inputs()[xy] * best;
        }
        prog.cost(j) = -guess;
        for (std::size_t i = 0; i < kCells; ++i) prog.eq(Eigen::Index(i), j) = v[i];
        prog.eq(Eigen::Index(kCells), j) = 1.0;
    }
    // nu projected onto the hull so that tiny rounding does not make the equalities infeasible
    const TrialDistribution target = m.distance > 0.0 ? project_to_model(model, nu) : nu;
    for (std::size_t i = 0; i < kCells; ++i) prog.eq_rhs(Eigen::Index(i)) = target[i];
    prog.eq_rhs(Eigen::Index(kCells)) = 1.0;

    const lp::Result res = lp::solve(prog);
    if (res.status != lp::Status::Optimal) throw NumericalError("guessing_probability_lp: decomposition LP failed");
    GuessingResult out;
    out.p_guess = -res.objective;
    out.weights.assign(res.x.data(), res.x.data() + k);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!is_deterministic(verts[std::size_t(j)], 1e-9)) out.nondeterministic_weight += res.x(j);
    }
    return out;
}

StrengthResult statistical_strength_detail(const TrialDistribution& nu) {
    const InputDistribution inputs = nu.inputs();
    const std::vector<TrialDistribution> lr = local_deterministic_points(inputs);
    constexpr int kW = 16;

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < kCells; ++i) {
        if (nu[i] > 0.0) support.push_back(i);
    }
    StrengthResult out;
    // inside the local polytope the minimum is exactly zero
    const Membership lr_member = is_member(lr, nu, 1e-13);
    if (lr_member.member) {
        out.weights = lr_member.weights;
        out.converged = true;
        return out;
    }

    const Eigen::Index m = Eigen::Index(support.size());
    Eigen::MatrixXd a(m, kW);  // a(j, i) = sigma_i(cell j)
    Eigen::VectorXd p(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        p(j) = nu[support[std::size_t(j)]];
        for (int i = 0; i < kW; ++i) a(j, i) = lr[std::size_t(i)][support[std::size_t(j)]];
    }

    // minimize -sum p ln(a w) - (1/t) sum ln w  subject to sum w = 1
    Eigen::VectorXd w = Eigen::VectorXd::Constant(kW, 1.0 / kW);
    Eigen::VectorXd q = a * w;

    // Frank-Wolfe gap: f(w) - f* <= max_i sum_j p_j a_ji / q_j - 1 (nats)
    auto fw_gap = [&] {
        const Eigen::VectorXd r = a.transpose() * (p.array() / q.array()).matrix();
        return std::max(0.0, r.maxCoeff() - 1.0);
    };

    double t = 10.0;
    double gap = fw_gap();
    for (int outer = 0; outer < 16 && gap > 1e-13; ++outer) {
        for (int inner = 0; inner < 200; ++inner) {
            const Eigen::VectorXd pq = (p.array() / q.array()).matrix();
            const Eigen::VectorXd grad = -(a.transpose() * pq) - (w.array().inverse() / t).matrix();
            Eigen::MatrixXd h = a.transpose() * (p.array() / q.array().square()).matrix().asDiagonal() * a;
            h.diagonal() += (w.array().square().inverse() / t).matrix();

            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(kW + 1, kW + 1);
            kkt.topLeftCorner(kW, kW) = h;
            kkt.block(0, kW, kW, 1).setOnes();
            kkt.block(kW, 0, 1, kW).setOnes();
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(kW + 1);
            rhs.head(kW) = -grad;
            const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
            Eigen::VectorXd dw = sol.head(kW);
            dw.array() -= dw.sum() / kW;  // stay on the simplex despite rounding
            const double decrement = -grad.dot(dw);
            ++out.iterations;
            if (decrement / 2.0 < 1e-15) break;

            double step = 1.0;
            for (int i = 0; i < kW; ++i) {
                if (dw(i) < 0.0) step = std::min(step, -0.99 * w(i) / dw(i));
            }
            const Eigen::VectorXd dq = a * dw;
            for (int ls = 0; ls < 60; ++ls) {
                double gain = 0.0;
                for (Eigen::Index j = 0; j < m; ++j) gain += p(j) * std::log1p(step * dq(j) / q(j));
                for (int i = 0; i < kW; ++i) gain += std::log1p(step * dw(i) / w(i)) / t;
                if (gain >= 0.25 * step * decrement) break;
                step *= 0.5;
                if (ls == 59) step = 0.0;
            }
            if (step == 0.0) break;
            w += step * dw;
            q = a * w;
        }
        gap = fw_gap();
        t *= 10.0;
    }
    out.converged = gap / std::numbers::ln2 <= 1e-10;
    double bits = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) bits += p(j) * std::log2(p(j) / q(j));
    out.bits = std::max(0.0, bits);
    out.gap_bits = gap / std::numbers::ln2;
    out.weights.assign(w.data(), w.data() + kW);
    return out;
}

double statistical_strength(const TrialDistribution& nu) {
    const StrengthResult r = statistical_strength_detail(nu);
    if (!r.converged) {
        throw NumericalError("statistical_strength: KL minimization stalled with gap " + std::to_string(r.gap_bits) + " bits");
    }
    return r.bits;
}

CertificateRateResult certificate_rate(const TrialModel& model, const TrialDistribution& nu, double rel_tol,
                                       double beta_max) {
    CertificateRateResult out;
    auto close = [&](double lhs, double rhs) {
        return std::abs(lhs - rhs) <= std::max(rel_tol * std::abs(rhs), 1e-10);
    };
    double beta = 0.05;
    out.trace.push_back(rate_point(model, nu, beta));
    int calm = 0;
    while (true) {
        beta *= 2.0;
        out.trace.push_back(rate_point(model, nu, beta));
        const double cur = out.trace.back().beta_g_bits;
        const double prev = out.trace[out.trace.size() - 2].beta_g_bits;
        calm = close(prev, cur) ? calm + 1 : 0;
        if (calm >= 2) {
            out.plateau_reached = true;
            break;
        }
        if (beta >= beta_max) break;
    }
    out.gamma_pef = std::max(0.0, out.trace.back().beta_g_bits);

    // first beta whose value is on the plateau, by bisection between trace points
    std::size_t first = 0;
    while (first < out.trace.size() && !close(out.trace[first].beta_g_bits, out.gamma_pef)) ++first;
    double hi = out.trace[first].beta;
    double lo = first == 0 ? 0.0 : out.trace[first - 1].beta;
    for (int it = 0; it < 30 && hi - lo > 1e-6 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (close(rate_point(model, nu, mid).beta_g_bits, out.gamma_pef)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.beta0 = hi;
    out.strength_bits = statistical_strength(nu);
    out.agreement_gap = std::abs(out.gamma_pef - out.strength_bits);
    return out;
}

double implied_constraint_value(const TrialModel& model, std::size_t vertex, double beta) {
    const auto& verts = model.vertices();
    if (vertex >= verts.size()) throw ValidationError("implied_constraint_value: vertex index out of range");
    std::vector<TrialDistribution> det;
    for (const TrialDistribution& v : verts) {
        if (is_deterministic(v, 1e-9)) det.push_back(v);
    }
    const std::vector<CellTable> det_rows = pef_constraint_rows(det, beta);
    const CellTable target = pef_constraint_rows({verts[vertex]}, beta).front();

    lp::LinearProgram prog;
    prog.cost = Eigen::VectorXd::Zero(kCells);
    for (std::size_t i = 0; i < kCells; ++i) prog.cost(Eigen::Index(i)) = -target[i];
    prog.eq = Eigen::MatrixXd::Zero(0, kCells);
    prog.eq_rhs = Eigen::VectorXd::Zero(0);
    prog.ub = Eigen::MatrixXd::Zero(Eigen::Index(det_rows.size()), kCells);
    prog.ub_rhs = Eigen::VectorXd::Ones(Eigen::Index(det_rows.size()));
    for (std::size_t r = 0; r < det_rows.size(); ++r) {
        for (std::size_t i = 0; i < kCells; ++i) prog.ub(Eigen::Index(r), Eigen::Index(i)) = det_rows[r][i];
    }
    const lp::Result res = lp::solve(prog);
    if (res.status == lp::Status::Unbounded) return std::numeric_limits<double>::infinity();
    if (res.status != lp::Status::Optimal) throw NumericalError("implied_constraint_value: LP failed");
    return -res.objective;
}

ThresholdResult constraint_threshold(const TrialModel& model, double tol) {
    ThresholdResult out;
    const auto& verts = model.vertices();
    for (std::size_t k = 0; k < verts.size(); ++k) {
        if (is_deterministic(verts[k], 1e-9)) continue;
        auto implied = [&](double beta) { return implied_constraint_value(model, k, beta) <= 1.0 + 1e-12; };
        if (implied(1e-12)) continue;
        double lo = 0.0;
        double hi = 1.0;
        while (!implied(hi)) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1024.0) throw NumericalError("constraint_threshold: constraint never becomes implied");
        }
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (implied(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if (hi > out.beta_th) {
            out.beta_th = hi;
            out.vertex = k;
        }
    }
    return out;
}

}  // namespace pefcert
