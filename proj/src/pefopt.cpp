#include "pefcert/pefopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "pefcert/errors.hpp"

namespace pefcert {

namespace {

constexpr double kGapTol = 1e-10;
constexpr double kFloor = 1e-12;

void check_inputs(const TrialDistribution& nu, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive and finite");
    for (std::size_t xy = 0; xy < kInputs; ++xy) {
        if (!(nu.input_marginal(xy) > 0.0)) throw ValidationError("nu must give every setting positive probability");
    }
}

double row_dot(const CellTable& row, const CellTable& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) s += row[i] * f[i];
    return s;
}

// Barrier problem on the support S of nu:
//   maximize  sum_S nu_i ln F_i + (1/t) sum_k ln(1 - c_k . F)
// Returns the dual bound gap at the final t.
struct BarrierOutcome {
    int iterations = 0;
    double gap = std::numeric_limits<double>::infinity();
    bool converged = false;
};

BarrierOutcome barrier_solve(const std::vector<CellTable>& rows, const CellTable& nu,
                             const std::vector<std::size_t>& support, CellTable& f) {
    const Eigen::Index m = Eigen::Index(support.size());
    const Eigen::Index kr = Eigen::Index(rows.size());
    Eigen::MatrixXd c(kr, m);
    for (Eigen::Index k = 0; k < kr; ++k) {
        for (Eigen::Index j = 0; j < m; ++j) c(k, j) = rows[std::size_t(k)][support[std::size_t(j)]];
    }
    Eigen::VectorXd w(m), x(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        w(j) = nu[support[std::size_t(j)]];
        x(j) = f[support[std::size_t(j)]];
    }
    // constraint rows with no weight on the support never bind
    std::vector<Eigen::Index> live;
    for (Eigen::Index k = 0; k < kr; ++k) {
        if (c.row(k).maxCoeff() > 0.0) live.push_back(k);
    }
    Eigen::MatrixXd a(Eigen::Index(live.size()), m);
    for (std::size_t r = 0; r < live.size(); ++r) a.row(Eigen::Index(r)) = c.row(live[r]);
    const Eigen::Index rn = a.rows();

    BarrierOutcome out;
    if (rn == 0) throw NumericalError("optimize_pef: the support of nu is not constrained by any vertex");

    Eigen::VectorXd s = Eigen::VectorXd::Ones(rn) - a * x;
    if (s.minCoeff() <= 0.0) throw NumericalError("optimize_pef: starting point is not strictly feasible");

    // Certified bound from lambda = 1/(t s), rescaled optimally:
    //   max_x sum w ln x  <=  sum w ln(w / A^T lambda) + ln(sum lambda)
    auto dual_gap = [&](double t) {
        Eigen::VectorXd lambda = (t * s.array()).inverse().matrix();
        Eigen::VectorXd atl = a.transpose() * lambda;
        double gap = std::log(lambda.sum());
        for (Eigen::Index j = 0; j < m; ++j) gap += w(j) * std::log(w(j) / (atl(j) * x(j)));
        return std::max(0.0, gap);
    };

    double t = 1.0;
    for (int outer = 0; outer < 40; ++outer) {
        bool centered = false;
        for (int inner = 0; inner < 200; ++inner) {
            // gradient and negated Hessian of the barrier objective
            Eigen::VectorXd inv_s = s.array().inverse().matrix();
            Eigen::VectorXd grad = (w.array() / x.array()).matrix() - (a.transpose() * inv_s) / t;
            Eigen::MatrixXd h = (a.transpose() * inv_s.cwiseAbs2().asDiagonal() * a) / t;
            h.diagonal() += (w.array() / x.array().square()).matrix();
            Eigen::LLT<Eigen::MatrixXd> llt(h);
            if (llt.info() != Eigen::Success) break;
            Eigen::VectorXd dx = llt.solve(grad);
            const double decrement = grad.dot(dx);
            ++out.iterations;
            if (decrement / 2.0 < 1e-14) {
                centered = true;
                break;
            }

            double step = 1.0;
            Eigen::VectorXd ds = -(a * dx);
            for (Eigen::Index j = 0; j < m; ++j) {
                if (dx(j) < 0.0) step = std::min(step, -0.99 * x(j) / dx(j));
            }
            for (Eigen::Index k = 0; k < rn; ++k) {
                if (ds(k) < 0.0) step = std::min(step, -0.99 * s(k) / ds(k));
            }
            // Armijo backtracking; differences via log1p keep the comparison accurate near the optimum
            for (int ls = 0; ls < 60; ++ls) {
                double gain = 0.0;
                for (Eigen::Index j = 0; j < m; ++j) gain += w(j) * std::log1p(step * dx(j) / x(j));
                for (Eigen::Index k = 0; k < rn; ++k) gain += std::log1p(step * ds(k) / s(k)) / t;
                if (gain >= 0.25 * step * decrement) break;
                step *= 0.5;
                if (ls == 59) step = 0.0;
            }
            if (step == 0.0) break;
            x += step * dx;
            s += step * ds;
        }
        out.gap = std::min(out.gap, dual_gap(t));
        // on the central path the gap equals (number of constraints) / t
        if (!centered) break;
        if (double(rn) / t < kGapTol || out.gap < kGapTol) {
            out.converged = true;
            break;
        }
        t *= 10.0;
    }
    for (Eigen::Index j = 0; j < m; ++j) f[support[std::size_t(j)]] = x(j);
    return out;
}

}  // namespace

std::vector<CellTable> pef_constraint_rows(const std::vector<TrialDistribution>& vertices, double beta) {
    std::vector<CellTable> rows;
    rows.reserve(vertices.size());
    for (const TrialDistribution& v : vertices) {
        CellTable r{};
        for (std::size_t i = 0; i < kCells; ++i) {
            const double p = v[i];
            r[i] = p > 0.0 ? std::pow(v.conditional(i), beta) * p : 0.0;
        }
        rows.push_back(r);
    }
    return rows;
}

double validate_pef(const std::vector<TrialDistribution>& vertices, const CellTable& values, double beta) {
    double worst = 0.0;
    for (const CellTable& row : pef_constraint_rows(vertices, beta)) worst = std::max(worst, row_dot(row, values));
    return worst;
}

double validate_pef(const TrialModel& model, const Pef& pef) {
    return validate_pef(model.vertices(), pef.values, pef.beta);
}

PefSolution optimize_pef(const std::vector<TrialDistribution>& vertices, const TrialDistribution& nu, double beta) {
    check_inputs(nu, beta);
    if (vertices.empty()) throw ValidationError("optimize_pef: model has no vertices");
    const std::vector<CellTable> rows = pef_constraint_rows(vertices, beta);

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < kCells; ++i) {
        if (nu[i] > 0.0) support.push_back(i);
    }
    // every row sums to at most one, so F = 1/2 is strictly inside
    CellTable f{};
    f.fill(0.0);
    for (std::size_t i : support) f[i] = 0.5;

    const BarrierOutcome bo = barrier_solve(rows, nu.probs(), support, f);

    // zero-weight cells take the largest value the remaining slack allows
    for (std::size_t i = 0; i < kCells; ++i) {
        if (nu[i] > 0.0) continue;
        double cap = std::numeric_limits<double>::infinity();
        for (const CellTable& row : rows) {
            if (row[i] <= 0.0) continue;
            const double slack = std::max(0.0, 1.0 - row_dot(row, f));
            cap = std::min(cap, slack / row[i]);
        }
        f[i] = std::isfinite(cap) ? cap : 0.0;
    }
    for (std::size_t i : support) f[i] = std::max(f[i], kFloor);

    double lhs = 0.0;
    for (const CellTable& row : rows) lhs = std::max(lhs, row_dot(row, f));
    const double scale = lhs > 1.0 ? 1.0 / lhs : 1.0;
    for (double& v : f) v *= scale;

    PefSolution sol;
    sol.pef.values = f;
    sol.pef.beta = beta;
    sol.pef.max_constraint_lhs = validate_pef(vertices, f, beta);
    sol.report.iterations = bo.iterations;
    sol.report.max_constraint_lhs = lhs;
    sol.report.rescale_factor = scale;
    sol.report.duality_gap = bo.gap;
    sol.report.converged = bo.converged;
    double obj = 0.0;
    for (std::size_t i : support) obj += nu[i] * std::log2(f[i]);
    sol.report.objective_bits = obj;
    return sol;
}

PefSolution optimize_pef(const TrialModel& model, const TrialDistribution& nu, double beta, long long n,
                         double epsilon) {
    if (n < 1) throw ValidationError("optimize_pef: n must be at least 1");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("optimize_pef: epsilon must lie in (0, 1]");
    for (std::size_t xy = 0; xy < kInputs; ++xy) {
        if (std::abs(nu.input_marginal(xy) - model.inputs()[xy]) > 1e-9) {
            throw ValidationError("optimize_pef: nu does not have the model's input distribution");
        }
    }
    return optimize_pef(model.vertices(), nu, beta);
}

double pef_log_rate(const Pef& pef, const TrialDistribution& nu) {
    double total = 0.0;
    for (std::size_t i = 0; i < kCells; ++i) {
        if (nu[i] <= 0.0) continue;
        if (pef.values[i] <= 0.0) {
            throw ValidationError("pef_log_rate: PEF vanishes on cell " + std::to_string(i) + " in the support of nu");
        }
        total += nu[i] * std::log2(pef.values[i]);
    }
    return total / pef.beta;
}

}  // namespace pefcert
