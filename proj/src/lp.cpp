#include "pefcert/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pefcert/errors.hpp"

namespace pefcert::lp {

namespace {

// Tableau layout: rows 0..m-1 are constraints, row m is the objective
// (reduced costs, with -objective in the rhs column).
class Tableau {
public:
    Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows) {}

    Eigen::MatrixXd& data() { return t_; }
    std::vector<Eigen::Index>& basis() { return basis_; }
    Eigen::Index rows() const { return t_.rows() - 1; }
    Eigen::Index cols() const { return t_.cols() - 1; }
    Eigen::Index rhs() const { return t_.cols() - 1; }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = c;
    }

    // Bland's rule restricted to columns with allowed[c] set.
    Status run(const std::vector<bool>& allowed, double tol, int max_iter, int& iterations) {
        const Eigen::Index m = rows();
        while (iterations < max_iter) {
            Eigen::Index enter = -1;
            for (Eigen::Index c = 0; c < cols(); ++c) {
                if (allowed[static_cast<std::size_t>(c)] && t_(m, c) < -tol) {
                    enter = c;
                    break;
                }
            }
            if (enter < 0) return Status::Optimal;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < m; ++r) {
                const double a = t_(r, enter);
                if (a > tol) {
                    const double ratio = t_(r, rhs()) / a;
                    if (ratio < best - 1e-15 ||
                        (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
                         basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return Status::Unbounded;
            pivot(leave, enter);
            ++iterations;
        }
        return Status::IterationLimit;
    }

private:
    Eigen::MatrixXd t_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

Result solve(const LinearProgram& program, double tol) {
    const Eigen::Index n = program.cost.size();
    const Eigen::Index n_eq = program.eq.rows();
    const Eigen::Index n_ub = program.ub.rows();
    if ((n_eq > 0 && program.eq.cols() != n) || (n_ub > 0 && program.ub.cols() != n) ||
        program.eq_rhs.size() != n_eq || program.ub_rhs.size() != n_ub) {
        throw ValidationError("lp::solve: inconsistent dimensions");
    }
    const Eigen::Index m = n_eq + n_ub;
    const Eigen::Index slack0 = n;
    const Eigen::Index art0 = n + n_ub;
    const Eigen::Index total = n + n_ub + m;

    Tableau tab(m, total);
    Eigen::MatrixXd& t = tab.data();
    for (Eigen::Index r = 0; r < n_eq; ++r) {
        t.row(r).head(n) = program.eq.row(r);
        t(r, tab.rhs()) = program.eq_rhs(r);
    }
    for (Eigen::Index r = 0; r < n_ub; ++r) {
        t.row(n_eq + r).head(n) = program.ub.row(r);
        t(n_eq + r, slack0 + r) = 1.0;
        t(n_eq + r, tab.rhs()) = program.ub_rhs(r);
    }
    for (Eigen::Index r = 0; r < m; ++r) {
        if (t(r, tab.rhs()) < 0.0) t.row(r) *= -1.0;
        t(r, art0 + r) = 1.0;
        tab.basis()[static_cast<std::size_t>(r)] = art0 + r;
    }

    // phase 1: minimize the sum of artificials
    for (Eigen::Index r = 0; r < m; ++r) t.row(m) -= t.row(r);
    for (Eigen::Index r = 0; r < m; ++r) t(m, art0 + r) = 0.0;

    Result result;
    const int max_iter = 50000;
    std::vector<bool> allowed(static_cast<std::size_t>(total), true);
    Status st = tab.run(allowed, tol, max_iter, result.iterations);
    if (st == Status::IterationLimit) {
        result.status = st;
        return result;
    }
    const double scale = 1.0 + (m > 0 ? t.col(tab.rhs()).head(m).cwiseAbs().maxCoeff() : 0.0);
    if (-t(m, tab.rhs()) > 1e-9 * scale) {
        result.status = Status::Infeasible;
        return result;
    }

    // drive remaining artificials out of the basis; rows that cannot pivot are redundant
    std::vector<bool> dead_row(static_cast<std::size_t>(m), false);
    for (Eigen::Index r = 0; r < m; ++r) {
        if (tab.basis()[static_cast<std::size_t>(r)] < art0) continue;
        Eigen::Index col = -1;
        double best = 1e-9;
        for (Eigen::Index c = 0; c < art0; ++c) {
            if (std::abs(t(r, c)) > best) {
                best = std::abs(t(r, c));
                col = c;
            }
        }
        if (col >= 0) {
            tab.pivot(r, col);
        } else {
            dead_row[static_cast<std::size_t>(r)] = true;
        }
    }

    // phase 2
    t.row(m).setZero();
    t.row(m).head(n) = program.cost;
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index b = tab.basis()[static_cast<std::size_t>(r)];
        if (dead_row[static_cast<std::size_t>(r)]) continue;
        const double cb = t(m, b);
        if (cb != 0.0) t.row(m) -= cb * t.row(r);
    }
    for (Eigen::Index c = art0; c < total; ++c) allowed[static_cast<std::size_t>(c)] = false;
    // a dead row is all-zero over real columns, so it can never be chosen to leave
    st = tab.run(allowed, tol, max_iter, result.iterations);
    result.status = st;
    if (st != Status::Optimal) return result;

    result.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index b = tab.basis()[static_cast<std::size_t>(r)];
        if (b < n) result.x(b) = std::max(0.0, t(r, tab.rhs()));
    }
    result.objective = program.cost.dot(result.x);
    return result;
}

}  // namespace pefcert::lp
