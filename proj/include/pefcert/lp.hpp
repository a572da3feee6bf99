#pragma once

// Dense two-phase simplex for the small LPs used by membership tests,
// guessing-probability decompositions and constraint-threshold searches.

#include <Eigen/Dense>

namespace pefcert::lp {

/// minimize cost.x  subject to  eq*x = eq_rhs,  ub*x <= ub_rhs,  x >= 0
struct LinearProgram {
    Eigen::VectorXd cost;
    Eigen::MatrixXd eq;
    Eigen::VectorXd eq_rhs;
    Eigen::MatrixXd ub;
    Eigen::VectorXd ub_rhs;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
    Status status = Status::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
};

Result solve(const LinearProgram& program, double tol = 1e-11);

}  // namespace pefcert::lp
