#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pefcert {

/// { v : ineq * v <= ineq_rhs,  eq * v == eq_rhs }
struct HPolytope {
    Eigen::MatrixXd ineq;
    Eigen::VectorXd ineq_rhs;
    Eigen::MatrixXd eq;
    Eigen::VectorXd eq_rhs;

    Eigen::Index dimension() const { return ineq.cols() > 0 ? ineq.cols() : eq.cols(); }
    /// Largest violation of any constraint at v (0 when v is feasible).
    double violation(const Eigen::VectorXd& v) const;
};

struct EnumerationOptions {
    /// Run the double-description method over exact rationals (every double is a
    /// dyadic rational, so the input data is represented without rounding).
    bool exact = true;
    double dedup_tol = 1e-9;
    double constraint_tol = 1e-10;
};

/// All extreme points of a bounded, nonempty polytope. The equality system is
/// eliminated first and the double-description method runs on the reduced
/// affine slice. Throws ValidationError for unbounded or infeasible input and
/// NumericalError when an output point fails the constraint check.
std::vector<Eigen::VectorXd> enumerate_vertices(const HPolytope& poly, const EnumerationOptions& opts = {});

}  // namespace pefcert
