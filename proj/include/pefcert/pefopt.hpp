#pragma once

// Probability estimation factors over polytope trial models.

#include <vector>

#include "pefcert/bellmodel.hpp"
#include "pefcert/trial.hpp"

namespace pefcert {

struct Pef {
    CellTable values{};
    double beta = 1.0;
    /// max over vertices of the constraint left side, recorded at construction.
    double max_constraint_lhs = 0.0;
};

struct PefSolveReport {
    double objective_bits = 0.0;  // E_nu log2 F after rescaling
    int iterations = 0;           // Newton steps
    double max_constraint_lhs = 0.0;  // before rescaling
    double rescale_factor = 1.0;
    double duality_gap = 0.0;     // nats
    bool converged = false;
};

struct PefSolution {
    Pef pef;
    PefSolveReport report;
};

/// Constraint coefficients sigma_k(ab|xy)^beta sigma_k(abxy), one row per vertex.
std::vector<CellTable> pef_constraint_rows(const std::vector<TrialDistribution>& vertices, double beta);

/// Maximizes E_nu log2 F subject to the vertex constraints. The finite-run
/// objective n E_nu log2 F / beta + log2(eps) / beta has the same maximizer,
/// so n and epsilon only enter through validation.
PefSolution optimize_pef(const TrialModel& model, const TrialDistribution& nu, double beta, long long n = 1,
                         double epsilon = 1.0);
PefSolution optimize_pef(const std::vector<TrialDistribution>& vertices, const TrialDistribution& nu, double beta);

/// max over vertices of sum F sigma(ab|xy)^beta sigma(abxy)
double validate_pef(const TrialModel& model, const Pef& pef);
double validate_pef(const std::vector<TrialDistribution>& vertices, const CellTable& values, double beta);

/// E_nu log2 F / beta; throws ValidationError when F vanishes on the support of nu.
double pef_log_rate(const Pef& pef, const TrialDistribution& nu);

}  // namespace pefcert
