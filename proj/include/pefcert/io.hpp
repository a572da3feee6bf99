#pragma once

// Documents (JSON, sorted keys) and CSV emitters. Cells use the flat index
// 8x + 4y + 2a + b everywhere.

#include <iosfwd>
#include <string>
#include <vector>

#include "pefcert/bellmodel.hpp"
#include "pefcert/pefopt.hpp"
#include "pefcert/planner.hpp"
#include "pefcert/protocol.hpp"
#include "pefcert/rates.hpp"

namespace pefcert::io {

std::string model_to_json(const TrialModel& model);
TrialModel model_from_json(const std::string& text);

std::string distribution_to_json(const TrialDistribution& nu);
TrialDistribution distribution_from_json(const std::string& text);

std::string pef_to_json(const Pef& pef, const PefSolveReport& report);
Pef pef_from_json(const std::string& text);

/// log2_Tn of a failed run (-infinity) is written as null.
std::string certificate_to_json(const EntropyCertificate& cert);
EntropyCertificate certificate_from_json(const std::string& text);

std::string plan_to_json(const PlanResult& plan);
PlanResult plan_from_json(const std::string& text);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double v);

void write_rate_csv(std::ostream& out, const std::vector<RatePoint>& curve);
void write_plan_csv(std::ostream& out, const std::vector<PlanResult>& plans);

void write_trial_log(std::ostream& out, const std::vector<TrialRecord>& records);
/// Expects the header "trial,x,y,a,b"; throws ValidationError with the line number on bad rows.
std::vector<TrialRecord> read_trial_log(std::istream& in);

}  // namespace pefcert::io
