#include "pefcert/io.hpp"

#include <cmath>
#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pefcert/errors.hpp"

namespace pefcert::io {

namespace {

using nlohmann::json;

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed document: ") + e.what());
    }
}

template <class T>
T field(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw ValidationError(std::string("document lacks field '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

// -infinity has no JSON spelling; null stands in for it
json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ValidationError(std::string("document lacks field '") + key + "'");
    if (doc.at(key).is_null()) return -std::numeric_limits<double>::infinity();
    return field<double>(doc, key);
}

CellTable cells(const json& doc, const char* key) {
    const auto v = field<std::vector<double>>(doc, key);
    if (v.size() != kCells) throw ValidationError(std::string("field '") + key + "' must have 16 entries");
    CellTable out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

InputDistribution inputs_from(const json& doc) {
    const auto v = field<std::vector<double>>(doc, "input_dist");
    if (v.size() != kInputs) throw ValidationError("field 'input_dist' must have 4 entries");
    return InputDistribution({v[0], v[1], v[2], v[3]});
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

std::string format_real(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string model_to_json(const TrialModel& model) {
    json doc;
    doc["kind"] = to_string(model.kind());
    doc["input_dist"] = model.inputs().probs();
    json verts = json::array();
    for (const TrialDistribution& v : model.vertices()) verts.push_back(v.probs());
    doc["vertices"] = verts;
    return dump(doc);
}

TrialModel model_from_json(const std::string& text) {
    const json doc = parse(text);
    const ModelKind kind = model_kind_from_string(field<std::string>(doc, "kind"));
    const InputDistribution inputs = inputs_from(doc);
    const auto raw = field<std::vector<std::vector<double>>>(doc, "vertices");
    std::vector<TrialDistribution> verts;
    for (const auto& r : raw) {
        if (r.size() != kCells) throw ValidationError("every vertex must have 16 entries");
        CellTable c{};
        std::copy(r.begin(), r.end(), c.begin());
        verts.emplace_back(c);
    }
    return TrialModel(kind, inputs, std::move(verts));
}

std::string distribution_to_json(const TrialDistribution& nu) {
    json doc;
    std::array<double, kInputs> inputs{};
    for (std::size_t xy = 0; xy < kInputs; ++xy) inputs[xy] = nu.input_marginal(xy);
    doc["input_dist"] = inputs;
    doc["probs"] = nu.probs();
    return dump(doc);
}

TrialDistribution distribution_from_json(const std::string& text) {
    const json doc = parse(text);
    TrialDistribution nu(cells(doc, "probs"));
    if (doc.contains("input_dist")) {
        const InputDistribution inputs = inputs_from(doc);
        for (std::size_t xy = 0; xy < kInputs; ++xy) {
            if (std::abs(nu.input_marginal(xy) - inputs[xy]) > 1e-12) {
                throw ValidationError("probs do not match input_dist");
            }
        }
    }
    return nu;
}

std::string pef_to_json(const Pef& pef, const PefSolveReport& report) {
    json doc;
    doc["beta"] = pef.beta;
    doc["values"] = pef.values;
    doc["report"] = {{"objective_bits", report.objective_bits},
                     {"max_constraint_lhs", report.max_constraint_lhs},
                     {"rescale_factor", report.rescale_factor},
                     {"iterations", report.iterations},
                     {"duality_gap", report.duality_gap},
                     {"converged", report.converged}};
    return dump(doc);
}

Pef pef_from_json(const std::string& text) {
    const json doc = parse(text);
    Pef pef;
    pef.beta = field<double>(doc, "beta");
    if (!(pef.beta > 0.0)) throw ValidationError("PEF beta must be positive");
    pef.values = cells(doc, "values");
    for (double v : pef.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("PEF values must be finite and nonnegative");
    }
    return pef;
}

std::string certificate_to_json(const EntropyCertificate& c) {
    json doc;
    doc["success"] = c.success;
    doc["beta"] = c.beta;
    doc["epsilon"] = c.epsilon;
    doc["kappa"] = c.kappa;
    doc["p_log2"] = c.p_log2;
    doc["entropy_bits"] = c.entropy_bits;
    doc["log2_Tn"] = real_or_null(c.log2_Tn);
    doc["n"] = c.n;
    doc["pef_replans"] = c.pef_replans;
    return dump(doc);
}

EntropyCertificate certificate_from_json(const std::string& text) {
    const json doc = parse(text);
    EntropyCertificate c;
    c.success = field<bool>(doc, "success");
    c.beta = field<double>(doc, "beta");
    c.epsilon = field<double>(doc, "epsilon");
    c.kappa = field<double>(doc, "kappa");
    c.p_log2 = field<double>(doc, "p_log2");
    c.entropy_bits = field<double>(doc, "entropy_bits");
    c.log2_Tn = real_from(doc, "log2_Tn");
    c.n = field<long long>(doc, "n");
    c.pef_replans = field<int>(doc, "pef_replans");
    return c;
}

std::string plan_to_json(const PlanResult& p) {
    json doc;
    doc["I_hat"] = p.i_hat;
    doc["n_pef"] = real_or_null(p.n_pef);
    doc["n_pef_upper"] = real_or_null(p.n_pef_upper);
    doc["n_pm0"] = p.n_pm0;
    doc["n_eat"] = p.n_eat;
    doc["f_pm"] = p.f_pm;
    doc["f_eat"] = p.f_eat;
    doc["beta_star"] = p.beta_star;
    doc["p_t_star"] = p.p_t_star;
    doc["gamma_pef"] = p.gamma_pef;
    doc["beta0"] = p.beta0;
    return dump(doc);
}

PlanResult plan_from_json(const std::string& text) {
    const json doc = parse(text);
    PlanResult p;
    p.i_hat = field<double>(doc, "I_hat");
    p.n_pef = real_from(doc, "n_pef");
    p.n_pef_upper = real_from(doc, "n_pef_upper");
    p.n_pm0 = field<double>(doc, "n_pm0");
    p.n_eat = field<double>(doc, "n_eat");
    p.f_pm = field<double>(doc, "f_pm");
    p.f_eat = field<double>(doc, "f_eat");
    p.beta_star = field<double>(doc, "beta_star");
    p.p_t_star = field<double>(doc, "p_t_star");
    p.gamma_pef = field<double>(doc, "gamma_pef");
    p.beta0 = field<double>(doc, "beta0");
    return p;
}

void write_rate_csv(std::ostream& out, const std::vector<RatePoint>& curve) {
    out << "beta,g_bits,beta_g_bits\n";
    for (const RatePoint& p : curve) {
        out << format_real(p.beta) << ',' << format_real(p.g_bits) << ',' << format_real(p.beta_g_bits) << '\n';
    }
}

void write_plan_csv(std::ostream& out, const std::vector<PlanResult>& plans) {
    out << "I_hat,n_pef,n_pef_upper,n_pm,n_eat,f_pm,f_eat\n";
    for (const PlanResult& p : plans) {
        out << format_real(p.i_hat) << ',' << format_real(p.n_pef) << ',' << format_real(p.n_pef_upper) << ','
            << format_real(p.n_pm0) << ',' << format_real(p.n_eat) << ',' << format_real(p.f_pm) << ','
            << format_real(p.f_eat) << '\n';
    }
}

void write_trial_log(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << "trial,x,y,a,b\n";
    for (const TrialRecord& r : records) {
        out << r.index << ',' << r.x << ',' << r.y << ',' << r.a << ',' << r.b << '\n';
    }
}

std::vector<TrialRecord> read_trial_log(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("trial log is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "trial,x,y,a,b") throw ValidationError("trial log header must be 'trial,x,y,a,b'");
    std::vector<TrialRecord> out;
    long long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        TrialRecord r;
        char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
        std::istringstream row(line);
        if (!(row >> r.index >> c1 >> r.x >> c2 >> r.y >> c3 >> r.a >> c4 >> r.b) || c1 != ',' || c2 != ',' ||
            c3 != ',' || c4 != ',' || !(row >> std::ws).eof()) {
            throw ValidationError("trial log line " + std::to_string(lineno) + ": expected five integers");
        }
        if (r.x < 0 || r.x > 1 || r.y < 0 || r.y > 1 || r.a < 0 || r.a > 1 || r.b < 0 || r.b > 1) {
            throw ValidationError("trial log line " + std::to_string(lineno) + ": entries must be 0 or 1");
        }
        if (!out.empty() && r.index <= out.back().index) {
            throw ValidationError("trial log line " + std::to_string(lineno) + ": indices must increase");
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace pefcert::io
