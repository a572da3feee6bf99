#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pefcert/cli.hpp"
#include "pefcert/distributions.hpp"
#include "pefcert/errors.hpp"
#include "pefcert/io.hpp"
#include "pefcert/planner.hpp"
#include "pefcert/protocol.hpp"
#include "pefcert/rates.hpp"

namespace py = pybind11;
using namespace pefcert;

namespace {

TrialModel model_named(const std::string& kind) {
    if (kind == "ns") return ns_model();
    if (kind == "tsirelson") return tsirelson_model();
    throw ValidationError("model must be 'ns' or 'tsirelson'");
}

TrialDistribution to_dist(const std::vector<double>& probs) {
    if (probs.size() != kCells) throw ValidationError("a trial distribution has 16 entries");
    CellTable c{};
    std::copy(probs.begin(), probs.end(), c.begin());
    return TrialDistribution(c);
}

std::vector<double> to_list(const TrialDistribution& d) { return {d.probs().begin(), d.probs().end()}; }

py::dict plan_dict(const PlanResult& p) {
    py::dict d;
    d["I_hat"] = p.i_hat;
    d["n_pef"] = p.n_pef;
    d["n_pef_upper"] = p.n_pef_upper;
    d["n_pm0"] = p.n_pm0;
    d["n_eat"] = p.n_eat;
    d["f_pm"] = p.f_pm;
    d["f_eat"] = p.f_eat;
    d["beta_star"] = p.beta_star;
    d["p_t_star"] = p.p_t_star;
    d["gamma_pef"] = p.gamma_pef;
    d["beta0"] = p.beta0;
    return d;
}

py::dict certificate_dict(const EntropyCertificate& c) {
    py::dict d;
    d["success"] = c.success;
    d["p_log2"] = c.p_log2;
    d["entropy_bits"] = c.entropy_bits;
    d["epsilon"] = c.epsilon;
    d["kappa"] = c.kappa;
    d["beta"] = c.beta;
    d["log2_Tn"] = c.log2_Tn;
    d["n"] = c.n;
    d["pef_replans"] = c.pef_replans;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Randomness certification with probability estimation factors";
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.def("model_vertices", [](const std::string& kind) {
        std::vector<std::vector<double>> out;
        for (const auto& v : model_named(kind).vertices()) out.push_back(to_list(v));
        return out;
    }, py::arg("kind") = "ns");

    m.def("family_werner", [](double p) { return to_list(family_werner(p)); }, py::arg("p"));
    m.def("family_unbalanced", [](double theta) { return to_list(family_unbalanced(theta)); }, py::arg("theta"));
    m.def("family_eberhard", [](double eta) { return to_list(family_eberhard(eta)); }, py::arg("eta"));
    m.def("chsh_expectation", [](const std::vector<double>& nu) { return chsh_expectation(to_dist(nu)); });

    m.def("optimize_pef", [](const std::vector<double>& nu, double beta, const std::string& model) {
        const PefSolution s = optimize_pef(model_named(model), to_dist(nu), beta);
        py::dict d;
        d["values"] = std::vector<double>(s.pef.values.begin(), s.pef.values.end());
        d["beta"] = s.pef.beta;
        d["objective_bits"] = s.report.objective_bits;
        d["converged"] = s.report.converged;
        return d;
    }, py::arg("nu"), py::arg("beta"), py::arg("model") = "ns");

    m.def("rate_curve", [](const std::vector<double>& nu, const std::vector<double>& betas, const std::string& model,
                           int jobs) {
        std::vector<std::tuple<double, double, double>> out;
        py::gil_scoped_release release;
        for (const RatePoint& p : rate_curve(model_named(model), to_dist(nu), betas, jobs)) {
            out.emplace_back(p.beta, p.g_bits, p.beta_g_bits);
        }
        return out;
    }, py::arg("nu"), py::arg("betas"), py::arg("model") = "ns", py::arg("jobs") = 1);

    m.def("statistical_strength", [](const std::vector<double>& nu) { return statistical_strength(to_dist(nu)); });

    m.def("certificate_rate", [](const std::vector<double>& nu, const std::string& model) {
        const CertificateRateResult r = certificate_rate(model_named(model), to_dist(nu));
        return py::make_tuple(r.gamma_pef, r.beta0);
    }, py::arg("nu"), py::arg("model") = "ns");

    m.def("improvement_factors", [](const std::vector<double>& nu, double b, double epsilon, double kappa,
                                    const std::string& model) {
        return plan_dict(improvement_factors(to_dist(nu), b, epsilon, kappa, model_named(model)));
    }, py::arg("nu"), py::arg("b") = 0.0, py::arg("epsilon") = 1e-6, py::arg("kappa") = 1.0,
       py::arg("model") = "ns");

    m.def("simulate_trials", [](const std::vector<double>& nu, long long n, std::uint64_t seed) {
        std::vector<std::tuple<long long, int, int, int, int>> out;
        for (const TrialRecord& r : simulate_trials(to_dist(nu), n, seed)) out.emplace_back(r.index, r.x, r.y, r.a, r.b);
        return out;
    }, py::arg("nu"), py::arg("n"), py::arg("seed"));

    m.def("certify", [](const std::vector<std::tuple<long long, int, int, int, int>>& trials,
                        const std::vector<double>& nu0, double beta, double epsilon, double kappa, double b,
                        long long replan_every, const std::string& model) {
        std::vector<TrialRecord> records;
        for (const auto& [i, x, y, a, bb] : trials) records.push_back({i, x, y, a, bb});
        CertificationParams params{beta, epsilon, kappa, b, static_cast<long long>(records.size())};
        RunOptions opt;
        opt.replan_every = replan_every;
        return certificate_dict(run_protocol(params, model_named(model), to_dist(nu0), records, opt));
    }, py::arg("trials"), py::arg("nu0"), py::arg("beta"), py::arg("epsilon") = 1e-6, py::arg("kappa") = 1.0,
       py::arg("b") = 0.0, py::arg("replan_every") = 10000, py::arg("model") = "ns");

    m.def("cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}
