#include "pefcert/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pefcert/distributions.hpp"
#include "pefcert/errors.hpp"
#include "pefcert/io.hpp"
#include "pefcert/planner.hpp"
#include "pefcert/protocol.hpp"
#include "pefcert/rates.hpp"

namespace pefcert::cli {

namespace {

struct Source {
    std::string family;
    std::optional<double> theta, p, eta, i_hat;
    std::string dist_path;
};

struct Options {
    std::string model = "ns";
    Source source;
    double beta = 0.0;
    double epsilon = 1e-6;
    double kappa = 1.0;
    double b = 0.0;
    long long n = 1;
    std::uint64_t seed = 0;
    long long replan_every = 10000;
    std::string out_path;
    std::string log_path;
    std::vector<double> betas;
    std::vector<double> i_values;
    int jobs = 1;
    bool error_json = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out_path);
    if (!f) throw ValidationError("cannot write '" + o.out_path + "'");
    f << text;
}

TrialModel build_model(const std::string& kind) {
    if (kind == "ns") return ns_model();
    if (kind == "tsirelson") return tsirelson_model();
    throw ValidationError("--model must be ns or tsirelson");
}

TrialDistribution build_distribution(const Source& s, std::ostream& err) {
    if (!s.dist_path.empty()) return io::distribution_from_json(read_file(s.dist_path));
    if (s.family.empty()) throw ValidationError("give --family or --dist");
    if (s.family == "werner") {
        if (s.p) return family_werner(*s.p);
        if (s.i_hat) return family_werner(werner_visibility_for_chsh(*s.i_hat));
        throw ValidationError("werner family needs --p or --I");
    }
    if (s.family == "unbalanced") {
        const double theta = s.theta ? *s.theta : s.i_hat ? unbalanced_theta_for_chsh(*s.i_hat) : -1.0;
        if (theta < 0.0) throw ValidationError("unbalanced family needs --theta or --I");
        const FamilyPoint fp = optimize_unbalanced(theta);
        if (!fp.converged) throw NumericalError("angle search did not converge; best CHSH " + std::to_string(fp.objective));
        return fp.distribution;
    }
    if (s.family == "eberhard") {
        if (!s.eta) throw ValidationError("eberhard family needs --eta");
        const FamilyPoint fp = optimize_eberhard(*s.eta);
        err << "eberhard optimizer: strength " << io::format_real(fp.objective) << " bits, theta "
            << io::format_real(fp.setup.theta) << ", " << fp.starts << " starts, " << fp.evaluations
            << " evaluations\n";
        return fp.distribution;
    }
    throw ValidationError("--family must be unbalanced, werner or eberhard");
}

void add_source(CLI::App* cmd, Source& s) {
    cmd->add_option("--family", s.family, "unbalanced | werner | eberhard");
    cmd->add_option("--theta", s.theta, "state angle of the unbalanced family");
    cmd->add_option("--p", s.p, "Werner visibility");
    cmd->add_option("--eta", s.eta, "detector efficiency");
    cmd->add_option("--I", s.i_hat, "target CHSH expectation (werner, unbalanced)");
    cmd->add_option("--dist", s.dist_path, "distribution document");
}

double planned_beta(const Options& o, const TrialModel& model, const TrialDistribution& nu) {
    if (o.beta > 0.0) return o.beta;
    const TrialCount tc = n_pef(o.b, o.epsilon, o.kappa, model, nu, default_beta_grid(), o.jobs);
    if (!tc.finite) throw NumericalError("no beta gives a positive rate for the planning distribution");
    return tc.beta_star;
}

int jobs_from_env() {
    if (const char* env = std::getenv("PEFCERT_JOBS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw ValidationError("PEFCERT_JOBS must be an integer");
        }
    }
    return 1;
}

void report(const Options& o, std::ostream& err, const char* kind, const std::string& msg) {
    if (o.error_json) {
        nlohmann::json doc;
        doc["error"] = kind;
        doc["message"] = msg;
        err << doc.dump() << "\n";
    } else {
        err << "pefcert: " << msg << "\n";
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Randomness certification with probability estimation factors"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--error-json", o.error_json, "print errors as a JSON document");

    auto* model = app.add_subcommand("model", "emit the vertices of a trial model");
    model->add_option("--model,--kind", o.model, "ns | tsirelson");
    model->add_option("--out", o.out_path);

    auto* family = app.add_subcommand("family", "emit a family distribution");
    add_source(family, o.source);
    family->add_option("--out", o.out_path);

    auto* pef = app.add_subcommand("pef-opt", "optimize a PEF");
    pef->add_option("--model", o.model);
    add_source(pef, o.source);
    pef->add_option("--beta", o.beta)->required();
    pef->add_option("--n", o.n);
    pef->add_option("--epsilon", o.epsilon);
    pef->add_option("--out", o.out_path);

    auto* rates = app.add_subcommand("rates", "emit the g(beta) curve as CSV");
    rates->add_option("--model", o.model);
    add_source(rates, o.source);
    rates->add_option("--betas", o.betas, "beta grid (default: 40 log-spaced points on [0.005, 2])")->delimiter(',');
    rates->add_option("--jobs", o.jobs);
    rates->add_option("--out", o.out_path);

    auto* strength = app.add_subcommand("strength", "print the statistical strength in bits");
    add_source(strength, o.source);

    auto* plan = app.add_subcommand("plan", "trial counts and improvement factors");
    plan->add_option("--model", o.model);
    add_source(plan, o.source);
    plan->add_option("--sweep", o.i_values, "CHSH values for a CSV sweep (werner or unbalanced)")->delimiter(',');
    plan->add_option("--epsilon", o.epsilon);
    plan->add_option("--kappa", o.kappa);
    plan->add_option("--b", o.b);
    plan->add_option("--jobs", o.jobs);
    plan->add_option("--out", o.out_path);

    auto* simulate = app.add_subcommand("simulate", "write a seeded trial log");
    add_source(simulate, o.source);
    simulate->add_option("--n", o.n)->required();
    simulate->add_option("--seed", o.seed)->required();
    simulate->add_option("--out", o.out_path);

    auto* certify_cmd = app.add_subcommand("certify", "certify entropy from a trial log");
    certify_cmd->add_option("--log", o.log_path, "trial log CSV")->required();
    certify_cmd->add_option("--model", o.model);
    add_source(certify_cmd, o.source);
    certify_cmd->add_option("--beta", o.beta, "power (default: planner optimum for the planning distribution)");
    certify_cmd->add_option("--epsilon", o.epsilon);
    certify_cmd->add_option("--kappa", o.kappa);
    certify_cmd->add_option("--b", o.b);
    certify_cmd->add_option("--replan-every", o.replan_every, "0 disables replanning");
    certify_cmd->add_option("--jobs", o.jobs);
    certify_cmd->add_option("--out", o.out_path);

    try {
        o.jobs = jobs_from_env();
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        report(o, err, "validation", e.what());
        return 1;
    } catch (const ValidationError& e) {
        report(o, err, "validation", e.what());
        return 1;
    }

    try {
        if (*model) {
            emit(o, out, io::model_to_json(build_model(o.model)));
        } else if (*family) {
            emit(o, out, io::distribution_to_json(build_distribution(o.source, err)));
        } else if (*pef) {
            const TrialModel m = build_model(o.model);
            const PefSolution sol = optimize_pef(m, build_distribution(o.source, err), o.beta, o.n, o.epsilon);
            emit(o, out, io::pef_to_json(sol.pef, sol.report));
        } else if (*rates) {
            const TrialModel m = build_model(o.model);
            const auto betas = o.betas.empty() ? default_beta_grid() : o.betas;
            std::ostringstream csv;
            io::write_rate_csv(csv, rate_curve(m, build_distribution(o.source, err), betas, o.jobs));
            emit(o, out, csv.str());
        } else if (*strength) {
            out << io::format_real(statistical_strength(build_distribution(o.source, err))) << "\n";
        } else if (*plan) {
            const TrialModel m = build_model(o.model);
            if (o.i_values.empty()) {
                emit(o, out, io::plan_to_json(improvement_factors(build_distribution(o.source, err), o.b, o.epsilon,
                                                                  o.kappa, m, o.jobs)));
            } else {
                std::vector<PlanResult> rows;
                for (double i_hat : o.i_values) {
                    Source s = o.source;
                    s.i_hat = i_hat;
                    rows.push_back(improvement_factors(build_distribution(s, err), o.b, o.epsilon, o.kappa, m, o.jobs));
                }
                std::ostringstream csv;
                io::write_plan_csv(csv, rows);
                emit(o, out, csv.str());
            }
        } else if (*simulate) {
            std::ostringstream csv;
            io::write_trial_log(csv, simulate_trials(build_distribution(o.source, err), o.n, o.seed));
            emit(o, out, csv.str());
        } else if (*certify_cmd) {
            std::ifstream in(o.log_path);
            if (!in) throw ValidationError("cannot open '" + o.log_path + "'");
            const std::vector<TrialRecord> records = io::read_trial_log(in);
            if (records.empty()) throw ValidationError("trial log has no trials");
            const TrialModel m = build_model(o.model);
            const TrialDistribution nu0 = build_distribution(o.source, err);
            CertificationParams params;
            params.beta = planned_beta(o, m, nu0);
            params.epsilon = o.epsilon;
            params.kappa = o.kappa;
            params.target_bits = o.b;
            params.n_max = static_cast<long long>(records.size());
            RunOptions ro;
            ro.replan_every = o.replan_every;
            emit(o, out, io::certificate_to_json(run_protocol(params, m, nu0, records, ro)));
        }
    } catch (const ValidationError& e) {
        report(o, err, "validation", e.what());
        return 1;
    } catch (const NumericalError& e) {
        report(o, err, "numerical", e.what());
        return 2;
    }
    return 0;
}

}  // namespace pefcert::cli
