#include "pefcert/bellmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pefcert/errors.hpp"
#include "pefcert/lp.hpp"

namespace pefcert {

namespace {

constexpr double kModelTol = 1e-10;

int parity(int v) { return v & 1; }

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::NonSignaling: return "ns";
        case ModelKind::NonSignalingTsirelson: return "tsirelson";
        case ModelKind::Custom: return "custom";
    }
    return "custom";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "ns") return ModelKind::NonSignaling;
    if (name == "tsirelson") return ModelKind::NonSignalingTsirelson;
    if (name == "custom") return ModelKind::Custom;
    throw ValidationError("unknown model kind '" + name + "' (expected ns, tsirelson or custom)");
}

TrialModel::TrialModel(ModelKind kind, InputDistribution inputs, std::vector<TrialDistribution> vertices)
    : kind_(kind), inputs_(inputs), vertices_(std::move(vertices)) {
    if (vertices_.empty()) throw ValidationError("trial model needs at least one vertex");
    if (kind_ == ModelKind::NonSignaling && vertices_.size() != 24) {
        throw ValidationError("non-signaling model must have 24 vertices, got " + std::to_string(vertices_.size()));
    }
    if (kind_ == ModelKind::NonSignalingTsirelson && vertices_.size() != 80) {
        throw ValidationError("Tsirelson model must have 80 vertices, got " + std::to_string(vertices_.size()));
    }
    for (std::size_t k = 0; k < vertices_.size(); ++k) {
        const TrialDistribution& v = vertices_[k];
        for (std::size_t xy = 0; xy < kInputs; ++xy) {
            if (std::abs(v.input_marginal(xy) - inputs_[xy]) > kModelTol) {
                throw ValidationError("vertex " + std::to_string(k) + " does not match the input distribution");
            }
        }
        if (signaling_violation(v) > kModelTol) {
            throw ValidationError("vertex " + std::to_string(k) + " is signaling");
        }
    }
}

std::vector<TrialDistribution> local_deterministic_points(const InputDistribution& inputs) {
    std::vector<TrialDistribution> out;
    out.reserve(16);
    // f encodes Alice's response (f(0), f(1)) as bits, likewise g for Bob
    for (int f = 0; f < 4; ++f) {
        for (int g = 0; g < 4; ++g) {
            CellTable cond{};
            for (int x = 0; x < 2; ++x) {
                for (int y = 0; y < 2; ++y) {
                    const int a = (f >> x) & 1;
                    const int b = (g >> y) & 1;
                    cond[cell_index(x, y, a, b)] = 1.0;
                }
            }
            out.push_back(TrialDistribution::from_conditionals(inputs, cond));
        }
    }
    return out;
}

std::vector<TrialDistribution> pr_boxes(const InputDistribution& inputs) {
    std::vector<TrialDistribution> out;
    out.reserve(8);
    for (int s = 0; s < 2; ++s) {
        for (int t = 0; t < 2; ++t) {
            for (int u = 0; u < 2; ++u) {
                CellTable cond{};
                for (std::size_t i = 0; i < kCells; ++i) {
                    const Cell c = cell_of(i);
                    if (parity(c.a ^ c.b) == parity((c.x * c.y) ^ (s * c.x) ^ (t * c.y) ^ u)) cond[i] = 0.5;
                }
                out.push_back(TrialDistribution::from_conditionals(inputs, cond));
            }
        }
    }
    return out;
}

bool is_deterministic(const TrialDistribution& dist, double tol) {
    for (std::size_t i = 0; i < kCells; ++i) {
        const double c = dist.conditional(i);
        if (c > tol && c < 1.0 - tol) return false;
    }
    return true;
}

double signaling_violation(const TrialDistribution& dist) {
    double worst = 0.0;
    for (int x = 0; x < 2; ++x) {
        // Alice's marginal at setting x must not depend on y
        const double p0 = (dist.conditional(cell_index(x, 0, 0, 0)) + dist.conditional(cell_index(x, 0, 0, 1)));
        const double p1 = (dist.conditional(cell_index(x, 1, 0, 0)) + dist.conditional(cell_index(x, 1, 0, 1)));
        worst = std::max(worst, std::abs(p0 - p1));
    }
    for (int y = 0; y < 2; ++y) {
        const double p0 = (dist.conditional(cell_index(0, y, 0, 0)) + dist.conditional(cell_index(0, y, 1, 0)));
        const double p1 = (dist.conditional(cell_index(1, y, 0, 0)) + dist.conditional(cell_index(1, y, 1, 0)));
        worst = std::max(worst, std::abs(p0 - p1));
    }
    return worst;
}

std::vector<std::array<int, 4>> chsh_sign_patterns() {
    std::vector<std::array<int, 4>> out;
    // standard pattern (+,+,+,-) first, then the rest in lexicographic order
    out.push_back({1, 1, 1, -1});
    for (int mask = 0; mask < 16; ++mask) {
        std::array<int, 4> s{};
        int negatives = 0;
        for (int k = 0; k < 4; ++k) {
            s[static_cast<std::size_t>(k)] = ((mask >> (3 - k)) & 1) ? -1 : 1;
            negatives += ((mask >> (3 - k)) & 1);
        }
        if (negatives % 2 == 1 && s != out.front()) out.push_back(s);
    }
    return out;
}

HPolytope ns_hpolytope(const InputDistribution& inputs) {
    HPolytope poly;
    poly.ineq = -Eigen::MatrixXd::Identity(kCells, kCells);
    poly.ineq_rhs = Eigen::VectorXd::Zero(kCells);

    poly.eq = Eigen::MatrixXd::Zero(8, kCells);
    poly.eq_rhs = Eigen::VectorXd::Zero(8);
    Eigen::Index row = 0;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) poly.eq(row, Eigen::Index(cell_index(x, y, a, b))) = 1.0;
            }
            poly.eq_rhs(row) = inputs(x, y);
            ++row;
        }
    }
    // P(a=0|x,y=0) == P(a=0|x,y=1)
    for (int x = 0; x < 2; ++x) {
        for (int b = 0; b < 2; ++b) {
            poly.eq(row, Eigen::Index(cell_index(x, 0, 0, b))) = 1.0 / inputs(x, 0);
            poly.eq(row, Eigen::Index(cell_index(x, 1, 0, b))) = -1.0 / inputs(x, 1);
        }
        ++row;
    }
    // P(b=0|x=0,y) == P(b=0|x=1,y)
    for (int y = 0; y < 2; ++y) {
        for (int a = 0; a < 2; ++a) {
            poly.eq(row, Eigen::Index(cell_index(0, y, a, 0))) = 1.0 / inputs(0, y);
            poly.eq(row, Eigen::Index(cell_index(1, y, a, 0))) = -1.0 / inputs(1, y);
        }
        ++row;
    }
    return poly;
}

HPolytope tsirelson_hpolytope(const InputDistribution& inputs) {
    HPolytope poly = ns_hpolytope(inputs);
    const auto patterns = chsh_sign_patterns();
    const Eigen::Index base = poly.ineq.rows();
    poly.ineq.conservativeResize(base + Eigen::Index(patterns.size()), Eigen::NoChange);
    poly.ineq_rhs.conservativeResize(base + Eigen::Index(patterns.size()));
    for (std::size_t k = 0; k < patterns.size(); ++k) {
        const Eigen::Index r = base + Eigen::Index(k);
        for (std::size_t i = 0; i < kCells; ++i) {
            const Cell c = cell_of(i);
            const double sign = ((c.a + c.b) % 2 == 0) ? 1.0 : -1.0;
            poly.ineq(r, Eigen::Index(i)) = patterns[k][input_index(c.x, c.y)] * sign / inputs(c.x, c.y);
        }
        poly.ineq_rhs(r) = 2.0 * std::numbers::sqrt2;
    }
    return poly;
}

TrialModel ns_model(const InputDistribution& inputs) {
    std::vector<TrialDistribution> vertices = local_deterministic_points(inputs);
    for (TrialDistribution& pr : pr_boxes(inputs)) vertices.push_back(pr);
    return TrialModel(ModelKind::NonSignaling, inputs, std::move(vertices));
}

TrialModel tsirelson_model(const InputDistribution& inputs) {
    const HPolytope poly = tsirelson_hpolytope(inputs);
    const std::vector<Eigen::VectorXd> points = enumerate_vertices(poly);
    std::vector<TrialDistribution> vertices;
    vertices.reserve(points.size());
    for (const Eigen::VectorXd& p : points) {
        CellTable probs{};
        double total = 0.0;
        for (std::size_t i = 0; i < kCells; ++i) {
            probs[i] = std::max(0.0, p(Eigen::Index(i)));
            total += probs[i];
        }
        for (double& v : probs) v /= total;
        vertices.emplace_back(probs);
    }
    if (vertices.size() != 80) {
        throw NumericalError("Tsirelson enumeration produced " + std::to_string(vertices.size()) +
                             " vertices over the 16 positivity and 8 CHSH facets (expected 80)");
    }
    std::sort(vertices.begin(), vertices.end(),
              [](const TrialDistribution& l, const TrialDistribution& r) { return l.probs() < r.probs(); });
    return TrialModel(ModelKind::NonSignalingTsirelson, inputs, std::move(vertices));
}

Membership is_member(const std::vector<TrialDistribution>& vertices, const TrialDistribution& dist, double tol) {
    const Eigen::Index k = Eigen::Index(vertices.size());
    lp::LinearProgram prog;
    // variables: weights w_0..w_{k-1}, then the max-norm residual s
    prog.cost = Eigen::VectorXd::Zero(k + 1);
    prog.cost(k) = 1.0;
    prog.eq = Eigen::MatrixXd::Zero(1, k + 1);
    prog.eq.row(0).head(k).setOnes();
    prog.eq_rhs = Eigen::VectorXd::Ones(1);
    prog.ub = Eigen::MatrixXd::Zero(2 * Eigen::Index(kCells), k + 1);
    prog.ub_rhs = Eigen::VectorXd::Zero(2 * Eigen::Index(kCells));
    for (std::size_t i = 0; i < kCells; ++i) {
        const Eigen::Index r = Eigen::Index(2 * i);
        for (Eigen::Index j = 0; j < k; ++j) {
            prog.ub(r, j) = vertices[std::size_t(j)][i];
            prog.ub(r + 1, j) = -vertices[std::size_t(j)][i];
        }
        prog.ub(r, k) = -1.0;
        prog.ub(r + 1, k) = -1.0;
        prog.ub_rhs(r) = dist[i];
        prog.ub_rhs(r + 1) = -dist[i];
    }
    const lp::Result res = lp::solve(prog);
    if (res.status != lp::Status::Optimal) throw NumericalError("is_member: membership LP did not solve");
    Membership m;
    m.distance = res.objective;
    m.member = res.objective <= tol;
    m.weights.assign(res.x.data(), res.x.data() + k);
    return m;
}

Membership is_member(const TrialModel& model, const TrialDistribution& dist, double tol) {
    return is_member(model.vertices(), dist, tol);
}

TrialDistribution project_to_model(const TrialModel& model, const TrialDistribution& dist) {
    const Membership m = is_member(model, dist, 0.0);
    std::vector<double> w = m.weights;
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return mixture(model.vertices(), w);
}

}  // namespace pefcert
