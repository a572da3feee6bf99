#pragma once

// Convex-polytope trial models for the CHSH scenario with a fixed input
// distribution, given by their extreme points.

#include <optional>
#include <string>
#include <vector>

#include "pefcert/trial.hpp"
#include "pefcert/vertex_enum.hpp"

namespace pefcert {

enum class ModelKind { NonSignaling, NonSignalingTsirelson, Custom };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

class TrialModel {
public:
    /// Validates vertex marginals against inputs (1e-10), non-signaling (1e-10)
    /// and the vertex count implied by kind (24 or 80).
    TrialModel(ModelKind kind, InputDistribution inputs, std::vector<TrialDistribution> vertices);

    ModelKind kind() const { return kind_; }
    const InputDistribution& inputs() const { return inputs_; }
    const std::vector<TrialDistribution>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }

private:
    ModelKind kind_;
    InputDistribution inputs_;
    std::vector<TrialDistribution> vertices_;
};

/// The 16 local deterministic strategies a = f(x), b = g(y).
std::vector<TrialDistribution> local_deterministic_points(const InputDistribution& inputs);

/// The 8 PR boxes a xor b = xy xor s x xor t y xor u; index 0 is the one
/// maximizing the standard CHSH expectation.
std::vector<TrialDistribution> pr_boxes(const InputDistribution& inputs);

/// True when every conditional nu(ab|xy) is 0 or 1 (within tol).
bool is_deterministic(const TrialDistribution& dist, double tol = 1e-12);

/// Largest one-party marginal difference across the remote setting.
double signaling_violation(const TrialDistribution& dist);

/// Sign patterns s_xy of the eight CHSH-type functionals
/// sum_xy s_xy E_xy, with an odd number of negative signs.
std::vector<std::array<int, 4>> chsh_sign_patterns();

/// Half-space description of the non-signaling slice in probability coordinates.
HPolytope ns_hpolytope(const InputDistribution& inputs);
/// ns_hpolytope plus |CHSH_s| <= 2 sqrt 2 for every sign pattern.
HPolytope tsirelson_hpolytope(const InputDistribution& inputs);

/// 16 local deterministic points + 8 PR boxes, cross-checked against enumeration.
TrialModel ns_model(const InputDistribution& inputs = InputDistribution::uniform());
/// Extreme points of the non-signaling polytope cut by all Tsirelson bounds (80).
TrialModel tsirelson_model(const InputDistribution& inputs = InputDistribution::uniform());

struct Membership {
    bool member = false;
    /// Max-norm distance from dist to the nearest point of the hull.
    double distance = 0.0;
    /// Convex weights over model.vertices() realizing the nearest point.
    std::vector<double> weights;
};

/// Decides whether dist lies within tol (max-norm) of conv(model.vertices()).
Membership is_member(const TrialModel& model, const TrialDistribution& dist, double tol = 1e-8);
/// Same test against an arbitrary vertex list.
Membership is_member(const std::vector<TrialDistribution>& vertices, const TrialDistribution& dist,
                     double tol = 1e-8);

/// Nearest point of the model's hull in max-norm (dist itself when it is a member).
TrialDistribution project_to_model(const TrialModel& model, const TrialDistribution& dist);

}  // namespace pefcert
