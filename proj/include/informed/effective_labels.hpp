#pragma once

#include <string>
#include <vector>

#include "informed/linalg.hpp"
#include "informed/network.hpp"
#include "informed/risks.hpp"
#include "informed/smooth_sets.hpp"

namespace informed {

/// One supervision term of a per-set objective
///   J(h) = sum_i w_i r(h, z_i)  +  sum_j w_j r_K(h, g_j).
struct SetMember {
    double weight = 0.0;
    const Label* label = nullptr;              // exactly one of label/payload set
    const KnowledgePayload* payload = nullptr;
};

struct SetObjective {
    const RiskSpec* spec = nullptr;
    int output_dim = 0;
    std::vector<SetMember> members;

    double total_weight() const;
    double eval(const Vector& h, Vector* subgrad) const;
};

struct EffectiveLabelSolution {
    Vector y_eff;
    double r_eff = 0.0;
    double residual = 0.0;  // final objective decrement of the iterative path; 0 when exact
    int iterations = 0;     // 0 when solved in closed form
};

/// Minimizes J over R^d. Closed form when every member risk is half-squared;
/// exact breakpoint scan for d = 1 mixtures involving constraint bounds;
/// otherwise subgradient descent with steps (1/M_k)/sqrt(t) until the best
/// objective improves by < 1e-10 over 100 steps or 1e5 iterations elapse.
EffectiveLabelSolution solve_effective_label(const SetObjective& objective);

/// The subgradient path unconditionally; cross-checks the closed forms.
EffectiveLabelSolution solve_effective_label_iterative(const SetObjective& objective);

struct EffectiveLabelTable {
    std::vector<Vector> y_eff;  // per set
    Vector r_eff;               // per set
    Vector residual;            // per set
    double total = 0.0;         // R_eff = sum_k r_eff[k]
};

/// Solves every set of the partition. Sets with zero total weight get
/// y_eff = 0, r_eff = 0 by convention (they carry no objective mass).
EffectiveLabelTable effective_risk_table(const SmoothSetPartition& partition,
                                         const LabeledSet& labeled, const KnowledgeSet& knowledge,
                                         const ObjectiveWeights& weights, const RiskSpec& spec,
                                         int output_dim);

/// sum_i (mu_i + lam_i) |h(x_i) - y_eff_{k(x_i)}|^2 over all samples.
double convergence_gap(const Network& net, const SmoothSetPartition& partition,
                       const EffectiveLabelTable& table, const LabeledSet& labeled,
                       const KnowledgeSet& knowledge, const ObjectiveWeights& weights);

/// Same quantity for precomputed outputs (columns aligned with samples).
double convergence_gap_outputs(const Matrix& outputs, const SmoothSetPartition& partition,
                               const EffectiveLabelTable& table, const ObjectiveWeights& weights);

std::string table_to_json(const EffectiveLabelTable& table);

}  // namespace informed
