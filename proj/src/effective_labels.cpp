#include "informed/effective_labels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace informed {

double SetObjective::total_weight() const {
    double total = 0.0;
    for (const auto& member : members) total += member.weight;
    return total;
}

double SetObjective::eval(const Vector& h, Vector* subgrad) const {
    double value = 0.0;
    if (subgrad != nullptr) *subgrad = Vector::Zero(output_dim);
    for (const auto& member : members) {
        if (member.weight == 0.0) continue;
        RiskEval eval = member.label != nullptr
                            ? label_risk(*spec, h, *member.label)
                            : knowledge_risk(*spec, h, *member.payload);
        value += member.weight * eval.value;
        if (subgrad != nullptr) *subgrad += member.weight * eval.grad;
    }
    return value;
}

namespace {

bool member_is_quadratic(const RiskSpec& spec, const SetMember& member) {
    if (member.label != nullptr) {
        return spec.label_risk == LabelRiskKind::HalfSquaredError;
    }
    return spec.knowledge_risk == KnowledgeRiskKind::HalfSquaredToTeacher;
}

bool member_is_bounds(const RiskSpec& spec, const SetMember& member) {
    return member.payload != nullptr &&
           spec.knowledge_risk == KnowledgeRiskKind::ConstraintRelu;
}

const Vector& quadratic_target(const SetMember& member) {
    if (member.label != nullptr) return std::get<Vector>(*member.label);
    return std::get<Teacher>(*member.payload).value;
}

EffectiveLabelSolution solve_quadratic(const SetObjective& objective) {
    double total = 0.0;
    for (const auto& member : objective.members) total += member.weight;
    // Normalized accumulation: a single member yields its target exactly.
    Vector weighted = Vector::Zero(objective.output_dim);
    for (const auto& member : objective.members) {
        weighted += (member.weight / total) * quadratic_target(member);
    }
    EffectiveLabelSolution sol;
    sol.y_eff = weighted;
    sol.r_eff = objective.eval(sol.y_eff, nullptr);
    return sol;
}

// d = 1, quadratic members plus constraint bounds: the objective is convex
// piecewise-quadratic with kinks only at the bound values. Evaluate at every
// kink and at each interval's clamped unconstrained minimizer.
EffectiveLabelSolution solve_scalar_breakpoints(const SetObjective& objective) {
    double quad_weight = 0.0;
    double quad_target = 0.0;
    std::vector<double> breakpoints;
    struct Band {
        double weight, lb, ub;
    };
    std::vector<Band> bands;
    for (const auto& member : objective.members) {
        if (member_is_bounds(*objective.spec, member)) {
            const auto& bounds = std::get<Bounds>(*member.payload);
            bands.push_back({member.weight, bounds.lower[0], bounds.upper[0]});
            breakpoints.push_back(bounds.lower[0]);
            breakpoints.push_back(bounds.upper[0]);
        } else {
            quad_weight += member.weight;
            quad_target += member.weight * quadratic_target(member)[0];
        }
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    std::vector<double> candidates = breakpoints;
    // Per-interval slope of the relu part, evaluated at interval interiors.
    for (std::size_t seg = 0; seg <= breakpoints.size(); ++seg) {
        if (quad_weight <= 0.0) break;  // piecewise linear; kinks suffice
        double lo = seg == 0 ? -std::numeric_limits<double>::infinity() : breakpoints[seg - 1];
        double hi = seg == breakpoints.size() ? std::numeric_limits<double>::infinity()
                                              : breakpoints[seg];
        const double probe = std::isinf(lo) ? (std::isinf(hi) ? 0.0 : hi - 1.0)
                             : std::isinf(hi) ? lo + 1.0
                                              : 0.5 * (lo + hi);
        double slope = 0.0;
        for (const auto& band : bands) {
            if (probe > band.ub) slope += band.weight;
            if (probe < band.lb) slope -= band.weight;
        }
        double h = (quad_target - slope) / quad_weight;
        h = std::clamp(h, lo, hi);
        if (std::isfinite(h)) candidates.push_back(h);
    }
    if (candidates.empty()) candidates.push_back(0.0);

    EffectiveLabelSolution sol;
    sol.y_eff = Vector::Zero(1);
    sol.r_eff = std::numeric_limits<double>::infinity();
    for (double h : candidates) {
        Vector point = Vector::Constant(1, h);
        const double value = objective.eval(point, nullptr);
        if (value < sol.r_eff) {
            sol.r_eff = value;
            sol.y_eff = point;
        }
    }
    return sol;
}

EffectiveLabelSolution solve_subgradient(const SetObjective& objective) {
    const double mass = objective.total_weight();
    const double step_scale = 1.0 / mass;

    // Start from the weighted mean of vector label targets when any exist.
    Vector h = Vector::Zero(objective.output_dim);
    double label_weight = 0.0;
    Vector label_sum = Vector::Zero(objective.output_dim);
    for (const auto& member : objective.members) {
        if (member.label != nullptr && member_is_quadratic(*objective.spec, member)) {
            label_weight += member.weight;
            label_sum += member.weight * quadratic_target(member);
        }
    }
    if (label_weight > 0.0) h = label_sum / label_weight;

    Vector subgrad;
    double best_value = objective.eval(h, &subgrad);
    Vector best_h = h;
    double window_best = best_value;
    int iterations = 0;
    double residual = 0.0;

    constexpr int kMaxIterations = 100000;
    constexpr int kWindow = 100;
    constexpr double kTolerance = 1e-10;
    for (int t = 1; t <= kMaxIterations; ++t) {
        h -= (step_scale / std::sqrt(static_cast<double>(t))) * subgrad;
        const double value = objective.eval(h, &subgrad);
        if (value < best_value) {
            best_value = value;
            best_h = h;
        }
        iterations = t;
        if (t % kWindow == 0) {
            residual = window_best - best_value;
            if (residual < kTolerance) break;
            window_best = best_value;
        }
    }
    EffectiveLabelSolution sol;
    sol.y_eff = best_h;
    sol.r_eff = best_value;
    sol.residual = residual;
    sol.iterations = iterations;
    return sol;
}

}  // namespace

EffectiveLabelSolution solve_effective_label_iterative(const SetObjective& objective) {
    if (objective.members.empty()) {
        throw std::invalid_argument("solve_effective_label: empty set");
    }
    if (!(objective.total_weight() > 0.0)) {
        throw std::invalid_argument("solve_effective_label: zero total weight");
    }
    return solve_subgradient(objective);
}

EffectiveLabelSolution solve_effective_label(const SetObjective& objective) {
    if (objective.members.empty()) {
        throw std::invalid_argument("solve_effective_label: empty set");
    }
    if (!(objective.total_weight() > 0.0)) {
        throw std::invalid_argument("solve_effective_label: zero total weight");
    }
    bool all_quadratic = true;
    bool scalar_scan_ok = objective.output_dim == 1;
    for (const auto& member : objective.members) {
        const bool quad = member_is_quadratic(*objective.spec, member);
        const bool bounded = member_is_bounds(*objective.spec, member);
        if (!quad) all_quadratic = false;
        if (!quad && !bounded) scalar_scan_ok = false;
    }
    if (all_quadratic) return solve_quadratic(objective);
    if (scalar_scan_ok) return solve_scalar_breakpoints(objective);
    return solve_subgradient(objective);
}

EffectiveLabelTable effective_risk_table(const SmoothSetPartition& partition,
                                         const LabeledSet& labeled, const KnowledgeSet& knowledge,
                                         const ObjectiveWeights& weights, const RiskSpec& spec,
                                         int output_dim) {
    validate_weights(weights, labeled.size(), knowledge.size());
    if (labeled.size() != partition.n_labeled || knowledge.size() != partition.n_knowledge) {
        throw std::invalid_argument("effective_risk_table: partition/dataset size mismatch");
    }
    if (output_dim < 1) {
        throw std::invalid_argument("effective_risk_table: output_dim must be positive");
    }

    EffectiveLabelTable table;
    const int num_sets = partition.set_count();
    table.y_eff.assign(static_cast<std::size_t>(num_sets), Vector::Zero(output_dim));
    table.r_eff = Vector::Zero(num_sets);
    table.residual = Vector::Zero(num_sets);
    table.total = 0.0;

    for (int k = 0; k < num_sets; ++k) {
        SetObjective objective;
        objective.spec = &spec;
        objective.output_dim = output_dim;
        for (int i : partition.index_sets[static_cast<std::size_t>(k)]) {
            SetMember member;
            if (i < partition.n_labeled) {
                member.weight = weights.mu[i];
                member.label = &labeled.labels[static_cast<std::size_t>(i)];
            } else {
                member.weight = weights.lam[i];
                member.payload = &knowledge.payloads[static_cast<std::size_t>(i - partition.n_labeled)];
            }
            objective.members.push_back(member);
        }
        if (!(objective.total_weight() > 0.0)) continue;  // zero-mass set: convention
        try {
            EffectiveLabelSolution sol = solve_effective_label(objective);
            table.y_eff[static_cast<std::size_t>(k)] = sol.y_eff;
            table.r_eff[k] = sol.r_eff;
            table.residual[k] = sol.residual;
        } catch (const std::exception& err) {
            throw std::runtime_error("effective_risk_table: set " + std::to_string(k) + ": " +
                                     err.what());
        }
    }
    table.total = table.r_eff.sum();
    return table;
}

double convergence_gap_outputs(const Matrix& outputs, const SmoothSetPartition& partition,
                               const EffectiveLabelTable& table, const ObjectiveWeights& weights) {
    const int n = partition.n_labeled + partition.n_knowledge;
    if (outputs.cols() != n) {
        throw std::invalid_argument("convergence_gap: output count mismatch");
    }
    double gap = 0.0;
    for (int i = 0; i < n; ++i) {
        const double weight = weights.mu[i] + weights.lam[i];
        if (weight == 0.0) continue;
        const int k = partition.assignment[static_cast<std::size_t>(i)];
        gap += weight * (outputs.col(i) - table.y_eff[static_cast<std::size_t>(k)]).squaredNorm();
    }
    return gap;
}

double convergence_gap(const Network& net, const SmoothSetPartition& partition,
                       const EffectiveLabelTable& table, const LabeledSet& labeled,
                       const KnowledgeSet& knowledge, const ObjectiveWeights& weights) {
    const int n = partition.n_labeled + partition.n_knowledge;
    Matrix all(net.input_dim, n);
    if (labeled.size() > 0) all.leftCols(labeled.size()) = labeled.inputs;
    if (knowledge.size() > 0) all.rightCols(knowledge.size()) = knowledge.inputs;
    return convergence_gap_outputs(evaluate_batch(net, all), partition, table, weights);
}

std::string table_to_json(const EffectiveLabelTable& table) {
    nlohmann::json doc;
    nlohmann::json sets = nlohmann::json::object();
    for (std::size_t k = 0; k < table.y_eff.size(); ++k) {
        nlohmann::json entry;
        entry["y_eff"] = std::vector<double>(table.y_eff[k].data(),
                                             table.y_eff[k].data() + table.y_eff[k].size());
        entry["r_eff"] = table.r_eff[static_cast<Eigen::Index>(k)];
        entry["residual"] = table.residual[static_cast<Eigen::Index>(k)];
        sets[std::to_string(k)] = entry;
    }
    doc["sets"] = sets;
    doc["r_eff_total"] = table.total;
    return doc.dump(2);
}

}  // namespace informed
