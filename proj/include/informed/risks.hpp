#pragma once

#include <variant>
#include <vector>

#include "informed/linalg.hpp"

namespace informed {

enum class LabelRiskKind {
    HalfSquaredError,          // 0.5 * |h - z|^2
    SoftmaxCrossEntropyOnehot  // CE(softmax(h), onehot(z))
};

enum class KnowledgeRiskKind {
    ConstraintRelu,           // sum_j relu(h_j - ub_j) + relu(lb_j - h_j)
    HalfSquaredToTeacher,     // 0.5 * |h - g|^2
    SoftmaxCrossEntropySoft   // CE(softmax(h), softmax(T * c))
};

struct RiskSpec {
    LabelRiskKind label_risk = LabelRiskKind::HalfSquaredError;
    KnowledgeRiskKind knowledge_risk = KnowledgeRiskKind::ConstraintRelu;
    double temperature = 1.0;
};

struct ClassLabel {
    int index = 0;
};
using Label = std::variant<Vector, ClassLabel>;

struct Bounds {
    Vector lower;
    Vector upper;
};
struct Teacher {
    Vector value;
};
struct RateVector {
    Vector value;  // sum-rate per decision; the soft target is softmax(T * value)
};
using KnowledgePayload = std::variant<Bounds, Teacher, RateVector>;

struct RiskEval {
    double value = 0.0;
    Vector grad;
};

RiskEval label_risk(const RiskSpec& spec, const Vector& h, const Label& z);
RiskEval knowledge_risk(const RiskSpec& spec, const Vector& h, const KnowledgePayload& g);

/// S_z: inputs are columns, one label per column.
struct LabeledSet {
    Matrix inputs;
    std::vector<Label> labels;
    int size() const { return static_cast<int>(labels.size()); }
};

/// S_g: inputs are columns, one knowledge payload per column.
struct KnowledgeSet {
    Matrix inputs;
    std::vector<KnowledgePayload> payloads;
    int size() const { return static_cast<int>(payloads.size()); }
};

/// Per-sample weights over the concatenated sample list (S_z block first,
/// then the S_g block). mu is supported on the labeled block and lam on the
/// knowledge block; mu.sum() + lam.sum() must equal 1 within 1e-12.
struct ObjectiveWeights {
    Vector mu;
    Vector lam;
};

void validate_weights(const ObjectiveWeights& weights, int n_z, int n_g);

/// mu_i = (1-lambda)/n_z on S_z, lam_i = lambda/n_g on S_g.
ObjectiveWeights eq1_weights(double lambda, int n_z, int n_g);

/// mu_i = (1-lambda)(1-beta)/n_z on S_z,
/// lam_i = (1-lambda)beta/n_g' on S_g' and lambda/n_g'' on S_g''.
/// g_prime/g_double_prime hold global sample indices (>= n_z).
ObjectiveWeights eq3_weights(double lambda, double beta, int n_z, int n_g,
                             const std::vector<int>& g_prime,
                             const std::vector<int>& g_double_prime);

/// Weighted objective sum_i [mu_i r(h_i, z_i) + lam_i r_K(h_i, g_i)] over the
/// concatenated outputs (columns aligned with the weight vectors).
double weighted_form(const Matrix& outputs, const RiskSpec& spec, const LabeledSet& labeled,
                     const KnowledgeSet& knowledge, const ObjectiveWeights& weights);

/// (1-lambda)/n_z sum_{S_z} r + lambda/n_g sum_{S_g} r_K, accumulated with
/// the same per-sample weighting as weighted_form.
double informed_risk(const Matrix& outputs, const RiskSpec& spec, const LabeledSet& labeled,
                     const KnowledgeSet& knowledge, double lambda);

/// Three-term generalized objective over the S_g'/S_g'' split.
double generalized_informed_risk(const Matrix& outputs, const RiskSpec& spec,
                                 const LabeledSet& labeled, const KnowledgeSet& knowledge,
                                 double lambda, double beta, const std::vector<int>& g_prime,
                                 const std::vector<int>& g_double_prime);

/// Value plus per-sample output-gradient seeds (each column i scaled by its
/// mu_i or lam_i, times an optional extra scale) for the given batch columns.
double weighted_risk_and_seeds(const Matrix& outputs, const RiskSpec& spec,
                               const LabeledSet& labeled, const KnowledgeSet& knowledge,
                               const ObjectiveWeights& weights,
                               const std::vector<int>& batch, double scale, Matrix* seeds);

}  // namespace informed
