#include "informed/risks.hpp"

#include <cmath>
#include <stdexcept>

namespace informed {

namespace {

// softmax with log-sum-exp stabilization; also returns logsumexp(h).
double stable_softmax(const Vector& h, Vector& probs) {
    const double hmax = h.maxCoeff();
    probs = (h.array() - hmax).exp();
    const double total = probs.sum();
    probs /= total;
    return hmax + std::log(total);
}

RiskEval cross_entropy_against(const Vector& h, const Vector& target) {
    Vector probs;
    const double lse = stable_softmax(h, probs);
    RiskEval eval;
    eval.value = lse - target.dot(h);
    eval.grad = probs - target;
    return eval;
}

}  // namespace

RiskEval label_risk(const RiskSpec& spec, const Vector& h, const Label& z) {
    switch (spec.label_risk) {
        case LabelRiskKind::HalfSquaredError: {
            const Vector* target = std::get_if<Vector>(&z);
            if (target == nullptr) {
                throw std::invalid_argument("label_risk: half-squared risk needs a vector label");
            }
            if (target->size() != h.size()) {
                throw std::invalid_argument("label_risk: label length mismatch");
            }
            RiskEval eval;
            eval.grad = h - *target;
            eval.value = 0.5 * eval.grad.squaredNorm();
            return eval;
        }
        case LabelRiskKind::SoftmaxCrossEntropyOnehot: {
            const ClassLabel* cls = std::get_if<ClassLabel>(&z);
            if (cls == nullptr) {
                throw std::invalid_argument("label_risk: cross-entropy risk needs a class label");
            }
            if (cls->index < 0 || cls->index >= h.size()) {
                throw std::invalid_argument("label_risk: class index out of range");
            }
            Vector onehot = Vector::Zero(h.size());
            onehot[cls->index] = 1.0;
            return cross_entropy_against(h, onehot);
        }
    }
    throw std::logic_error("label_risk: unknown kind");
}

RiskEval knowledge_risk(const RiskSpec& spec, const Vector& h, const KnowledgePayload& g) {
    switch (spec.knowledge_risk) {
        case KnowledgeRiskKind::ConstraintRelu: {
            const Bounds* bounds = std::get_if<Bounds>(&g);
            if (bounds == nullptr) {
                throw std::invalid_argument("knowledge_risk: constraint risk needs a bounds payload");
            }
            if (bounds->lower.size() != h.size() || bounds->upper.size() != h.size()) {
                throw std::invalid_argument("knowledge_risk: bounds length mismatch");
            }
            if ((bounds->lower.array() > bounds->upper.array()).any()) {
                throw std::invalid_argument("knowledge_risk: lower bound exceeds upper bound");
            }
            RiskEval eval;
            eval.grad = Vector::Zero(h.size());
            eval.value = 0.0;
            for (Eigen::Index j = 0; j < h.size(); ++j) {
                const double over = h[j] - bounds->upper[j];
                const double under = bounds->lower[j] - h[j];
                if (over > 0.0) {
                    eval.value += over;
                    eval.grad[j] += 1.0;
                }
                if (under > 0.0) {
                    eval.value += under;
                    eval.grad[j] -= 1.0;
                }
            }
            return eval;
        }
        case KnowledgeRiskKind::HalfSquaredToTeacher: {
            const Teacher* teacher = std::get_if<Teacher>(&g);
            if (teacher == nullptr) {
                throw std::invalid_argument("knowledge_risk: teacher risk needs a teacher payload");
            }
            if (teacher->value.size() != h.size()) {
                throw std::invalid_argument("knowledge_risk: teacher length mismatch");
            }
            RiskEval eval;
            eval.grad = h - teacher->value;
            eval.value = 0.5 * eval.grad.squaredNorm();
            return eval;
        }
        case KnowledgeRiskKind::SoftmaxCrossEntropySoft: {
            const RateVector* rates = std::get_if<RateVector>(&g);
            if (rates == nullptr) {
                throw std::invalid_argument("knowledge_risk: soft-label risk needs a rate payload");
            }
            if (rates->value.size() != h.size()) {
                throw std::invalid_argument("knowledge_risk: rate vector length mismatch");
            }
            if (!(spec.temperature > 0.0)) {
                throw std::invalid_argument("knowledge_risk: temperature must be positive");
            }
            Vector target;
            stable_softmax(spec.temperature * rates->value, target);
            return cross_entropy_against(h, target);
        }
    }
    throw std::logic_error("knowledge_risk: unknown kind");
}

void validate_weights(const ObjectiveWeights& weights, int n_z, int n_g) {
    const int n = n_z + n_g;
    if (weights.mu.size() != n || weights.lam.size() != n) {
        throw std::invalid_argument("objective weights: length mismatch");
    }
    if ((weights.mu.array() < 0.0).any() || (weights.lam.array() < 0.0).any()) {
        throw std::invalid_argument("objective weights: negative weight");
    }
    if (weights.mu.tail(n_g).any()) {
        throw std::invalid_argument("objective weights: label weight on a knowledge sample");
    }
    if (weights.lam.head(n_z).any()) {
        throw std::invalid_argument("objective weights: knowledge weight on a labeled sample");
    }
    const double total = weights.mu.sum() + weights.lam.sum();
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("objective weights: weights must sum to 1");
    }
}

ObjectiveWeights eq1_weights(double lambda, int n_z, int n_g) {
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("eq1_weights: lambda outside [0,1]");
    }
    if (n_z == 0 && lambda < 1.0) {
        throw std::invalid_argument("eq1_weights: empty labeled set with lambda < 1");
    }
    if (n_g == 0 && lambda > 0.0) {
        throw std::invalid_argument("eq1_weights: empty knowledge set with lambda > 0");
    }
    ObjectiveWeights weights;
    weights.mu = Vector::Zero(n_z + n_g);
    weights.lam = Vector::Zero(n_z + n_g);
    if (n_z > 0 && lambda < 1.0) weights.mu.head(n_z).setConstant((1.0 - lambda) / n_z);
    if (n_g > 0 && lambda > 0.0) weights.lam.tail(n_g).setConstant(lambda / n_g);
    return weights;
}

ObjectiveWeights eq3_weights(double lambda, double beta, int n_z, int n_g,
                             const std::vector<int>& g_prime,
                             const std::vector<int>& g_double_prime) {
    if (lambda < 0.0 || lambda > 1.0 || beta < 0.0 || beta > 1.0) {
        throw std::invalid_argument("eq3_weights: lambda/beta outside [0,1]");
    }
    const double label_coef = (1.0 - lambda) * (1.0 - beta);
    const double prime_coef = (1.0 - lambda) * beta;
    if (n_z == 0 && label_coef > 0.0) {
        throw std::invalid_argument("eq3_weights: empty labeled set with positive coefficient");
    }
    if (g_prime.empty() && prime_coef > 0.0) {
        throw std::invalid_argument("eq3_weights: empty S_g' with positive coefficient");
    }
    if (g_double_prime.empty() && lambda > 0.0) {
        throw std::invalid_argument("eq3_weights: empty S_g'' with positive coefficient");
    }
    ObjectiveWeights weights;
    weights.mu = Vector::Zero(n_z + n_g);
    weights.lam = Vector::Zero(n_z + n_g);
    if (label_coef > 0.0) weights.mu.head(n_z).setConstant(label_coef / n_z);
    if (prime_coef > 0.0) {
        const double w = prime_coef / static_cast<double>(g_prime.size());
        for (int idx : g_prime) weights.lam[idx] = w;
    }
    if (lambda > 0.0) {
        const double w = lambda / static_cast<double>(g_double_prime.size());
        for (int idx : g_double_prime) weights.lam[idx] = w;
    }
    return weights;
}

double weighted_risk_and_seeds(const Matrix& outputs, const RiskSpec& spec,
                               const LabeledSet& labeled, const KnowledgeSet& knowledge,
                               const ObjectiveWeights& weights,
                               const std::vector<int>& batch, double scale, Matrix* seeds) {
    const int n_z = labeled.size();
    double total = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const int i = batch[b];
        const Vector h = outputs.col(static_cast<Eigen::Index>(b));
        Vector seed = Vector::Zero(h.size());
        if (i < n_z) {
            const double mu = weights.mu[i];
            if (mu != 0.0) {
                RiskEval eval = label_risk(spec, h, labeled.labels[static_cast<std::size_t>(i)]);
                total += mu * eval.value;
                seed += mu * eval.grad;
            }
        } else {
            const double lam = weights.lam[i];
            if (lam != 0.0) {
                RiskEval eval = knowledge_risk(
                    spec, h, knowledge.payloads[static_cast<std::size_t>(i - n_z)]);
                total += lam * eval.value;
                seed += lam * eval.grad;
            }
        }
        if (seeds != nullptr) {
            seeds->col(static_cast<Eigen::Index>(b)) = scale * seed;
        }
    }
    return scale * total;
}

double weighted_form(const Matrix& outputs, const RiskSpec& spec, const LabeledSet& labeled,
                     const KnowledgeSet& knowledge, const ObjectiveWeights& weights) {
    const int n = labeled.size() + knowledge.size();
    validate_weights(weights, labeled.size(), knowledge.size());
    if (outputs.cols() != n) {
        throw std::invalid_argument("weighted_form: output count mismatch");
    }
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return weighted_risk_and_seeds(outputs, spec, labeled, knowledge, weights, all, 1.0, nullptr);
}

double informed_risk(const Matrix& outputs, const RiskSpec& spec, const LabeledSet& labeled,
                     const KnowledgeSet& knowledge, double lambda) {
    return weighted_form(outputs, spec, labeled, knowledge,
                         eq1_weights(lambda, labeled.size(), knowledge.size()));
}

double generalized_informed_risk(const Matrix& outputs, const RiskSpec& spec,
                                 const LabeledSet& labeled, const KnowledgeSet& knowledge,
                                 double lambda, double beta, const std::vector<int>& g_prime,
                                 const std::vector<int>& g_double_prime) {
    return weighted_form(outputs, spec, labeled, knowledge,
                         eq3_weights(lambda, beta, labeled.size(), knowledge.size(), g_prime,
                                     g_double_prime));
}

}  // namespace informed
