#pragma once

#include <optional>
#include <string>
#include <vector>

#include "informed/network.hpp"
#include "informed/risks.hpp"
#include "informed/trainer.hpp"

namespace informed {

struct HypothesisFit {
    Network net;
    double final_risk = 0.0;
    int steps_run = 0;
    bool plateaued = false;
};

/// Trains a fresh network on (1/n) sum r_K over S_g''. The "optimal
/// hypothesis" is approximated by running the trainer to its plateau rule
/// (or the step cap).
HypothesisFit fit_knowledge_hypothesis(const KnowledgeSet& knowledge_only, const RiskSpec& spec,
                                       int width, int hidden_layers, int output_dim,
                                       const TrainConfig& config);

/// (1/n) sum r(h(x_i), y_i) against true labels.
double hypothesis_label_risk(const Network& net, const Matrix& inputs,
                             const std::vector<Label>& true_labels, const RiskSpec& spec);

/// Q_K: the true-label risk of the knowledge-trained hypothesis over S_g''.
double knowledge_imperfectness(const Network& knowledge_hypothesis,
                               const KnowledgeSet& knowledge_only,
                               const std::vector<Label>& true_labels, const RiskSpec& spec);

/// Trains on (1-beta)/n_z sum r over S_z plus beta/n_g' sum r_K over S_g'.
HypothesisFit fit_regularized_hypothesis(const LabeledSet& labeled, const KnowledgeSet& g_prime,
                                         double beta, const RiskSpec& spec, int width,
                                         int hidden_layers, int output_dim,
                                         const TrainConfig& config);

struct ImperfectnessReport {
    double q_k = 0.0;                     // empirical knowledge imperfectness over S_g''
    std::vector<double> beta_grid;
    std::vector<double> q_r;              // Q_R(beta) per grid point
    double beta_star = 0.0;
    double q_r_star = 0.0;
    double regularization_gain = 0.0;     // Q_R(0) - Q_R(beta*) when 0 is on the grid
    bool has_gain = false;
    std::optional<double> q_k_heldout;    // expected-imperfectness approximations
    std::vector<double> q_r_heldout;
    int width = 0;
    int hidden_layers = 0;
    int plateau_window = 0;
    double plateau_rel_tol = 0.0;
    double knowledge_fit_risk = 0.0;
    int knowledge_fit_steps = 0;
};

/// Q_R(beta) over the grid (fresh identical init seed per point; lowest-beta
/// argmin tie break), evaluated on the true labels of S_z.
struct BetaSweepInput {
    const LabeledSet* labeled = nullptr;
    const KnowledgeSet* g_prime = nullptr;
    const std::vector<Label>* labeled_truth = nullptr;  // true labels over S_z inputs
    std::vector<double> grid;
    const Matrix* heldout_inputs = nullptr;             // optional disjoint evaluation set
    const std::vector<Label>* heldout_truth = nullptr;
};

void beta_sweep(const BetaSweepInput& input, const RiskSpec& spec, int width, int hidden_layers,
                int output_dim, const TrainConfig& config, ImperfectnessReport& report);

std::string report_to_json(const ImperfectnessReport& report);

std::vector<double> default_beta_grid();  // 0, 0.1, ..., 1.0

/// Assembles Q_K over S_g'' and the beta sweep over (S_z, S_g') from a
/// built partition. Forces the plateau rule (200 steps, 1e-6) when the
/// config has none, and logs it in the report.
struct ImperfectnessInput {
    const LabeledSet* labeled = nullptr;
    const std::vector<Label>* labeled_truth = nullptr;
    const KnowledgeSet* knowledge = nullptr;
    const std::vector<Label>* knowledge_truth = nullptr;
    const std::vector<int>* g_prime = nullptr;         // global indices
    const std::vector<int>* g_double_prime = nullptr;  // global indices
    std::vector<double> grid;                          // empty -> default grid
    // Optional disjoint evaluation set approximating the expected
    // imperfectness; fills q_k_heldout / q_r_heldout when present.
    const Matrix* heldout_inputs = nullptr;
    const std::vector<Label>* heldout_truth = nullptr;
};

ImperfectnessReport imperfectness_report(const ImperfectnessInput& input, const RiskSpec& spec,
                                         int width, int hidden_layers, int output_dim,
                                         TrainConfig config);

/// Subset of a knowledge set by global sample indices (offset by n_labeled).
KnowledgeSet knowledge_subset(const KnowledgeSet& knowledge, const std::vector<int>& global_indices,
                              int n_labeled);
std::vector<Label> label_subset(const std::vector<Label>& labels,
                                const std::vector<int>& global_indices, int n_labeled);

}  // namespace informed
