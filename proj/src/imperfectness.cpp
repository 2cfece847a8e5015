#include "informed/imperfectness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace informed {

namespace {

LabeledSet empty_labeled(Eigen::Index input_dim) {
    LabeledSet set;
    set.inputs.resize(input_dim, 0);
    return set;
}

KnowledgeSet empty_knowledge(Eigen::Index input_dim) {
    KnowledgeSet set;
    set.inputs.resize(input_dim, 0);
    return set;
}

}  // namespace

HypothesisFit fit_knowledge_hypothesis(const KnowledgeSet& knowledge_only, const RiskSpec& spec,
                                       int width, int hidden_layers, int output_dim,
                                       const TrainConfig& config) {
    if (knowledge_only.size() == 0) {
        throw std::invalid_argument("fit_knowledge_hypothesis: empty knowledge set");
    }
    const int b = static_cast<int>(knowledge_only.inputs.rows());
    Network net = init_network(b, width, hidden_layers, output_dim, config.seed);

    ObjectiveWeights weights;
    const int n = knowledge_only.size();
    weights.mu = Vector::Zero(n);
    weights.lam = Vector::Constant(n, 1.0 / n);
    LabeledSet no_labels = empty_labeled(b);
    InformedObjective objective(no_labels, knowledge_only, spec, weights);

    HypothesisFit fit;
    if (config.steps == 0) {
        fit.net = std::move(net);
        fit.final_risk = objective.full_value(fit.net);
        return fit;
    }
    TrainResult result = train(std::move(net), objective, config);
    fit.net = std::move(result.net);
    fit.final_risk = result.history.back().objective;
    fit.steps_run = result.steps_run;
    fit.plateaued = result.plateaued;
    return fit;
}

double hypothesis_label_risk(const Network& net, const Matrix& inputs,
                             const std::vector<Label>& true_labels, const RiskSpec& spec) {
    if (static_cast<Eigen::Index>(true_labels.size()) != inputs.cols() || true_labels.empty()) {
        throw std::invalid_argument("hypothesis_label_risk: label count mismatch");
    }
    const Matrix outputs = evaluate_batch(net, inputs);
    double total = 0.0;
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        total += label_risk(spec, outputs.col(static_cast<Eigen::Index>(i)), true_labels[i]).value;
    }
    return total / static_cast<double>(true_labels.size());
}

double knowledge_imperfectness(const Network& knowledge_hypothesis,
                               const KnowledgeSet& knowledge_only,
                               const std::vector<Label>& true_labels, const RiskSpec& spec) {
    return hypothesis_label_risk(knowledge_hypothesis, knowledge_only.inputs, true_labels, spec);
}

HypothesisFit fit_regularized_hypothesis(const LabeledSet& labeled, const KnowledgeSet& g_prime,
                                         double beta, const RiskSpec& spec, int width,
                                         int hidden_layers, int output_dim,
                                         const TrainConfig& config) {
    if (beta < 0.0 || beta > 1.0) {
        throw std::invalid_argument("fit_regularized_hypothesis: beta outside [0,1]");
    }
    if (labeled.size() == 0 && beta < 1.0) {
        throw std::invalid_argument("fit_regularized_hypothesis: empty S_z with beta < 1");
    }
    if (g_prime.size() == 0 && beta > 0.0) {
        throw std::invalid_argument("fit_regularized_hypothesis: empty S_g' with beta > 0");
    }
    const int b = static_cast<int>(labeled.size() > 0 ? labeled.inputs.rows()
                                                      : g_prime.inputs.rows());
    Network net = init_network(b, width, hidden_layers, output_dim, config.seed);

    const int n_z = labeled.size();
    const int n_gp = g_prime.size();
    ObjectiveWeights weights;
    weights.mu = Vector::Zero(n_z + n_gp);
    weights.lam = Vector::Zero(n_z + n_gp);
    if (beta < 1.0) weights.mu.head(n_z).setConstant((1.0 - beta) / n_z);
    if (beta > 0.0) weights.lam.tail(n_gp).setConstant(beta / n_gp);

    // Objectives may reference empty sets; keep storage alive across train().
    LabeledSet no_labels = empty_labeled(b);
    KnowledgeSet no_knowledge = empty_knowledge(b);
    const LabeledSet& z_ref = labeled.size() > 0 ? labeled : no_labels;
    const KnowledgeSet& g_ref = g_prime.size() > 0 ? g_prime : no_knowledge;
    InformedObjective objective(z_ref, g_ref, spec, weights);

    HypothesisFit fit;
    if (config.steps == 0) {
        fit.net = std::move(net);
        fit.final_risk = objective.full_value(fit.net);
        return fit;
    }
    TrainResult result = train(std::move(net), objective, config);
    fit.net = std::move(result.net);
    fit.final_risk = result.history.back().objective;
    fit.steps_run = result.steps_run;
    fit.plateaued = result.plateaued;
    return fit;
}

void beta_sweep(const BetaSweepInput& input, const RiskSpec& spec, int width, int hidden_layers,
                int output_dim, const TrainConfig& config, ImperfectnessReport& report) {
    if (input.grid.empty()) throw std::invalid_argument("beta_sweep: empty grid");
    if (input.labeled == nullptr || input.labeled_truth == nullptr) {
        throw std::invalid_argument("beta_sweep: missing labeled data");
    }
    report.beta_grid = input.grid;
    report.q_r.clear();
    report.q_r_heldout.clear();
    for (std::size_t gi = 0; gi < input.grid.size(); ++gi) {
        const double beta = input.grid[gi];
        try {
            HypothesisFit fit = fit_regularized_hypothesis(*input.labeled, *input.g_prime, beta,
                                                           spec, width, hidden_layers, output_dim,
                                                           config);
            report.q_r.push_back(hypothesis_label_risk(fit.net, input.labeled->inputs,
                                                       *input.labeled_truth, spec));
            if (input.heldout_inputs != nullptr && input.heldout_truth != nullptr) {
                report.q_r_heldout.push_back(hypothesis_label_risk(
                    fit.net, *input.heldout_inputs, *input.heldout_truth, spec));
            }
        } catch (const std::exception& err) {
            throw std::runtime_error("beta_sweep: beta=" + std::to_string(beta) + ": " +
                                     err.what());
        }
    }
    std::size_t best = 0;
    for (std::size_t gi = 1; gi < report.q_r.size(); ++gi) {
        if (report.q_r[gi] < report.q_r[best]) best = gi;  // lowest-beta tie break via strict <
    }
    report.beta_star = report.beta_grid[best];
    report.q_r_star = report.q_r[best];
    report.has_gain = false;
    for (std::size_t gi = 0; gi < report.beta_grid.size(); ++gi) {
        if (report.beta_grid[gi] == 0.0) {
            report.regularization_gain = report.q_r[gi] - report.q_r_star;
            report.has_gain = true;
            break;
        }
    }
    report.width = width;
    report.hidden_layers = hidden_layers;
    if (config.plateau) {
        report.plateau_window = config.plateau->window;
        report.plateau_rel_tol = config.plateau->rel_tol;
    }
}

std::vector<double> default_beta_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    return grid;
}

KnowledgeSet knowledge_subset(const KnowledgeSet& knowledge, const std::vector<int>& global_indices,
                              int n_labeled) {
    KnowledgeSet subset;
    subset.inputs.resize(knowledge.inputs.rows(), static_cast<Eigen::Index>(global_indices.size()));
    subset.payloads.reserve(global_indices.size());
    for (std::size_t i = 0; i < global_indices.size(); ++i) {
        const int local = global_indices[i] - n_labeled;
        subset.inputs.col(static_cast<Eigen::Index>(i)) = knowledge.inputs.col(local);
        subset.payloads.push_back(knowledge.payloads[static_cast<std::size_t>(local)]);
    }
    return subset;
}

std::vector<Label> label_subset(const std::vector<Label>& labels,
                                const std::vector<int>& global_indices, int n_labeled) {
    std::vector<Label> subset;
    subset.reserve(global_indices.size());
    for (int idx : global_indices) {
        subset.push_back(labels[static_cast<std::size_t>(idx - n_labeled)]);
    }
    return subset;
}

ImperfectnessReport imperfectness_report(const ImperfectnessInput& input, const RiskSpec& spec,
                                         int width, int hidden_layers, int output_dim,
                                         TrainConfig config) {
    if (input.labeled == nullptr || input.labeled_truth == nullptr || input.knowledge == nullptr ||
        input.knowledge_truth == nullptr || input.g_prime == nullptr ||
        input.g_double_prime == nullptr) {
        throw std::invalid_argument("imperfectness_report: missing inputs");
    }
    if (!config.plateau) config.plateau = PlateauStop{200, 1e-6};

    ImperfectnessReport report;
    const int n_z = input.labeled->size();

    if (!input.g_double_prime->empty()) {
        KnowledgeSet g_pp = knowledge_subset(*input.knowledge, *input.g_double_prime, n_z);
        HypothesisFit fit =
            fit_knowledge_hypothesis(g_pp, spec, width, hidden_layers, output_dim, config);
        report.knowledge_fit_risk = fit.final_risk;
        report.knowledge_fit_steps = fit.steps_run;
        const std::vector<Label> truth =
            label_subset(*input.knowledge_truth, *input.g_double_prime, n_z);
        report.q_k = knowledge_imperfectness(fit.net, g_pp, truth, spec);
        if (input.heldout_inputs != nullptr && input.heldout_truth != nullptr) {
            report.q_k_heldout = hypothesis_label_risk(fit.net, *input.heldout_inputs,
                                                       *input.heldout_truth, spec);
        }
    }

    KnowledgeSet g_p = knowledge_subset(*input.knowledge, *input.g_prime, n_z);
    BetaSweepInput sweep;
    sweep.labeled = input.labeled;
    sweep.g_prime = &g_p;
    sweep.labeled_truth = input.labeled_truth;
    sweep.grid = input.grid.empty() ? default_beta_grid() : input.grid;
    sweep.heldout_inputs = input.heldout_inputs;
    sweep.heldout_truth = input.heldout_truth;
    beta_sweep(sweep, spec, width, hidden_layers, output_dim, config, report);
    return report;
}

std::string report_to_json(const ImperfectnessReport& report) {
    nlohmann::json doc;
    doc["q_k"] = report.q_k;
    doc["beta_grid"] = report.beta_grid;
    doc["q_r"] = report.q_r;
    doc["beta_star"] = report.beta_star;
    doc["q_r_star"] = report.q_r_star;
    if (report.has_gain) doc["regularization_gain"] = report.regularization_gain;
    if (report.q_k_heldout) doc["q_k_heldout"] = *report.q_k_heldout;
    if (!report.q_r_heldout.empty()) doc["q_r_heldout"] = report.q_r_heldout;
    doc["width"] = report.width;
    doc["hidden_layers"] = report.hidden_layers;
    doc["plateau_window"] = report.plateau_window;
    doc["plateau_rel_tol"] = report.plateau_rel_tol;
    doc["knowledge_fit_risk"] = report.knowledge_fit_risk;
    doc["knowledge_fit_steps"] = report.knowledge_fit_steps;
    return doc.dump(2);
}

}  // namespace informed
