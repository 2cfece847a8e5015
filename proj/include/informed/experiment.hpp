#pragma once

#include <optional>
#include <string>
#include <vector>

#include "informed/benchmarks.hpp"
#include "informed/risks.hpp"
#include "informed/trainer.hpp"

namespace informed {

enum class BenchmarkKind { Bohachevsky, Wireless, SyntheticQuadratic };
enum class ObjectiveKind { Eq1, Eq3 };

struct NetworkShape {
    int width = 64;
    int hidden_layers = 1;
};

struct ExperimentConfig {
    BenchmarkKind benchmark = BenchmarkKind::SyntheticQuadratic;
    ObjectiveKind objective = ObjectiveKind::Eq1;
    std::vector<double> lambda_grid{0.0};
    std::vector<double> beta_grid;  // empty behaves as {0}
    double phi = 0.2;
    NetworkShape network;
    TrainConfig train;
    std::vector<std::uint64_t> seeds{1};
    bool compute_gap = true;
    int workers = 1;

    // Exactly one instance is active, selected by `benchmark`.
    BohachevskyInstance bohachevsky;
    WirelessInstance wireless;
    SyntheticQuadraticInstance synthetic;

    void validate() const;
};

/// Strict JSON parse: unknown keys are rejected with their key path.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/// Generated datasets plus the evaluation context for one seed entry.
struct PreparedData {
    LabeledSet labeled;
    KnowledgeSet knowledge;
    RiskSpec spec;
    int input_dim = 0;
    int output_dim = 0;
    std::vector<Label> labeled_truth;    // true labels over S_z inputs
    std::vector<Label> knowledge_truth;  // true labels over S_g inputs
    Matrix test_inputs;
    Vector test_truth;             // regression benchmarks
    std::vector<int> test_labels;  // wireless
    std::vector<Matrix> test_csi;  // wireless
    double mu_real = 0.0;
    double noise_power = 0.0;
};

/// Deterministic dataset for a seed entry (shared by every grid point).
PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed_entry);

/// Writes the generated sets as CSV files plus an instance metadata sidecar.
void save_datasets(const ExperimentConfig& config, const PreparedData& data,
                   const std::string& dir);

struct ResultRow {
    std::string benchmark;
    std::string objective;
    std::uint64_t seed = 0;      // seed list entry
    std::uint64_t run_seed = 0;  // hash(seed, grid indices)
    double lambda = 0.0;
    double beta = 0.0;
    double final_objective = 0.0;
    std::optional<double> test_mse;
    std::optional<double> test_accuracy;
    std::optional<double> test_sum_rate;
    std::optional<double> convergence_gap;
    std::optional<double> q_k;
    std::optional<double> q_r;
    double wall_time_s = 0.0;
    std::string status = "ok";
};

/// Runs the full grid x seed sweep. Rows come back in deterministic
/// (lambda, beta, seed) order regardless of worker scheduling; a failed row
/// carries its reason in `status`. The optional artifact directory receives
/// per-run network dumps and per-seed dataset files.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const std::string& artifact_dir = "");

/// Fixed header:
/// benchmark,objective,seed,run_seed,lambda,beta,final_objective,test_mse,
/// test_accuracy,test_sum_rate,convergence_gap,q_k,q_r,status
/// Byte-identical across reruns of the same config (wall times live in the
/// JSON summary only).
std::string rows_to_csv(const std::vector<ResultRow>& rows);

/// Per-(lambda, beta) mean and sample standard deviation over seeds.
std::string summary_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows);

void emit_results(const std::vector<ResultRow>& rows, const ExperimentConfig& config,
                  const std::string& csv_path, const std::string& summary_path);

}  // namespace informed
