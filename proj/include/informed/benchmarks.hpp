#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "informed/linalg.hpp"
#include "informed/network.hpp"
#include "informed/risks.hpp"

namespace informed {

// ---------------------------------------------------------------------------
// Bohachevsky regression with constraint knowledge
// ---------------------------------------------------------------------------

/// Target y(x) = x A A^T x^T - c cos(a^T x) + c with bound knowledge
///   g_ub(x) = x A A^T x^T + ub,  g_lb(x) = x A A^T x^T + lb,
/// which sandwich y whenever ub >= 2c and lb <= 0. Inputs are uniform on
/// [-1,1]^b.
struct BohachevskyInstance {
    int dim = 2;
    Matrix a_matrix;        // b x b; defaults to 0.5 * (random orthogonal)
    Vector a_vector;        // length b; defaults to all ones
    double c = 0.3;
    double lb = 0.0;        // must be <= 0
    double ub = 0.6;        // must be >= 2c
    double sigma_z_sq = 0.1;
    int n_z = 200;
    int n_g = 1000;
    int n_t = 1000;
    std::uint64_t seed = 0;

    /// Fills a_matrix/a_vector with the documented defaults when empty.
    void finalize_defaults();
    void validate() const;
};

double bohachevsky_value(const BohachevskyInstance& instance, const Vector& x);
std::pair<double, double> bohachevsky_knowledge(const BohachevskyInstance& instance,
                                                const Vector& x);  // (g_lb, g_ub)

struct BohachevskyData {
    LabeledSet labeled;                // S_z with noisy z
    KnowledgeSet knowledge;            // S_g with bound payloads
    Matrix test_inputs;                // S_t
    Vector test_truth;
    Vector labeled_truth;              // exact y over S_z inputs
    Vector knowledge_truth;            // exact y over S_g inputs
};

BohachevskyData bohachevsky_generate(const BohachevskyInstance& instance);

/// (1 / (2 |S_t|)) sum (h(x_i) - y_i)^2 for scalar outputs.
double test_mse(const Network& net, const Matrix& test_inputs, const Vector& test_truth);
double test_mse_outputs(const Vector& outputs, const Vector& test_truth);

std::string bohachevsky_metadata_json(const BohachevskyInstance& instance);

// ---------------------------------------------------------------------------
// Wireless link scheduling with Shannon-rate knowledge
// ---------------------------------------------------------------------------

/// N links; CSI is an N x N amplitude gain matrix (entry (v,u) is the gain
/// from transmitter v to receiver u). Decisions are the 2^N - 1 nonempty
/// link subsets; decision index j in [0, 2^N-2] schedules link u iff bit u
/// of (j+1) is set. Labels come from exhaustive search at mu_real.
struct WirelessInstance {
    int links = 4;
    double noise_power = 1.0;
    double direct_power = 1e10;  // expected |g_uu|^2; literal dB reading by default
    double cross_power = 10.0;   // expected |g_vu|^2, v != u
    double mu_real = 0.5;
    double mu_knowledge = 1.0;
    double temperature = 1.0;
    int n_y = 500;
    int n_g = 2000;
    int n_t = 10000;
    std::uint64_t seed = 0;

    int decision_count() const { return (1 << links) - 1; }
    void validate() const;

    /// Calibration under which the knowledge-only oracle accuracies match
    /// the reference triple (direct 100, cross 10, noise 1: the reported
    /// power gains read as plain ratios rather than dB).
    void apply_matched_calibration();
};

/// Decision bits for index j in [0, 2^N - 2].
std::vector<int> decision_bits(int index, int links);

struct RateBreakdown {
    Vector per_link;
    double sum = 0.0;
};

/// Per-link Shannon rates ln(1 + mu y_u |g_uu|^2 / (sigma_n^2 + sum_{v!=u}
/// y_v |g_vu|^2)) and their sum. Rejects the all-zero decision.
RateBreakdown shannon_rate(const Matrix& csi, const std::vector<int>& decision, double mu,
                           double noise_power);

/// Exhaustive argmax over all nonempty decisions; lowest index wins ties.
std::pair<int, double> oracle_schedule(const Matrix& csi, double mu, double noise_power,
                                       int links);

struct WirelessData {
    std::vector<Matrix> csi;           // all draws: n_y + n_g + n_t
    LabeledSet labeled;                // S_y, class labels at mu_real
    KnowledgeSet knowledge;            // S_g, rate-vector payloads at mu_knowledge
    Matrix test_inputs;                // S_t vectorized CSI
    std::vector<int> test_labels;      // oracle indices at mu_real
    std::vector<int> labeled_indices;  // oracle indices for S_y
    std::vector<int> knowledge_truth;  // oracle indices at mu_real over S_g
};

WirelessData wireless_generate(const WirelessInstance& instance);

/// Vector of sum rates over all decisions, c(x), at the given mu.
Vector rate_vector(const Matrix& csi, double mu, double noise_power, int links);

struct AccuracySumRate {
    double accuracy = 0.0;
    double mean_sum_rate = 0.0;
};

/// Accuracy = exact decision-index matches against the oracle labels;
/// the mean sum rate evaluates the predicted decisions at mu_real.
AccuracySumRate test_accuracy_and_sumrate(const std::vector<int>& predicted,
                                          const std::vector<Matrix>& test_csi,
                                          const std::vector<int>& test_labels, double mu_real,
                                          double noise_power);

/// Accuracy of scheduling by the Shannon-rate knowledge alone at mu_k.
double knowledge_only_accuracy(const std::vector<Matrix>& test_csi,
                               const std::vector<int>& test_labels, double mu_k,
                               double noise_power);

std::string wireless_metadata_json(const WirelessInstance& instance);

// ---------------------------------------------------------------------------
// Synthetic quadratic benchmark (all-quadratic risks; closed-form effective
// labels) used for the convergence-to-effective-labels study
// ---------------------------------------------------------------------------

/// n_pairs inputs drawn uniformly on the unit sphere; every input carries
/// both a noisy label and a noisy teacher value of the same smooth quadratic
/// target, so each phi-net set couples the two supervisions.
struct SyntheticQuadraticInstance {
    int dim = 8;
    int n_pairs = 100;
    double target_scale = 0.5;
    double label_noise = 0.1;
    double teacher_noise = 0.1;
    int n_t = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticQuadraticData {
    LabeledSet labeled;
    KnowledgeSet knowledge;
    Matrix test_inputs;
    Vector test_truth;
    Vector labeled_truth;
    Vector knowledge_truth;
};

SyntheticQuadraticData synthetic_quadratic_generate(const SyntheticQuadraticInstance& instance);

// ---------------------------------------------------------------------------
// Dataset persistence: numeric CSV with a fixed header row
// ---------------------------------------------------------------------------

void save_csv(const std::string& path, const std::vector<std::string>& header,
              const Matrix& columns);
Matrix load_csv(const std::string& path, std::vector<std::string>* header = nullptr);

}  // namespace informed
