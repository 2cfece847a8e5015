#pragma once

#include <string>
#include <vector>

#include "informed/linalg.hpp"
#include "informed/network.hpp"
#include "informed/risks.hpp"

namespace informed {

/// phi-net over the concatenated (S_z then S_g) inputs plus the derived
/// index structure. Sample indices are global: 0..n_labeled-1 are labeled,
/// n_labeled..n_labeled+n_knowledge-1 are knowledge samples.
struct SmoothSetPartition {
    double phi = 0.0;
    int n_labeled = 0;
    int n_knowledge = 0;
    std::vector<int> representative_samples;   // sample index of each representative
    Matrix representatives;                    // b x N, columns are x'_k
    std::vector<int> assignment;               // sample -> set index
    std::vector<std::vector<int>> index_sets;  // I_{phi,k}
    std::vector<int> labeled_cover;            // U_phi(S_z), sorted set ids
    std::vector<int> g_prime;                  // knowledge samples sharing a set with S_z
    std::vector<int> g_double_prime;           // the rest of S_g
    Vector set_mass;                           // M_k; empty until attach_mass

    int set_count() const { return static_cast<int>(index_sets.size()); }
};

/// Greedy net in input order: a sample becomes a representative iff no
/// existing representative lies within phi of it. Returns the indices of
/// the chosen samples. Result satisfies pairwise separation >= phi and
/// coverage <= phi.
std::vector<int> build_phi_net(const Matrix& samples, double phi);

/// Nearest-representative assignment with lowest-index tie break. A sample
/// farther than phi from every representative signals an inconsistent net.
std::vector<int> assign_sets(const Matrix& samples, const Matrix& representatives, double phi);

/// Fills labeled_cover (sets holding at least one labeled sample), g_prime
/// (knowledge samples whose set is covered), and g_double_prime (the rest)
/// from an assignment already computed for all samples.
void partition_knowledge(SmoothSetPartition& partition);

/// Full construction over the concatenated inputs.
SmoothSetPartition build_partition(const Matrix& labeled_inputs, const Matrix& knowledge_inputs,
                                   double phi);

/// Fills set_mass with M_k = sum of (mu_i + lam_i) over each index set.
void attach_mass(SmoothSetPartition& partition, const ObjectiveWeights& weights);

/// Per-set sign-pattern agreement of the last ReLU layer at initialization.
/// alpha[k] is the fraction of neurons whose sign bit of f_L agrees with the
/// representative's across every sample of set k; for the disagreeing
/// neurons, violations[k] counts (sample, neuron) pairs with |f_L| below
/// 3 sqrt(2 pi) phi^{b+1} / (16 sqrt(m)).
struct SeparabilityReport {
    Vector alpha;
    std::vector<int> violations;
    double alpha_min = 1.0;
    double threshold = 0.0;
};

SeparabilityReport separability_report(const Network& net, const SmoothSetPartition& partition,
                                       const Matrix& all_inputs);

/// Per-set max over members of |h_l(x_i) - h_l(x'_k)| at the given ReLU
/// layer, l in [1, L].
Vector forward_perturbation_diagnostic(const Network& net, const SmoothSetPartition& partition,
                                       const Matrix& all_inputs, int layer);

/// JSON dump (reps, assignment, splits) for inspection.
std::string partition_to_json(const SmoothSetPartition& partition);

}  // namespace informed
