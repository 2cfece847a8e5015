#include "informed/smooth_sets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace informed {

std::vector<int> build_phi_net(const Matrix& samples, double phi) {
    if (!(phi > 0.0)) throw std::invalid_argument("build_phi_net: phi must be positive");
    std::vector<int> reps;
    for (Eigen::Index i = 0; i < samples.cols(); ++i) {
        bool covered = false;
        for (int r : reps) {
            if ((samples.col(i) - samples.col(r)).norm() <= phi) {
                covered = true;
                break;
            }
        }
        if (!covered) reps.push_back(static_cast<int>(i));
    }
    return reps;
}

std::vector<int> assign_sets(const Matrix& samples, const Matrix& representatives, double phi) {
    if (representatives.cols() == 0) {
        if (samples.cols() == 0) return {};
        throw std::invalid_argument("assign_sets: no representatives");
    }
    std::vector<int> assignment(static_cast<std::size_t>(samples.cols()));
    for (Eigen::Index i = 0; i < samples.cols(); ++i) {
        int best = 0;
        double best_dist = (samples.col(i) - representatives.col(0)).norm();
        for (Eigen::Index k = 1; k < representatives.cols(); ++k) {
            const double dist = (samples.col(i) - representatives.col(k)).norm();
            if (dist < best_dist) {
                best_dist = dist;
                best = static_cast<int>(k);
            }
        }
        if (best_dist > phi) {
            throw std::runtime_error("assign_sets: sample farther than phi from every representative");
        }
        assignment[static_cast<std::size_t>(i)] = best;
    }
    return assignment;
}

SmoothSetPartition build_partition(const Matrix& labeled_inputs, const Matrix& knowledge_inputs,
                                   double phi) {
    if (labeled_inputs.cols() > 0 && knowledge_inputs.cols() > 0 &&
        labeled_inputs.rows() != knowledge_inputs.rows()) {
        throw std::invalid_argument("build_partition: input dimension mismatch");
    }
    SmoothSetPartition partition;
    partition.phi = phi;
    partition.n_labeled = static_cast<int>(labeled_inputs.cols());
    partition.n_knowledge = static_cast<int>(knowledge_inputs.cols());
    const int n = partition.n_labeled + partition.n_knowledge;
    const Eigen::Index b = labeled_inputs.cols() > 0 ? labeled_inputs.rows() : knowledge_inputs.rows();

    Matrix all(b, n);
    if (partition.n_labeled > 0) all.leftCols(partition.n_labeled) = labeled_inputs;
    if (partition.n_knowledge > 0) all.rightCols(partition.n_knowledge) = knowledge_inputs;

    partition.representative_samples = build_phi_net(all, phi);
    const int num_sets = static_cast<int>(partition.representative_samples.size());
    partition.representatives.resize(b, num_sets);
    for (int k = 0; k < num_sets; ++k) {
        partition.representatives.col(k) = all.col(partition.representative_samples[static_cast<std::size_t>(k)]);
    }
    partition.assignment = assign_sets(all, partition.representatives, phi);

    partition.index_sets.assign(static_cast<std::size_t>(num_sets), {});
    for (int i = 0; i < n; ++i) {
        partition.index_sets[static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(i)])].push_back(i);
    }
    partition_knowledge(partition);
    return partition;
}

void partition_knowledge(SmoothSetPartition& partition) {
    const int n = partition.n_labeled + partition.n_knowledge;
    if (static_cast<int>(partition.assignment.size()) != n) {
        throw std::invalid_argument("partition_knowledge: assignment not computed for all samples");
    }
    partition.labeled_cover.clear();
    partition.g_prime.clear();
    partition.g_double_prime.clear();
    std::vector<char> has_label(static_cast<std::size_t>(partition.set_count()), 0);
    for (int i = 0; i < partition.n_labeled; ++i) {
        has_label[static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(i)])] = 1;
    }
    for (int k = 0; k < partition.set_count(); ++k) {
        if (has_label[static_cast<std::size_t>(k)]) partition.labeled_cover.push_back(k);
    }
    for (int i = partition.n_labeled; i < n; ++i) {
        if (has_label[static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(i)])]) {
            partition.g_prime.push_back(i);
        } else {
            partition.g_double_prime.push_back(i);
        }
    }
}

void attach_mass(SmoothSetPartition& partition, const ObjectiveWeights& weights) {
    validate_weights(weights, partition.n_labeled, partition.n_knowledge);
    partition.set_mass = Vector::Zero(partition.set_count());
    for (int k = 0; k < partition.set_count(); ++k) {
        double mass = 0.0;
        for (int i : partition.index_sets[static_cast<std::size_t>(k)]) {
            mass += weights.mu[i] + weights.lam[i];
        }
        partition.set_mass[k] = mass;
    }
}

SeparabilityReport separability_report(const Network& net, const SmoothSetPartition& partition,
                                       const Matrix& all_inputs) {
    const int num_sets = partition.set_count();
    const int m = net.width;
    SeparabilityReport report;
    report.alpha = Vector::Ones(num_sets);
    report.violations.assign(static_cast<std::size_t>(num_sets), 0);
    report.threshold = 3.0 * std::sqrt(2.0 * M_PI) *
                       std::pow(partition.phi, net.input_dim + 1) / (16.0 * std::sqrt(double(m)));

    // Per-sample forwards: identical inputs give bit-identical activations
    // regardless of their column position, and representatives are samples.
    Matrix sample_pre(m, all_inputs.cols());
    for (Eigen::Index i = 0; i < all_inputs.cols(); ++i) {
        sample_pre.col(i) = forward(net, all_inputs.col(i)).pre.back();
    }

    for (int k = 0; k < num_sets; ++k) {
        const auto& members = partition.index_sets[static_cast<std::size_t>(k)];
        if (members.empty()) continue;  // alpha 1 by convention
        const int rep_col = partition.representative_samples[static_cast<std::size_t>(k)];
        int agreeing = 0;
        int violations = 0;
        for (int j = 0; j < m; ++j) {
            const bool rep_sign = sample_pre(j, rep_col) >= 0.0;
            bool agrees = true;
            for (int i : members) {
                if ((sample_pre(j, i) >= 0.0) != rep_sign) {
                    agrees = false;
                    break;
                }
            }
            if (agrees) {
                ++agreeing;
            } else {
                for (int i : members) {
                    if (std::abs(sample_pre(j, i)) < report.threshold) ++violations;
                }
            }
        }
        report.alpha[k] = static_cast<double>(agreeing) / m;
        report.violations[static_cast<std::size_t>(k)] = violations;
    }
    report.alpha_min = num_sets > 0 ? report.alpha.minCoeff() : 1.0;
    return report;
}

Vector forward_perturbation_diagnostic(const Network& net, const SmoothSetPartition& partition,
                                       const Matrix& all_inputs, int layer) {
    if (layer < 1 || layer > net.hidden_layers) {
        throw std::invalid_argument("forward_perturbation_diagnostic: layer outside [1, L]");
    }
    Matrix sample_post(net.width, all_inputs.cols());
    for (Eigen::Index i = 0; i < all_inputs.cols(); ++i) {
        sample_post.col(i) = forward(net, all_inputs.col(i)).post[static_cast<std::size_t>(layer)];
    }

    Vector result = Vector::Zero(partition.set_count());
    for (int k = 0; k < partition.set_count(); ++k) {
        const int rep_col = partition.representative_samples[static_cast<std::size_t>(k)];
        double worst = 0.0;
        for (int i : partition.index_sets[static_cast<std::size_t>(k)]) {
            worst = std::max(worst, (sample_post.col(i) - sample_post.col(rep_col)).norm());
        }
        result[k] = worst;
    }
    return result;
}

std::string partition_to_json(const SmoothSetPartition& partition) {
    nlohmann::json doc;
    doc["phi"] = partition.phi;
    doc["n_labeled"] = partition.n_labeled;
    doc["n_knowledge"] = partition.n_knowledge;
    doc["set_count"] = partition.set_count();
    doc["representative_samples"] = partition.representative_samples;
    nlohmann::json reps = nlohmann::json::array();
    for (Eigen::Index k = 0; k < partition.representatives.cols(); ++k) {
        std::vector<double> col(partition.representatives.col(k).data(),
                                partition.representatives.col(k).data() + partition.representatives.rows());
        reps.push_back(col);
    }
    doc["representatives"] = reps;
    doc["assignment"] = partition.assignment;
    doc["labeled_cover"] = partition.labeled_cover;
    doc["g_prime"] = partition.g_prime;
    doc["g_double_prime"] = partition.g_double_prime;
    if (partition.set_mass.size() > 0) {
        doc["set_mass"] = std::vector<double>(partition.set_mass.data(),
                                              partition.set_mass.data() + partition.set_mass.size());
    }
    return doc.dump(2);
}

}  // namespace informed
