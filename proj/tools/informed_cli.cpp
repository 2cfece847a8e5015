// Command-line front end: training runs, grid sweeps, phi-net inspection,
// imperfectness estimation, the hyper-parameter advisor, and the wireless
// scheduling oracle.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "informed/advisor.hpp"
#include "informed/benchmarks.hpp"
#include "informed/effective_labels.hpp"
#include "informed/experiment.hpp"
#include "informed/imperfectness.hpp"
#include "informed/smooth_sets.hpp"
#include "informed/trainer.hpp"

namespace {

using informed::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitPartialFailure = 2;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int workers,
              bool artifacts) {
    ExperimentConfig config = informed::parse_config(config_path);
    if (workers > 0) config.workers = workers;
    std::filesystem::create_directories(out_dir);
    const std::string artifact_dir = artifacts ? out_dir + "/artifacts" : "";
    std::vector<informed::ResultRow> rows = informed::run_experiment(config, artifact_dir);
    informed::emit_results(rows, config, out_dir + "/results.csv", out_dir + "/summary.json");
    int failures = 0;
    for (const auto& row : rows) {
        if (row.status != "ok") ++failures;
    }
    std::cout << "rows: " << rows.size() << ", failures: " << failures << "\n";
    std::cout << "wrote " << out_dir << "/results.csv and summary.json\n";
    return failures == 0 ? kExitOk : kExitPartialFailure;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    ExperimentConfig config = informed::parse_config(config_path);
    if (config.lambda_grid.size() != 1 || config.beta_grid.size() > 1 ||
        config.seeds.size() != 1) {
        throw std::invalid_argument(
            "train expects a single-point config (one lambda, at most one beta, one seed); "
            "use sweep for grids");
    }
    std::filesystem::create_directories(out_dir);
    config.workers = 1;
    std::vector<informed::ResultRow> rows = informed::run_experiment(config, out_dir);
    informed::emit_results(rows, config, out_dir + "/results.csv", out_dir + "/summary.json");
    std::cout << informed::rows_to_csv(rows);
    return rows.front().status == "ok" ? kExitOk : kExitPartialFailure;
}

int cmd_phi_net(const std::string& config_path, const std::string& out_path) {
    ExperimentConfig config = informed::parse_config(config_path);
    informed::PreparedData data = informed::prepare_data(config, config.seeds.front());
    informed::SmoothSetPartition partition =
        informed::build_partition(data.labeled.inputs, data.knowledge.inputs, config.phi);

    informed::Network net =
        informed::init_network(data.input_dim, config.network.width, config.network.hidden_layers,
                               data.output_dim, config.seeds.front());
    informed::Matrix all(data.labeled.inputs.rows(), data.labeled.size() + data.knowledge.size());
    if (data.labeled.size() > 0) all.leftCols(data.labeled.size()) = data.labeled.inputs;
    if (data.knowledge.size() > 0) all.rightCols(data.knowledge.size()) = data.knowledge.inputs;
    informed::SeparabilityReport sep = informed::separability_report(net, partition, all);

    std::cout << "phi = " << partition.phi << "\n";
    std::cout << "N (representatives) = " << partition.set_count() << "\n";
    std::cout << "samples = " << all.cols() << " (" << partition.n_labeled << " labeled, "
              << partition.n_knowledge << " knowledge)\n";
    std::cout << "|S_g'| = " << partition.g_prime.size()
              << ", |S_g''| = " << partition.g_double_prime.size() << "\n";

    std::map<std::size_t, int> histogram;
    for (const auto& members : partition.index_sets) ++histogram[members.size()];
    std::cout << "set-size histogram (size: count):\n";
    for (const auto& [size, count] : histogram) {
        std::cout << "  " << size << ": " << count << "\n";
    }
    std::printf("alpha: min %.4f mean %.4f (threshold %.3e)\n", sep.alpha_min,
                sep.alpha.mean(), sep.threshold);
    int total_violations = 0;
    for (int v : sep.violations) total_violations += v;
    std::cout << "below-threshold violations: " << total_violations << "\n";
    for (int layer = 1; layer <= net.hidden_layers; ++layer) {
        const informed::Vector diag =
            informed::forward_perturbation_diagnostic(net, partition, all, layer);
        std::printf("forward perturbation, layer %d: max %.4e mean %.4e\n", layer,
                    diag.size() > 0 ? diag.maxCoeff() : 0.0, diag.size() > 0 ? diag.mean() : 0.0);
    }

    if (!out_path.empty()) {
        write_text(out_path, informed::partition_to_json(partition));
        std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_imperfectness(const std::string& config_path, const std::string& out_path) {
    ExperimentConfig config = informed::parse_config(config_path);
    informed::PreparedData data = informed::prepare_data(config, config.seeds.front());
    informed::SmoothSetPartition partition =
        informed::build_partition(data.labeled.inputs, data.knowledge.inputs, config.phi);

    informed::ImperfectnessInput input;
    input.labeled = &data.labeled;
    input.labeled_truth = &data.labeled_truth;
    input.knowledge = &data.knowledge;
    input.knowledge_truth = &data.knowledge_truth;
    input.g_prime = &partition.g_prime;
    input.g_double_prime = &partition.g_double_prime;

    // Held-out expected-imperfectness approximation over the test split.
    std::vector<informed::Label> heldout_truth;
    if (data.test_truth.size() > 0) {
        for (Eigen::Index i = 0; i < data.test_truth.size(); ++i) {
            heldout_truth.emplace_back(informed::Vector::Constant(1, data.test_truth[i]));
        }
    } else {
        for (int label : data.test_labels) {
            heldout_truth.emplace_back(informed::ClassLabel{label});
        }
    }
    input.heldout_inputs = &data.test_inputs;
    input.heldout_truth = &heldout_truth;

    informed::TrainConfig train_config = config.train;
    train_config.seed = config.seeds.front();
    informed::ImperfectnessReport report = informed::imperfectness_report(
        input, data.spec, config.network.width, config.network.hidden_layers, data.output_dim,
        train_config);

    std::printf("Q_K (S_g'', n=%zu): %.6g\n", partition.g_double_prime.size(), report.q_k);
    for (std::size_t i = 0; i < report.beta_grid.size(); ++i) {
        std::printf("Q_R(beta=%.2f) = %.6g\n", report.beta_grid[i], report.q_r[i]);
    }
    std::printf("beta* = %.2f, Q_R* = %.6g\n", report.beta_star, report.q_r_star);
    if (report.has_gain) std::printf("regularization gain = %.6g\n", report.regularization_gain);

    if (!out_path.empty()) {
        write_text(out_path, informed::report_to_json(report));
        std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_advise(double epsilon, double qk, double qr, const std::string& out_path) {
    informed::AdvisorDecision decision = informed::choose_lambda(epsilon, qk, qr);
    const std::string text = informed::decision_to_json(decision);
    std::cout << text << "\n";
    if (!out_path.empty()) write_text(out_path, text);
    return kExitOk;
}

int cmd_wireless_oracle(int links, double mu_r, const std::vector<double>& mu_ks, int draws,
                        const std::string& calibration, std::uint64_t seed,
                        const std::string& out_path) {
    informed::WirelessInstance instance;
    instance.links = links;
    instance.mu_real = mu_r;
    instance.n_y = 0;
    instance.n_g = 0;
    instance.n_t = draws;
    instance.seed = seed;
    if (calibration == "matched") {
        instance.apply_matched_calibration();
    } else if (calibration != "default") {
        throw std::invalid_argument("calibration must be 'default' or 'matched'");
    }
    informed::WirelessData data = informed::wireless_generate(instance);

    nlohmann::json doc;
    doc["links"] = links;
    doc["mu_real"] = mu_r;
    doc["draws"] = draws;
    doc["calibration"] = calibration;
    doc["direct_power"] = instance.direct_power;
    doc["cross_power"] = instance.cross_power;
    doc["noise_power"] = instance.noise_power;
    nlohmann::json accs = nlohmann::json::object();
    for (double mu_k : mu_ks) {
        const double acc = informed::knowledge_only_accuracy(data.csi, data.test_labels,
                                                             mu_k, instance.noise_power);
        char key[32];
        std::snprintf(key, sizeof(key), "%g", mu_k);
        accs[key] = acc;
        std::printf("mu_K = %-4g -> knowledge-only accuracy %.2f%%\n", mu_k, 100.0 * acc);
    }
    doc["knowledge_only_accuracy"] = accs;
    if (!out_path.empty()) write_text(out_path, doc.dump(2));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-informed training of wide ReLU networks"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    int workers = 0;
    bool artifacts = false;

    auto* train = app.add_subcommand("train", "Run a single configured training run");
    train->add_option("--config", config_path, "Experiment config JSON")->required();
    train->add_option("--out", out_path, "Output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Run the full lambda/beta/seed grid");
    sweep->add_option("--config", config_path, "Experiment config JSON")->required();
    sweep->add_option("--out", out_path, "Output directory")->required();
    sweep->add_option("--workers", workers, "Concurrent runs");
    sweep->add_flag("--artifacts", artifacts, "Dump per-run networks and datasets");

    auto* phinet = app.add_subcommand("phi-net", "Build and inspect the phi-net partition");
    phinet->add_option("--config", config_path, "Experiment config JSON")->required();
    phinet->add_option("--out", out_path, "Partition JSON dump path");

    auto* imper = app.add_subcommand("imperfectness", "Estimate Q_K and the Q_R(beta) sweep");
    imper->add_option("--config", config_path, "Experiment config JSON")->required();
    imper->add_option("--out", out_path, "Report JSON path");

    double epsilon = 0.0, qk = 0.0, qr = 0.0;
    auto* advise = app.add_subcommand("advise", "Hyper-parameter and sampling advice");
    advise->add_option("--epsilon", epsilon, "Population risk target is sqrt(epsilon)")->required();
    advise->add_option("--qk", qk, "Knowledge imperfectness Q_K")->required();
    advise->add_option("--qr", qr, "Regularized label imperfectness Q_R(beta*)")->required();
    advise->add_option("--out", out_path, "Decision JSON path");

    int links = 4, draws = 10000;
    double mu_r = 0.5;
    std::vector<double> mu_ks{1.0, 0.4, 0.1};
    std::string calibration = "default";
    std::uint64_t oracle_seed = 1;
    auto* oracle = app.add_subcommand("wireless-oracle", "Knowledge-only scheduling accuracy");
    oracle->add_option("--links", links, "Link count N");
    oracle->add_option("--mu-r", mu_r, "Pseudo-real rate factor");
    oracle->add_option("--mu-k", mu_ks, "Knowledge rate factors");
    oracle->add_option("--draws", draws, "Test draws");
    oracle->add_option("--calibration", calibration, "'default' or 'matched'");
    oracle->add_option("--seed", oracle_seed, "RNG seed");
    oracle->add_option("--out", out_path, "Report JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, out_path);
        if (sweep->parsed()) return cmd_sweep(config_path, out_path, workers, artifacts);
        if (phinet->parsed()) return cmd_phi_net(config_path, out_path);
        if (imper->parsed()) return cmd_imperfectness(config_path, out_path);
        if (advise->parsed()) return cmd_advise(epsilon, qk, qr, out_path);
        if (oracle->parsed()) {
            return cmd_wireless_oracle(links, mu_r, mu_ks, draws, calibration, oracle_seed,
                                       out_path);
        }
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
