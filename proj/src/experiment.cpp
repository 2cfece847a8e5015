#include "informed/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "informed/effective_labels.hpp"
#include "informed/smooth_sets.hpp"

namespace informed {

namespace {

using nlohmann::json;

std::string fmt17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void require_keys(const json& obj, const std::string& path,
                  const std::vector<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const auto& key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::invalid_argument("config: unknown key '" + path + item.key() + "'");
        }
    }
}

std::vector<double> parse_grid(const json& arr, const std::string& name) {
    std::vector<double> grid;
    for (const auto& value : arr) {
        const double x = value.get<double>();
        if (x < 0.0 || x > 1.0) {
            throw std::invalid_argument("config: " + name + " value outside [0,1]");
        }
        grid.push_back(x);
    }
    return grid;
}

TrainConfig parse_train(const json& obj) {
    require_keys(obj, "train.",
                 {"optimizer", "eta", "adam_lr", "adam_schedule", "steps", "batch_size",
                  "record_every", "plateau_window", "plateau_rel_tol"});
    TrainConfig config;
    if (obj.contains("optimizer")) {
        const std::string name = obj["optimizer"].get<std::string>();
        if (name == "gd") {
            config.optimizer = OptimizerKind::Gd;
        } else if (name == "adam") {
            config.optimizer = OptimizerKind::Adam;
        } else {
            throw std::invalid_argument("config: train.optimizer must be 'gd' or 'adam'");
        }
    }
    if (obj.contains("eta")) config.eta = obj["eta"].get<double>();
    if (obj.contains("adam_lr")) config.adam_lr = obj["adam_lr"].get<double>();
    if (obj.contains("adam_schedule")) {
        for (const auto& seg : obj["adam_schedule"]) {
            require_keys(seg, "train.adam_schedule[].", {"until_step", "rate"});
            config.adam_schedule.push_back(
                {seg.at("until_step").get<int>(), seg.at("rate").get<double>()});
        }
    }
    config.steps = obj.at("steps").get<int>();
    if (obj.contains("batch_size")) config.batch_size = obj["batch_size"].get<int>();
    if (obj.contains("record_every")) config.record_every = obj["record_every"].get<int>();
    if (obj.contains("plateau_window") || obj.contains("plateau_rel_tol")) {
        PlateauStop stop;
        if (obj.contains("plateau_window")) stop.window = obj["plateau_window"].get<int>();
        if (obj.contains("plateau_rel_tol")) stop.rel_tol = obj["plateau_rel_tol"].get<double>();
        config.plateau = stop;
    }
    validate_config(config);
    return config;
}

void parse_instance(const json& obj, ExperimentConfig& config) {
    switch (config.benchmark) {
        case BenchmarkKind::Bohachevsky: {
            require_keys(obj, "instance.",
                         {"dim", "c", "lb", "ub", "sigma_z_sq", "n_z", "n_g", "n_t"});
            auto& inst = config.bohachevsky;
            if (obj.contains("dim")) inst.dim = obj["dim"].get<int>();
            if (obj.contains("c")) inst.c = obj["c"].get<double>();
            if (obj.contains("lb")) inst.lb = obj["lb"].get<double>();
            if (obj.contains("ub")) inst.ub = obj["ub"].get<double>();
            if (obj.contains("sigma_z_sq")) inst.sigma_z_sq = obj["sigma_z_sq"].get<double>();
            if (obj.contains("n_z")) inst.n_z = obj["n_z"].get<int>();
            if (obj.contains("n_g")) inst.n_g = obj["n_g"].get<int>();
            if (obj.contains("n_t")) inst.n_t = obj["n_t"].get<int>();
            break;
        }
        case BenchmarkKind::Wireless: {
            require_keys(obj, "instance.",
                         {"links", "noise_power", "direct_power", "cross_power", "mu_real",
                          "mu_knowledge", "temperature", "n_y", "n_g", "n_t", "calibration"});
            auto& inst = config.wireless;
            if (obj.contains("links")) inst.links = obj["links"].get<int>();
            if (obj.contains("noise_power")) inst.noise_power = obj["noise_power"].get<double>();
            if (obj.contains("direct_power")) inst.direct_power = obj["direct_power"].get<double>();
            if (obj.contains("cross_power")) inst.cross_power = obj["cross_power"].get<double>();
            if (obj.contains("mu_real")) inst.mu_real = obj["mu_real"].get<double>();
            if (obj.contains("mu_knowledge")) inst.mu_knowledge = obj["mu_knowledge"].get<double>();
            if (obj.contains("temperature")) inst.temperature = obj["temperature"].get<double>();
            if (obj.contains("n_y")) inst.n_y = obj["n_y"].get<int>();
            if (obj.contains("n_g")) inst.n_g = obj["n_g"].get<int>();
            if (obj.contains("n_t")) inst.n_t = obj["n_t"].get<int>();
            if (obj.contains("calibration")) {
                const std::string mode = obj["calibration"].get<std::string>();
                if (mode == "matched") {
                    inst.apply_matched_calibration();
                } else if (mode != "default") {
                    throw std::invalid_argument("config: calibration must be 'default' or 'matched'");
                }
            }
            break;
        }
        case BenchmarkKind::SyntheticQuadratic: {
            require_keys(obj, "instance.",
                         {"dim", "n_pairs", "target_scale", "label_noise", "teacher_noise", "n_t"});
            auto& inst = config.synthetic;
            if (obj.contains("dim")) inst.dim = obj["dim"].get<int>();
            if (obj.contains("n_pairs")) inst.n_pairs = obj["n_pairs"].get<int>();
            if (obj.contains("target_scale")) inst.target_scale = obj["target_scale"].get<double>();
            if (obj.contains("label_noise")) inst.label_noise = obj["label_noise"].get<double>();
            if (obj.contains("teacher_noise")) inst.teacher_noise = obj["teacher_noise"].get<double>();
            if (obj.contains("n_t")) inst.n_t = obj["n_t"].get<int>();
            break;
        }
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (lambda_grid.empty()) throw std::invalid_argument("config: lambda_grid must be nonempty");
    for (double l : lambda_grid) {
        if (l < 0.0 || l > 1.0) throw std::invalid_argument("config: lambda outside [0,1]");
    }
    for (double b : beta_grid) {
        if (b < 0.0 || b > 1.0) throw std::invalid_argument("config: beta outside [0,1]");
    }
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    if (!(phi > 0.0)) throw std::invalid_argument("config: phi must be positive");
    if (network.width < 1 || network.hidden_layers < 1) {
        throw std::invalid_argument("config: bad network shape");
    }
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    validate_config(train);
}

ExperimentConfig parse_config_text(const std::string& text) {
    json doc = json::parse(text);
    require_keys(doc, "",
                 {"benchmark", "objective", "lambda_grid", "beta_grid", "phi", "network", "train",
                  "instance", "seeds", "compute_gap", "workers"});
    ExperimentConfig config;
    const std::string bench = doc.at("benchmark").get<std::string>();
    if (bench == "bohachevsky") {
        config.benchmark = BenchmarkKind::Bohachevsky;
    } else if (bench == "wireless") {
        config.benchmark = BenchmarkKind::Wireless;
    } else if (bench == "synthetic-quadratic") {
        config.benchmark = BenchmarkKind::SyntheticQuadratic;
    } else {
        throw std::invalid_argument("config: unknown benchmark '" + bench + "'");
    }
    if (doc.contains("objective")) {
        const std::string name = doc["objective"].get<std::string>();
        if (name == "eq1") {
            config.objective = ObjectiveKind::Eq1;
        } else if (name == "eq3") {
            config.objective = ObjectiveKind::Eq3;
        } else {
            throw std::invalid_argument("config: objective must be 'eq1' or 'eq3'");
        }
    }
    if (doc.contains("lambda_grid")) config.lambda_grid = parse_grid(doc["lambda_grid"], "lambda");
    if (doc.contains("beta_grid")) config.beta_grid = parse_grid(doc["beta_grid"], "beta");
    if (doc.contains("phi")) config.phi = doc["phi"].get<double>();
    if (doc.contains("network")) {
        require_keys(doc["network"], "network.", {"width", "hidden_layers"});
        if (doc["network"].contains("width")) config.network.width = doc["network"]["width"].get<int>();
        if (doc["network"].contains("hidden_layers")) {
            config.network.hidden_layers = doc["network"]["hidden_layers"].get<int>();
        }
    }
    config.train = parse_train(doc.at("train"));
    if (doc.contains("instance")) parse_instance(doc["instance"], config);
    if (doc.contains("seeds")) {
        config.seeds.clear();
        for (const auto& s : doc["seeds"]) config.seeds.push_back(s.get<std::uint64_t>());
    }
    if (doc.contains("compute_gap")) config.compute_gap = doc["compute_gap"].get<bool>();
    if (doc.contains("workers")) config.workers = doc["workers"].get<int>();
    config.validate();
    return config;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

std::string config_to_json(const ExperimentConfig& config) {
    json doc;
    doc["benchmark"] = config.benchmark == BenchmarkKind::Bohachevsky       ? "bohachevsky"
                       : config.benchmark == BenchmarkKind::Wireless        ? "wireless"
                                                                            : "synthetic-quadratic";
    doc["objective"] = config.objective == ObjectiveKind::Eq1 ? "eq1" : "eq3";
    doc["lambda_grid"] = config.lambda_grid;
    doc["beta_grid"] = config.beta_grid;
    doc["phi"] = config.phi;
    doc["network"] = {{"width", config.network.width},
                      {"hidden_layers", config.network.hidden_layers}};
    json train;
    train["optimizer"] = config.train.optimizer == OptimizerKind::Gd ? "gd" : "adam";
    train["eta"] = config.train.eta;
    train["adam_lr"] = config.train.adam_lr;
    if (!config.train.adam_schedule.empty()) {
        json sched = json::array();
        for (const auto& seg : config.train.adam_schedule) {
            sched.push_back({{"until_step", seg.until_step}, {"rate", seg.rate}});
        }
        train["adam_schedule"] = sched;
    }
    train["steps"] = config.train.steps;
    train["batch_size"] = config.train.batch_size;
    train["record_every"] = config.train.record_every;
    doc["train"] = train;
    doc["seeds"] = config.seeds;
    doc["compute_gap"] = config.compute_gap;
    doc["workers"] = config.workers;
    json instance;
    switch (config.benchmark) {
        case BenchmarkKind::Bohachevsky:
            instance = json::parse(bohachevsky_metadata_json(config.bohachevsky));
            break;
        case BenchmarkKind::Wireless:
            instance = json::parse(wireless_metadata_json(config.wireless));
            break;
        case BenchmarkKind::SyntheticQuadratic:
            instance = {{"dim", config.synthetic.dim},
                        {"n_pairs", config.synthetic.n_pairs},
                        {"target_scale", config.synthetic.target_scale},
                        {"label_noise", config.synthetic.label_noise},
                        {"teacher_noise", config.synthetic.teacher_noise},
                        {"n_t", config.synthetic.n_t}};
            break;
    }
    doc["instance"] = instance;
    return doc.dump(2);
}

namespace {

struct RunPlan {
    std::size_t row_index;
    std::size_t lambda_index;
    std::size_t beta_index;
    std::size_t seed_index;
};

std::vector<Label> scalar_labels(const Vector& values) {
    std::vector<Label> labels;
    labels.reserve(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        labels.emplace_back(Vector::Constant(1, values[i]));
    }
    return labels;
}

std::vector<Label> class_labels(const std::vector<int>& indices) {
    std::vector<Label> labels;
    labels.reserve(indices.size());
    for (int idx : indices) labels.emplace_back(ClassLabel{idx});
    return labels;
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed_entry) {
    const std::uint64_t dataset_seed = hash_combine(seed_entry, 0xda7a);
    PreparedData data;
    switch (config.benchmark) {
        case BenchmarkKind::Bohachevsky: {
            BohachevskyInstance inst = config.bohachevsky;
            inst.seed = dataset_seed;
            inst.finalize_defaults();
            BohachevskyData gen = bohachevsky_generate(inst);
            data.labeled = std::move(gen.labeled);
            data.knowledge = std::move(gen.knowledge);
            data.test_inputs = std::move(gen.test_inputs);
            data.test_truth = std::move(gen.test_truth);
            data.labeled_truth = scalar_labels(gen.labeled_truth);
            data.knowledge_truth = scalar_labels(gen.knowledge_truth);
            data.spec.label_risk = LabelRiskKind::HalfSquaredError;
            data.spec.knowledge_risk = KnowledgeRiskKind::ConstraintRelu;
            data.input_dim = inst.dim;
            data.output_dim = 1;
            break;
        }
        case BenchmarkKind::Wireless: {
            WirelessInstance inst = config.wireless;
            inst.seed = dataset_seed;
            WirelessData gen = wireless_generate(inst);
            data.labeled = std::move(gen.labeled);
            data.knowledge = std::move(gen.knowledge);
            data.test_inputs = std::move(gen.test_inputs);
            data.test_labels = std::move(gen.test_labels);
            data.test_csi.assign(gen.csi.end() - inst.n_t, gen.csi.end());
            data.labeled_truth = class_labels(gen.labeled_indices);
            data.knowledge_truth = class_labels(gen.knowledge_truth);
            data.spec.label_risk = LabelRiskKind::SoftmaxCrossEntropyOnehot;
            data.spec.knowledge_risk = KnowledgeRiskKind::SoftmaxCrossEntropySoft;
            data.spec.temperature = inst.temperature;
            data.input_dim = inst.links * inst.links;
            data.output_dim = inst.decision_count();
            data.mu_real = inst.mu_real;
            data.noise_power = inst.noise_power;
            break;
        }
        case BenchmarkKind::SyntheticQuadratic: {
            SyntheticQuadraticInstance inst = config.synthetic;
            inst.seed = dataset_seed;
            SyntheticQuadraticData gen = synthetic_quadratic_generate(inst);
            data.labeled = std::move(gen.labeled);
            data.knowledge = std::move(gen.knowledge);
            data.test_inputs = std::move(gen.test_inputs);
            data.test_truth = std::move(gen.test_truth);
            data.labeled_truth = scalar_labels(gen.labeled_truth);
            data.knowledge_truth = scalar_labels(gen.knowledge_truth);
            data.spec.label_risk = LabelRiskKind::HalfSquaredError;
            data.spec.knowledge_risk = KnowledgeRiskKind::HalfSquaredToTeacher;
            data.input_dim = inst.dim;
            data.output_dim = 1;
            break;
        }
    }
    return data;
}

void save_datasets(const ExperimentConfig& config, const PreparedData& data,
                   const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const int b = data.input_dim;
    std::vector<std::string> xcols;
    for (int r = 0; r < b; ++r) xcols.push_back("x" + std::to_string(r));

    const auto with = [&](std::initializer_list<std::string> extra) {
        std::vector<std::string> header = xcols;
        header.insert(header.end(), extra.begin(), extra.end());
        return header;
    };

    switch (config.benchmark) {
        case BenchmarkKind::Bohachevsky:
        case BenchmarkKind::SyntheticQuadratic: {
            Matrix labeled(data.labeled.size(), b + 1);
            for (int i = 0; i < data.labeled.size(); ++i) {
                labeled.row(i).head(b) = data.labeled.inputs.col(i).transpose();
                labeled(i, b) = std::get<Vector>(data.labeled.labels[static_cast<std::size_t>(i)])[0];
            }
            save_csv(dir + "/labeled.csv", with({"z"}), labeled);

            const bool bounds = config.benchmark == BenchmarkKind::Bohachevsky;
            Matrix knowledge(data.knowledge.size(), b + (bounds ? 2 : 1));
            for (int i = 0; i < data.knowledge.size(); ++i) {
                knowledge.row(i).head(b) = data.knowledge.inputs.col(i).transpose();
                if (bounds) {
                    const auto& payload =
                        std::get<Bounds>(data.knowledge.payloads[static_cast<std::size_t>(i)]);
                    knowledge(i, b) = payload.lower[0];
                    knowledge(i, b + 1) = payload.upper[0];
                } else {
                    knowledge(i, b) =
                        std::get<Teacher>(data.knowledge.payloads[static_cast<std::size_t>(i)]).value[0];
                }
            }
            save_csv(dir + "/knowledge.csv", bounds ? with({"g_lb", "g_ub"}) : with({"g"}),
                     knowledge);

            Matrix test(data.test_inputs.cols(), b + 1);
            for (Eigen::Index i = 0; i < data.test_inputs.cols(); ++i) {
                test.row(i).head(b) = data.test_inputs.col(i).transpose();
                test(i, b) = data.test_truth[i];
            }
            save_csv(dir + "/test.csv", with({"y"}), test);
            break;
        }
        case BenchmarkKind::Wireless: {
            Matrix labeled(data.labeled.size(), b + 1);
            for (int i = 0; i < data.labeled.size(); ++i) {
                labeled.row(i).head(b) = data.labeled.inputs.col(i).transpose();
                labeled(i, b) =
                    std::get<ClassLabel>(data.labeled.labels[static_cast<std::size_t>(i)]).index;
            }
            save_csv(dir + "/labeled.csv", with({"decision_index"}), labeled);

            const int d = data.output_dim;
            Matrix knowledge(data.knowledge.size(), b + d);
            std::vector<std::string> kcols = xcols;
            for (int j = 0; j < d; ++j) kcols.push_back("c" + std::to_string(j));
            for (int i = 0; i < data.knowledge.size(); ++i) {
                knowledge.row(i).head(b) = data.knowledge.inputs.col(i).transpose();
                knowledge.row(i).tail(d) =
                    std::get<RateVector>(data.knowledge.payloads[static_cast<std::size_t>(i)])
                        .value.transpose();
            }
            save_csv(dir + "/knowledge.csv", kcols, knowledge);

            Matrix test(data.test_inputs.cols(), b + 1);
            for (Eigen::Index i = 0; i < data.test_inputs.cols(); ++i) {
                test.row(i).head(b) = data.test_inputs.col(i).transpose();
                test(i, b) = data.test_labels[static_cast<std::size_t>(i)];
            }
            save_csv(dir + "/test.csv", with({"decision_index"}), test);
            break;
        }
    }
    std::ofstream meta(dir + "/instance.json");
    switch (config.benchmark) {
        case BenchmarkKind::Bohachevsky: {
            BohachevskyInstance inst = config.bohachevsky;
            inst.finalize_defaults();
            meta << bohachevsky_metadata_json(inst);
            break;
        }
        case BenchmarkKind::Wireless:
            meta << wireless_metadata_json(config.wireless);
            break;
        case BenchmarkKind::SyntheticQuadratic: {
            json doc;
            doc["benchmark"] = "synthetic-quadratic";
            doc["dim"] = config.synthetic.dim;
            doc["n_pairs"] = config.synthetic.n_pairs;
            doc["target_scale"] = config.synthetic.target_scale;
            doc["label_noise"] = config.synthetic.label_noise;
            doc["teacher_noise"] = config.synthetic.teacher_noise;
            doc["n_t"] = config.synthetic.n_t;
            meta << doc.dump(2);
            break;
        }
    }
}

namespace {

ResultRow execute_run(const ExperimentConfig& config, const RunPlan& plan,
                      const std::string& artifact_dir) {
    const auto started = std::chrono::steady_clock::now();
    const double lambda = config.lambda_grid[plan.lambda_index];
    const double beta = plan.beta_index < config.beta_grid.size()
                            ? config.beta_grid[plan.beta_index]
                            : 0.0;
    const std::uint64_t seed_entry = config.seeds[plan.seed_index];

    ResultRow row;
    row.benchmark = config.benchmark == BenchmarkKind::Bohachevsky       ? "bohachevsky"
                    : config.benchmark == BenchmarkKind::Wireless        ? "wireless"
                                                                         : "synthetic-quadratic";
    row.objective = config.objective == ObjectiveKind::Eq1 ? "eq1" : "eq3";
    row.seed = seed_entry;
    row.run_seed = hash_combine(hash_combine(hash_combine(seed_entry, 0x5eed),
                                             static_cast<std::uint64_t>(plan.lambda_index)),
                                static_cast<std::uint64_t>(plan.beta_index));
    row.lambda = lambda;
    row.beta = beta;

    try {
        PreparedData data = prepare_data(config, seed_entry);
        SmoothSetPartition partition =
            build_partition(data.labeled.inputs, data.knowledge.inputs, config.phi);
        ObjectiveWeights weights =
            config.objective == ObjectiveKind::Eq1
                ? eq1_weights(lambda, data.labeled.size(), data.knowledge.size())
                : eq3_weights(lambda, beta, data.labeled.size(), data.knowledge.size(),
                              partition.g_prime, partition.g_double_prime);

        Network net = init_network(data.input_dim, config.network.width,
                                   config.network.hidden_layers, data.output_dim, row.run_seed);
        InformedObjective objective(data.labeled, data.knowledge, data.spec, weights);
        TrainConfig train_config = config.train;
        train_config.seed = row.run_seed;
        TrainResult trained = train(std::move(net), objective, train_config);
        row.final_objective = trained.history.back().objective;

        switch (config.benchmark) {
            case BenchmarkKind::Bohachevsky:
            case BenchmarkKind::SyntheticQuadratic:
                row.test_mse = test_mse(trained.net, data.test_inputs, data.test_truth);
                break;
            case BenchmarkKind::Wireless: {
                const Matrix outputs = evaluate_batch(trained.net, data.test_inputs);
                std::vector<int> predicted(static_cast<std::size_t>(outputs.cols()));
                for (Eigen::Index i = 0; i < outputs.cols(); ++i) {
                    Eigen::Index best = 0;
                    outputs.col(i).maxCoeff(&best);
                    predicted[static_cast<std::size_t>(i)] = static_cast<int>(best);
                }
                AccuracySumRate eval = test_accuracy_and_sumrate(
                    predicted, data.test_csi, data.test_labels, data.mu_real, data.noise_power);
                row.test_accuracy = eval.accuracy;
                row.test_sum_rate = eval.mean_sum_rate;
                break;
            }
        }
        std::string table_json;
        if (config.compute_gap) {
            attach_mass(partition, weights);
            EffectiveLabelTable table = effective_risk_table(
                partition, data.labeled, data.knowledge, weights, data.spec, data.output_dim);
            row.convergence_gap = convergence_gap(trained.net, partition, table, data.labeled,
                                                  data.knowledge, weights);
            table_json = table_to_json(table);
        }
        if (!artifact_dir.empty()) {
            namespace fs = std::filesystem;
            fs::path dir = fs::path(artifact_dir) / ("run_" + std::to_string(plan.row_index));
            fs::create_directories(dir);
            save_network(trained.net, (dir / "network.json").string());
            std::ofstream history(dir / "history.csv");
            history << history_to_csv(trained.history);
            if (!table_json.empty()) {
                std::ofstream table_out(dir / "effective_labels.json");
                table_out << table_json;
            }
        }
    } catch (const std::exception& err) {
        std::string reason = err.what();
        for (auto& ch : reason) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        row.status = reason;
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return row;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const std::string& artifact_dir) {
    config.validate();
    if (!artifact_dir.empty()) {
        for (std::size_t si = 0; si < config.seeds.size(); ++si) {
            save_datasets(config, prepare_data(config, config.seeds[si]),
                          artifact_dir + "/seed_" + std::to_string(si));
        }
    }
    const std::size_t beta_count = config.beta_grid.empty() ? 1 : config.beta_grid.size();
    std::vector<RunPlan> plans;
    std::size_t row_index = 0;
    for (std::size_t li = 0; li < config.lambda_grid.size(); ++li) {
        for (std::size_t bi = 0; bi < beta_count; ++bi) {
            for (std::size_t si = 0; si < config.seeds.size(); ++si) {
                plans.push_back({row_index++, li, bi, si});
            }
        }
    }
    std::vector<ResultRow> rows(plans.size());
    const int worker_count = std::max(1, std::min<int>(config.workers,
                                                       static_cast<int>(plans.size())));
    if (worker_count == 1) {
        for (const auto& plan : plans) {
            rows[plan.row_index] = execute_run(config, plan, artifact_dir);
        }
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                const std::size_t index = next.fetch_add(1);
                if (index >= plans.size()) break;
                rows[plans[index].row_index] = execute_run(config, plans[index], artifact_dir);
            }
        });
    }
    for (auto& worker : workers) worker.join();
    return rows;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "benchmark,objective,seed,run_seed,lambda,beta,final_objective,test_mse,"
           "test_accuracy,test_sum_rate,convergence_gap,q_k,q_r,status\n";
    const auto opt = [](const std::optional<double>& value) {
        return value ? fmt17(*value) : std::string();
    };
    for (const auto& row : rows) {
        out << row.benchmark << ',' << row.objective << ',' << row.seed << ',' << row.run_seed
            << ',' << fmt17(row.lambda) << ',' << fmt17(row.beta) << ','
            << fmt17(row.final_objective) << ',' << opt(row.test_mse) << ','
            << opt(row.test_accuracy) << ',' << opt(row.test_sum_rate) << ','
            << opt(row.convergence_gap) << ',' << opt(row.q_k) << ',' << opt(row.q_r) << ','
            << row.status << '\n';
    }
    return out.str();
}

namespace {

struct Stat {
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
};

Stat stat_of(const std::vector<double>& values) {
    Stat s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / values.size();
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (values.size() - 1.0));
    }
    return s;
}

void add_stat(json& point, const char* name,
              const std::vector<ResultRow>& rows,
              const std::vector<std::size_t>& members,
              const std::function<std::optional<double>(const ResultRow&)>& pick) {
    std::vector<double> values;
    for (std::size_t i : members) {
        if (auto v = pick(rows[i])) values.push_back(*v);
    }
    if (values.empty()) return;
    const Stat s = stat_of(values);
    point[name] = {{"mean", s.mean}, {"std", s.stddev}, {"count", s.count}};
}

}  // namespace

std::string summary_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows) {
    json doc;
    doc["config"] = json::parse(config_to_json(config));
    const std::size_t beta_count = config.beta_grid.empty() ? 1 : config.beta_grid.size();
    json points = json::array();
    double wall_total = 0.0;
    for (const auto& row : rows) wall_total += row.wall_time_s;
    std::size_t index = 0;
    for (std::size_t li = 0; li < config.lambda_grid.size(); ++li) {
        for (std::size_t bi = 0; bi < beta_count; ++bi) {
            std::vector<std::size_t> members;
            for (std::size_t si = 0; si < config.seeds.size(); ++si) {
                members.push_back(index++);
            }
            json point;
            point["lambda"] = config.lambda_grid[li];
            point["beta"] = config.beta_grid.empty() ? 0.0 : config.beta_grid[bi];
            int failures = 0;
            for (std::size_t i : members) {
                if (rows[i].status != "ok") ++failures;
            }
            point["rows"] = static_cast<int>(members.size());
            point["failures"] = failures;
            add_stat(point, "final_objective", rows, members,
                     [](const ResultRow& r) -> std::optional<double> {
                         return r.status == "ok" ? std::optional<double>(r.final_objective)
                                                 : std::nullopt;
                     });
            add_stat(point, "test_mse", rows, members,
                     [](const ResultRow& r) { return r.test_mse; });
            add_stat(point, "test_accuracy", rows, members,
                     [](const ResultRow& r) { return r.test_accuracy; });
            add_stat(point, "test_sum_rate", rows, members,
                     [](const ResultRow& r) { return r.test_sum_rate; });
            add_stat(point, "convergence_gap", rows, members,
                     [](const ResultRow& r) { return r.convergence_gap; });
            points.push_back(point);
        }
    }
    doc["points"] = points;
    doc["wall_time_s"] = wall_total;
    return doc.dump(2);
}

void emit_results(const std::vector<ResultRow>& rows, const ExperimentConfig& config,
                  const std::string& csv_path, const std::string& summary_path) {
    if (rows.empty()) throw std::invalid_argument("emit_results: no rows");
    {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("emit_results: cannot write " + csv_path);
        out << rows_to_csv(rows);
    }
    if (!summary_path.empty()) {
        std::ofstream out(summary_path);
        if (!out) throw std::runtime_error("emit_results: cannot write " + summary_path);
        out << summary_json(config, rows);
    }
}

}  // namespace informed
