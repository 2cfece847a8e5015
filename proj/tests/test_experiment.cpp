#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "informed/benchmarks.hpp"
#include "informed/experiment.hpp"
#include "informed/network.hpp"

using namespace informed;

namespace {

std::string small_config_text() {
    return R"({
        "benchmark": "synthetic-quadratic",
        "objective": "eq1",
        "lambda_grid": [0.0, 0.5],
        "phi": 0.05,
        "network": {"width": 24, "hidden_layers": 1},
        "train": {"optimizer": "gd", "steps": 40, "record_every": 20},
        "instance": {"dim": 4, "n_pairs": 12, "n_t": 20},
        "seeds": [3, 4, 5],
        "compute_gap": true
    })";
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("round trip preserves the fields") {
        ExperimentConfig config = parse_config_text(small_config_text());
        ExperimentConfig copy = parse_config_text(config_to_json(config));
        CHECK(copy.lambda_grid == config.lambda_grid);
        CHECK(copy.seeds == config.seeds);
        CHECK(copy.phi == config.phi);
        CHECK(copy.network.width == config.network.width);
        CHECK(copy.train.steps == config.train.steps);
        CHECK(copy.synthetic.n_pairs == config.synthetic.n_pairs);
    }
    SUBCASE("lambda outside the unit interval rejected") {
        std::string text = small_config_text();
        text.replace(text.find("[0.0, 0.5]"), 10, "[0.0, 1.2]");
        CHECK_THROWS_AS(parse_config_text(text), std::invalid_argument);
    }
    SUBCASE("empty seeds rejected") {
        std::string text = small_config_text();
        text.replace(text.find("[3, 4, 5]"), 9, "[]");
        CHECK_THROWS_AS(parse_config_text(text), std::invalid_argument);
    }
    SUBCASE("unknown keys rejected with their path") {
        std::string text = small_config_text();
        text.replace(text.find("\"phi\""), 5, "\"phie\"");
        CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("phie"),
                             std::invalid_argument);
        text = small_config_text();
        text.replace(text.find("\"n_pairs\""), 9, "\"m_pairs\"");
        CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("instance.m_pairs"),
                             std::invalid_argument);
    }
}

TEST_CASE("sweep rows and determinism") {
    ExperimentConfig config = parse_config_text(small_config_text());

    SUBCASE("row count is the grid product") {
        std::vector<ResultRow> rows = run_experiment(config);
        CHECK(rows.size() == 2 * 1 * 3);  // lambda x beta(default 1) x seeds
        for (const auto& row : rows) {
            CHECK(row.status == "ok");
            CHECK(row.beta == 0.0);  // empty beta grid pins the column to zero
            CHECK(row.test_mse.has_value());
            CHECK(row.convergence_gap.has_value());
        }
    }
    SUBCASE("reruns produce byte-identical csv and workers do not matter") {
        std::vector<ResultRow> a = run_experiment(config);
        std::vector<ResultRow> b = run_experiment(config);
        CHECK(rows_to_csv(a) == rows_to_csv(b));
        ExperimentConfig parallel = config;
        parallel.workers = 2;
        std::vector<ResultRow> c = run_experiment(parallel);
        CHECK(rows_to_csv(a) == rows_to_csv(c));
    }
}

TEST_CASE("csv header is the documented column list") {
    ExperimentConfig config = parse_config_text(small_config_text());
    config.lambda_grid = {0.0};
    config.seeds = {3};
    std::vector<ResultRow> rows = run_experiment(config);
    std::istringstream csv(rows_to_csv(rows));
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "benchmark,objective,seed,run_seed,lambda,beta,final_objective,test_mse,"
          "test_accuracy,test_sum_rate,convergence_gap,q_k,q_r,status");
}

TEST_CASE("summary statistics recompute from the rows") {
    ExperimentConfig config = parse_config_text(small_config_text());
    std::vector<ResultRow> rows = run_experiment(config);
    const nlohmann::json summary = nlohmann::json::parse(summary_json(config, rows));
    REQUIRE(summary.at("points").size() == 2);

    for (std::size_t pi = 0; pi < 2; ++pi) {
        const auto& point = summary.at("points")[pi];
        const double lambda = point.at("lambda").get<double>();
        std::vector<double> values;
        for (const auto& row : rows) {
            if (row.lambda == lambda && row.test_mse) values.push_back(*row.test_mse);
        }
        REQUIRE(values.size() == 3);
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= values.size();
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double stddev = std::sqrt(ss / (values.size() - 1.0));
        CHECK(point.at("test_mse").at("mean").get<double>() == doctest::Approx(mean).epsilon(1e-12));
        CHECK(point.at("test_mse").at("std").get<double>() == doctest::Approx(stddev).epsilon(1e-12));
    }

    SUBCASE("single-seed summary equals the row value") {
        ExperimentConfig single = config;
        single.seeds = {3};
        std::vector<ResultRow> one = run_experiment(single);
        const nlohmann::json s = nlohmann::json::parse(summary_json(single, one));
        CHECK(s.at("points")[0].at("test_mse").at("mean").get<double>() ==
              doctest::Approx(*one[0].test_mse).epsilon(1e-15));
        CHECK(s.at("points")[0].at("test_mse").at("std").get<double>() == 0.0);
    }
}

TEST_CASE("eq3 sweep runs on shared-support data") {
    ExperimentConfig config = parse_config_text(small_config_text());
    config.objective = ObjectiveKind::Eq3;
    config.beta_grid = {0.0, 0.5};
    config.lambda_grid = {0.25};
    config.seeds = {9};
    // Synthetic pairs share inputs, so S_g' is the whole knowledge set and
    // S_g'' is empty: lambda > 0 must fail, lambda = 0 must run.
    std::vector<ResultRow> rows = run_experiment(config);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status != "ok");  // lambda 0.25 needs a nonempty S_g''
    config.lambda_grid = {0.0};
    rows = run_experiment(config);
    CHECK(rows[0].status == "ok");
    CHECK(rows[1].status == "ok");
}

TEST_CASE("row metrics recompute from the persisted artifacts") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "informed_artifacts_test";
    fs::remove_all(dir);

    ExperimentConfig config = parse_config_text(small_config_text());
    config.lambda_grid = {0.5};
    config.seeds = {3};
    std::vector<ResultRow> rows = run_experiment(config, dir.string());
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].status == "ok");

    const Network net = load_network((dir / "run_0" / "network.json").string());
    std::vector<std::string> header;
    const Matrix test_table = load_csv((dir / "seed_0" / "test.csv").string(), &header);
    REQUIRE(header.back() == "y");
    const int b = static_cast<int>(header.size()) - 1;
    Matrix inputs = test_table.leftCols(b).transpose();
    Vector truth = test_table.col(b);
    CHECK(test_mse(net, inputs, truth) == doctest::Approx(*rows[0].test_mse).epsilon(1e-12));

    // History starts at step 0 and ends at the configured step count.
    const Matrix history = load_csv((dir / "run_0" / "history.csv").string(), &header);
    CHECK(header.front() == "step");
    CHECK(history(0, 0) == 0.0);
    CHECK(history(history.rows() - 1, 0) == config.train.steps);
    fs::remove_all(dir);
}

TEST_CASE("wireless training pipeline beats chance") {
    const std::string text = R"({
        "benchmark": "wireless",
        "objective": "eq1",
        "lambda_grid": [0.5],
        "phi": 0.2,
        "network": {"width": 64, "hidden_layers": 1},
        "train": {"optimizer": "adam", "adam_lr": 0.001, "steps": 300,
                   "batch_size": 50, "record_every": 100},
        "instance": {"links": 4, "calibration": "matched",
                      "n_y": 60, "n_g": 120, "n_t": 300},
        "seeds": [21],
        "compute_gap": false
    })";
    ExperimentConfig config = parse_config_text(text);
    std::vector<ResultRow> rows = run_experiment(config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "ok");
    REQUIRE(rows[0].test_accuracy.has_value());
    REQUIRE(rows[0].test_sum_rate.has_value());
    CHECK(*rows[0].test_accuracy > 1.0 / 15.0);  // better than uniform guessing
    CHECK(*rows[0].test_sum_rate > 0.0);
    CHECK(std::isfinite(rows[0].final_objective));
}

TEST_CASE("failed rows carry their reason and leave others intact") {
    ExperimentConfig config = parse_config_text(small_config_text());
    // phi too small for coverage is impossible by construction (net built on
    // the same samples), so force failure via an empty-coefficient conflict.
    config.objective = ObjectiveKind::Eq3;
    config.lambda_grid = {0.5, 0.0};
    config.beta_grid = {1.0};
    config.seeds = {3};
    std::vector<ResultRow> rows = run_experiment(config);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status != "ok");
    CHECK(rows[0].status.find(',') == std::string::npos);
    CHECK(rows[1].status == "ok");
}
