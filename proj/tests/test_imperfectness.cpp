#include <doctest.h>

#include <random>

#include "informed/imperfectness.hpp"
#include "test_support.hpp"

using namespace informed;
namespace nt = informed::testing;

namespace {

TrainConfig quick_config(int steps, std::uint64_t seed = 7) {
    TrainConfig config;
    config.optimizer = OptimizerKind::Adam;
    config.adam_lr = 5e-3;
    config.steps = steps;
    config.batch_size = 0;
    config.seed = seed;
    config.record_every = 50;
    return config;
}

}  // namespace

TEST_CASE("fitting a constant teacher drives outputs to it") {
    std::mt19937_64 rng(3);
    KnowledgeSet knowledge;
    knowledge.inputs = nt::random_matrix(3, 40, rng);
    for (int i = 0; i < 40; ++i) knowledge.inputs.col(i).normalize();
    for (int i = 0; i < 40; ++i) {
        knowledge.payloads.emplace_back(Teacher{Vector::Constant(1, 0.8)});
    }
    RiskSpec spec;
    spec.knowledge_risk = KnowledgeRiskKind::HalfSquaredToTeacher;
    TrainConfig config = quick_config(20000);
    config.adam_lr = 1e-2;
    config.plateau = PlateauStop{500, 1e-10};
    HypothesisFit fit = fit_knowledge_hypothesis(knowledge, spec, 128, 1, 1, config);
    const Matrix outputs = evaluate_batch(fit.net, knowledge.inputs);
    for (int i = 0; i < 40; ++i) {
        CHECK(std::abs(outputs(0, i) - 0.8) < 1e-2);
    }
}

TEST_CASE("zero training steps return the initialized network unchanged") {
    std::mt19937_64 rng(5);
    KnowledgeSet knowledge;
    knowledge.inputs = nt::random_matrix(2, 10, rng);
    for (int i = 0; i < 10; ++i) knowledge.payloads.emplace_back(Teacher{Vector::Zero(1)});
    RiskSpec spec;
    spec.knowledge_risk = KnowledgeRiskKind::HalfSquaredToTeacher;
    TrainConfig config = quick_config(0, 11);
    HypothesisFit fit = fit_knowledge_hypothesis(knowledge, spec, 16, 1, 1, config);
    Network reference = init_network(2, 16, 1, 1, 11);
    CHECK(fit.net.w0 == reference.w0);
    CHECK(fit.net.v == reference.v);
}

TEST_CASE("in-bounds constraint knowledge leaves gd fixed") {
    std::mt19937_64 rng(7);
    KnowledgeSet knowledge;
    knowledge.inputs = nt::random_matrix(2, 10, rng);
    for (int i = 0; i < 10; ++i) {
        knowledge.payloads.emplace_back(
            Bounds{Vector::Constant(1, -100.0), Vector::Constant(1, 100.0)});
    }
    RiskSpec spec;  // constraint-relu
    TrainConfig config;
    config.optimizer = OptimizerKind::Gd;
    config.eta = 0.1;
    config.steps = 10;
    config.seed = 13;
    HypothesisFit fit = fit_knowledge_hypothesis(knowledge, spec, 16, 1, 1, config);
    Network reference = init_network(2, 16, 1, 1, 13);
    CHECK(fit.final_risk == 0.0);
    CHECK(fit.net.w0 == reference.w0);
    CHECK(fit.net.w[0] == reference.w[0]);
    CHECK(fit.net.v == reference.v);
}

TEST_CASE("hypothesis label risk") {
    std::mt19937_64 rng(11);
    Network net = init_network(2, 16, 1, 1, 17);
    Matrix inputs = nt::random_matrix(2, 25, rng);
    const Matrix outputs = evaluate_batch(net, inputs);
    RiskSpec spec;

    SUBCASE("zero when the hypothesis matches the truth") {
        std::vector<Label> labels;
        for (int i = 0; i < 25; ++i) labels.emplace_back(Vector::Constant(1, outputs(0, i)));
        CHECK(hypothesis_label_risk(net, inputs, labels, spec) == 0.0);
    }
    SUBCASE("constant offset gives half delta squared") {
        const double delta = 0.3;
        std::vector<Label> labels;
        for (int i = 0; i < 25; ++i) {
            labels.emplace_back(Vector::Constant(1, outputs(0, i) + delta));
        }
        CHECK(hypothesis_label_risk(net, inputs, labels, spec) ==
              doctest::Approx(0.5 * delta * delta).epsilon(1e-12));
    }
    SUBCASE("random labels match a direct loop") {
        std::vector<Label> labels;
        for (int i = 0; i < 25; ++i) labels.emplace_back(nt::random_vector(1, rng));
        double expected = 0.0;
        for (int i = 0; i < 25; ++i) {
            const double err = outputs(0, i) - std::get<Vector>(labels[i])[0];
            expected += 0.5 * err * err;
        }
        expected /= 25.0;
        CHECK(hypothesis_label_risk(net, inputs, labels, spec) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("beta endpoints of the regularized objective") {
    std::mt19937_64 rng(13);
    LabeledSet labeled;
    labeled.inputs = nt::random_matrix(2, 12, rng);
    for (int i = 0; i < 12; ++i) labeled.labels.emplace_back(nt::random_vector(1, rng));
    KnowledgeSet g_prime;
    g_prime.inputs = nt::random_matrix(2, 8, rng);
    for (int i = 0; i < 8; ++i) g_prime.payloads.emplace_back(Teacher{nt::random_vector(1, rng)});
    RiskSpec spec;
    spec.knowledge_risk = KnowledgeRiskKind::HalfSquaredToTeacher;

    SUBCASE("beta 0 equals the pure label objective at initialization") {
        HypothesisFit fit =
            fit_regularized_hypothesis(labeled, g_prime, 0.0, spec, 16, 1, 1, quick_config(0, 5));
        KnowledgeSet empty;
        empty.inputs.resize(2, 0);
        ObjectiveWeights pure;
        pure.mu = Vector::Constant(12, 1.0 / 12);
        pure.lam = Vector::Zero(12);
        InformedObjective reference(labeled, empty, spec, pure);
        CHECK(fit.final_risk == reference.full_value(fit.net));
    }
    SUBCASE("beta 1 trains on knowledge alone") {
        HypothesisFit fit =
            fit_regularized_hypothesis(labeled, g_prime, 1.0, spec, 16, 1, 1, quick_config(0, 5));
        ObjectiveWeights pure;
        pure.mu = Vector::Zero(20);
        pure.lam = Vector::Zero(20);
        pure.lam.tail(8).setConstant(1.0 / 8);
        InformedObjective reference(labeled, g_prime, spec, pure);
        CHECK(fit.final_risk == reference.full_value(fit.net));
    }
    SUBCASE("beta 0.5 improves over the initialization") {
        HypothesisFit init =
            fit_regularized_hypothesis(labeled, g_prime, 0.5, spec, 16, 1, 1, quick_config(0, 5));
        HypothesisFit fit = fit_regularized_hypothesis(labeled, g_prime, 0.5, spec, 16, 1, 1,
                                                       quick_config(400, 5));
        CHECK(fit.final_risk <= init.final_risk);
    }
    SUBCASE("emptiness conflicts rejected") {
        LabeledSet empty_z;
        empty_z.inputs.resize(2, 0);
        CHECK_THROWS_AS(fit_regularized_hypothesis(empty_z, g_prime, 0.5, spec, 16, 1, 1,
                                                   quick_config(10)),
                        std::invalid_argument);
        KnowledgeSet empty_g;
        empty_g.inputs.resize(2, 0);
        CHECK_THROWS_AS(fit_regularized_hypothesis(labeled, empty_g, 0.5, spec, 16, 1, 1,
                                                   quick_config(10)),
                        std::invalid_argument);
    }
}

TEST_CASE("beta sweep bookkeeping") {
    std::mt19937_64 rng(17);
    LabeledSet labeled;
    labeled.inputs = nt::random_matrix(2, 10, rng);
    std::vector<Label> truth;
    for (int i = 0; i < 10; ++i) {
        const Vector y = nt::random_vector(1, rng);
        truth.emplace_back(y);
        labeled.labels.emplace_back(Vector(y.array() + 0.05));
    }
    KnowledgeSet g_prime;
    g_prime.inputs = labeled.inputs;
    for (int i = 0; i < 10; ++i) {
        g_prime.payloads.emplace_back(Teacher{std::get<Vector>(truth[i])});
    }
    RiskSpec spec;
    spec.knowledge_risk = KnowledgeRiskKind::HalfSquaredToTeacher;

    SUBCASE("singleton grid") {
        BetaSweepInput input;
        input.labeled = &labeled;
        input.g_prime = &g_prime;
        input.labeled_truth = &truth;
        input.grid = {0.0};
        ImperfectnessReport report;
        beta_sweep(input, spec, 16, 1, 1, quick_config(50), report);
        CHECK(report.beta_star == 0.0);
        CHECK(report.has_gain);
        CHECK(report.regularization_gain == 0.0);
    }
    SUBCASE("duplicate grid values behave like the deduplicated grid") {
        BetaSweepInput input;
        input.labeled = &labeled;
        input.g_prime = &g_prime;
        input.labeled_truth = &truth;
        input.grid = {0.0, 0.5, 1.0};
        ImperfectnessReport a;
        beta_sweep(input, spec, 16, 1, 1, quick_config(100), a);
        input.grid = {0.0, 0.5, 0.5, 1.0, 1.0};
        ImperfectnessReport b;
        beta_sweep(input, spec, 16, 1, 1, quick_config(100), b);
        CHECK(a.beta_star == b.beta_star);
        CHECK(a.q_r_star == b.q_r_star);
        // Report arithmetic is recomputable from the stored table.
        double best = a.q_r[0];
        for (double v : a.q_r) best = std::min(best, v);
        CHECK(a.q_r_star == best);
        CHECK(a.regularization_gain == a.q_r[0] - a.q_r_star);
    }
    SUBCASE("empty grid rejected") {
        BetaSweepInput input;
        input.labeled = &labeled;
        input.g_prime = &g_prime;
        input.labeled_truth = &truth;
        ImperfectnessReport report;
        CHECK_THROWS_AS(beta_sweep(input, spec, 16, 1, 1, quick_config(10), report),
                        std::invalid_argument);
    }
}

TEST_CASE("knowledge subset extraction") {
    std::mt19937_64 rng(19);
    KnowledgeSet knowledge;
    knowledge.inputs = nt::random_matrix(2, 6, rng);
    for (int i = 0; i < 6; ++i) {
        knowledge.payloads.emplace_back(Teacher{Vector::Constant(1, static_cast<double>(i))});
    }
    const std::vector<int> picks{12, 14, 15};  // global indices with n_labeled = 10
    KnowledgeSet subset = knowledge_subset(knowledge, picks, 10);
    REQUIRE(subset.size() == 3);
    CHECK(std::get<Teacher>(subset.payloads[0]).value[0] == 2.0);
    CHECK(std::get<Teacher>(subset.payloads[1]).value[0] == 4.0);
    CHECK(std::get<Teacher>(subset.payloads[2]).value[0] == 5.0);
    CHECK(subset.inputs.col(1) == knowledge.inputs.col(4));
}
