#include <doctest.h>

#include <random>

#include "informed/risks.hpp"
#include "test_support.hpp"

using namespace informed;
namespace nt = informed::testing;

namespace {

// Finite differences of a risk with respect to the network output.
Vector fd_output_grad(const std::function<double(const Vector&)>& f, Vector h, double step = 1e-6) {
    Vector grad(h.size());
    for (Eigen::Index j = 0; j < h.size(); ++j) {
        const double saved = h[j];
        h[j] = saved + step;
        const double plus = f(h);
        h[j] = saved - step;
        const double minus = f(h);
        h[j] = saved;
        grad[j] = (plus - minus) / (2.0 * step);
    }
    return grad;
}

}  // namespace

TEST_CASE("half-squared label risk") {
    RiskSpec spec;
    const Vector z = Vector::Constant(1, 0.0);

    SUBCASE("perfect output") {
        RiskEval eval = label_risk(spec, Vector::Constant(1, 0.0), Label{z});
        CHECK(eval.value == 0.0);
        CHECK(eval.grad.isZero(0.0));
    }
    SUBCASE("unit error") {
        RiskEval eval = label_risk(spec, Vector::Constant(1, 1.0), Label{z});
        CHECK(eval.value == doctest::Approx(0.5));
        CHECK(eval.grad[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("cross-entropy label risk") {
    RiskSpec spec;
    spec.label_risk = LabelRiskKind::SoftmaxCrossEntropyOnehot;

    SUBCASE("invalid class index rejected") {
        CHECK_THROWS_AS(label_risk(spec, Vector::Zero(3), Label{ClassLabel{3}}), std::invalid_argument);
        CHECK_THROWS_AS(label_risk(spec, Vector::Zero(3), Label{ClassLabel{-1}}), std::invalid_argument);
    }
    SUBCASE("gradient matches finite differences") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const Vector h = nt::random_vector(5, rng, 2.0);
            const Label z{ClassLabel{static_cast<int>(rng() % 5)}};
            RiskEval eval = label_risk(spec, h, z);
            const Vector fd = fd_output_grad(
                [&](const Vector& point) { return label_risk(spec, point, z).value; }, h);
            CHECK((eval.grad - fd).cwiseAbs().maxCoeff() < 1e-6);
            CHECK(eval.value >= 0.0);
        }
    }
}

TEST_CASE("constraint-relu knowledge risk") {
    RiskSpec spec;

    SUBCASE("inside the bounds") {
        KnowledgePayload g = Bounds{Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)};
        RiskEval eval = knowledge_risk(spec, Vector::Constant(1, 0.5), g);
        CHECK(eval.value == 0.0);
        CHECK(eval.grad.isZero(0.0));
    }
    SUBCASE("above the upper bound") {
        KnowledgePayload g = Bounds{Vector::Constant(1, 0.0), Vector::Constant(1, 0.4)};
        RiskEval eval = knowledge_risk(spec, Vector::Constant(1, 1.0), g);
        CHECK(eval.value == doctest::Approx(0.6));
        CHECK(eval.grad[0] == doctest::Approx(1.0));
    }
    SUBCASE("crossed bounds rejected") {
        KnowledgePayload g = Bounds{Vector::Constant(1, 1.0), Vector::Constant(1, 0.0)};
        CHECK_THROWS_AS(knowledge_risk(spec, Vector::Zero(1), g), std::invalid_argument);
    }
}

TEST_CASE("teacher and soft-label knowledge risks") {
    std::mt19937_64 rng(13);

    SUBCASE("teacher risk is half squared distance") {
        RiskSpec spec;
        spec.knowledge_risk = KnowledgeRiskKind::HalfSquaredToTeacher;
        const Vector g = nt::random_vector(3, rng);
        RiskEval eval = knowledge_risk(spec, g, KnowledgePayload{Teacher{g}});
        CHECK(eval.value == 0.0);
    }
    SUBCASE("soft-label gradient matches finite differences") {
        RiskSpec spec;
        spec.knowledge_risk = KnowledgeRiskKind::SoftmaxCrossEntropySoft;
        spec.temperature = 2.5;
        for (int trial = 0; trial < 20; ++trial) {
            const Vector h = nt::random_vector(6, rng, 2.0);
            const KnowledgePayload g{RateVector{nt::random_vector(6, rng)}};
            RiskEval eval = knowledge_risk(spec, h, g);
            const Vector fd = fd_output_grad(
                [&](const Vector& point) { return knowledge_risk(spec, point, g).value; }, h);
            CHECK((eval.grad - fd).cwiseAbs().maxCoeff() < 1e-6);
            CHECK(eval.value >= 0.0);
        }
    }
}

namespace {

struct Toy {
    LabeledSet labeled;
    KnowledgeSet knowledge;
    RiskSpec spec;
    Matrix outputs;  // d x (n_z + n_g)
};

Toy make_toy(std::mt19937_64& rng, int n_z, int n_g, int d = 1) {
    Toy toy;
    toy.labeled.inputs = nt::random_matrix(2, n_z, rng);
    for (int i = 0; i < n_z; ++i) toy.labeled.labels.emplace_back(nt::random_vector(d, rng));
    toy.knowledge.inputs = nt::random_matrix(2, n_g, rng);
    for (int i = 0; i < n_g; ++i) {
        toy.knowledge.payloads.emplace_back(Teacher{nt::random_vector(d, rng)});
    }
    toy.spec.knowledge_risk = KnowledgeRiskKind::HalfSquaredToTeacher;
    toy.outputs = nt::random_matrix(d, n_z + n_g, rng);
    return toy;
}

// Direct summation oracle for the weighted objective.
double oracle_weighted(const Toy& toy, const ObjectiveWeights& weights) {
    double total = 0.0;
    const int n_z = toy.labeled.size();
    for (int i = 0; i < n_z + toy.knowledge.size(); ++i) {
        if (i < n_z) {
            total += weights.mu[i] *
                     label_risk(toy.spec, toy.outputs.col(i), toy.labeled.labels[i]).value;
        } else {
            total += weights.lam[i] *
                     knowledge_risk(toy.spec, toy.outputs.col(i), toy.knowledge.payloads[i - n_z]).value;
        }
    }
    return total;
}

}  // namespace

TEST_CASE("informed risk endpoints and toy sum") {
    std::mt19937_64 rng(17);
    Toy toy = make_toy(rng, 2, 2);

    SUBCASE("lambda 0 equals the weighted pure label mean") {
        const double risk = informed_risk(toy.outputs, toy.spec, toy.labeled, toy.knowledge, 0.0);
        double mean = 0.0;
        for (int i = 0; i < 2; ++i) {
            mean += 0.5 * label_risk(toy.spec, toy.outputs.col(i), toy.labeled.labels[i]).value;
        }
        CHECK(risk == mean);  // identical accumulation order: exact
    }
    SUBCASE("lambda 1 equals the weighted pure knowledge mean") {
        const double risk = informed_risk(toy.outputs, toy.spec, toy.labeled, toy.knowledge, 1.0);
        double mean = 0.0;
        for (int i = 0; i < 2; ++i) {
            mean += 0.5 *
                    knowledge_risk(toy.spec, toy.outputs.col(2 + i), toy.knowledge.payloads[i]).value;
        }
        CHECK(risk == mean);
    }
    SUBCASE("lambda 0.5 equals the hand sum") {
        const double risk = informed_risk(toy.outputs, toy.spec, toy.labeled, toy.knowledge, 0.5);
        CHECK(risk == doctest::Approx(oracle_weighted(toy, eq1_weights(0.5, 2, 2))).epsilon(1e-12));
    }
    SUBCASE("emptiness conflicts rejected") {
        LabeledSet empty_z;
        empty_z.inputs.resize(2, 0);
        CHECK_THROWS_AS(informed_risk(toy.outputs.rightCols(2), toy.spec, empty_z, toy.knowledge, 0.5),
                        std::invalid_argument);
        KnowledgeSet empty_g;
        empty_g.inputs.resize(2, 0);
        CHECK_THROWS_AS(informed_risk(toy.outputs.leftCols(2), toy.spec, toy.labeled, empty_g, 0.5),
                        std::invalid_argument);
    }
}

TEST_CASE("weighted form against a direct summation oracle") {
    std::mt19937_64 rng(19);
    Toy toy = make_toy(rng, 5, 7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SUBCASE("random weights match to 1e-12") {
        for (int trial = 0; trial < 10; ++trial) {
            ObjectiveWeights weights;
            weights.mu = Vector::Zero(12);
            weights.lam = Vector::Zero(12);
            for (int i = 0; i < 5; ++i) weights.mu[i] = unit(rng);
            for (int i = 5; i < 12; ++i) weights.lam[i] = unit(rng);
            const double total = weights.mu.sum() + weights.lam.sum();
            weights.mu /= total;
            weights.lam /= total;
            const double risk = weighted_form(toy.outputs, toy.spec, toy.labeled, toy.knowledge, weights);
            CHECK(risk == doctest::Approx(oracle_weighted(toy, weights)).epsilon(1e-12));
            CHECK(risk >= 0.0);
        }
    }
    SUBCASE("eq1 mapping reproduces informed_risk exactly") {
        for (double lambda : {0.0, 0.25, 0.5, 0.9, 1.0}) {
            const double via_weights = weighted_form(toy.outputs, toy.spec, toy.labeled,
                                                     toy.knowledge, eq1_weights(lambda, 5, 7));
            CHECK(via_weights == informed_risk(toy.outputs, toy.spec, toy.labeled, toy.knowledge, lambda));
        }
    }
    SUBCASE("weight-sum violation rejected") {
        ObjectiveWeights weights;
        weights.mu = Vector::Constant(12, 0.2);
        weights.lam = Vector::Zero(12);
        CHECK_THROWS_AS(weighted_form(toy.outputs, toy.spec, toy.labeled, toy.knowledge, weights),
                        std::invalid_argument);
    }
}

TEST_CASE("generalized objective equals the weighted form under the coefficient mapping") {
    std::mt19937_64 rng(23);
    Toy toy = make_toy(rng, 4, 6);
    // Arbitrary disjoint split of the knowledge block (global indices 4..9).
    const std::vector<int> g_prime{4, 6, 7};
    const std::vector<int> g_double_prime{5, 8, 9};

    for (double lambda : {0.0, 0.3, 0.7, 1.0}) {
        for (double beta : {0.0, 0.4, 1.0}) {
            const double direct = generalized_informed_risk(toy.outputs, toy.spec, toy.labeled,
                                                            toy.knowledge, lambda, beta, g_prime,
                                                            g_double_prime);
            const double mapped =
                weighted_form(toy.outputs, toy.spec, toy.labeled, toy.knowledge,
                              eq3_weights(lambda, beta, 4, 6, g_prime, g_double_prime));
            CHECK(direct == mapped);  // exact: same weights, same accumulation
            CHECK(direct == doctest::Approx(oracle_weighted(
                                toy, eq3_weights(lambda, beta, 4, 6, g_prime, g_double_prime)))
                                .epsilon(1e-12));
        }
    }
}

TEST_CASE("generalized objective endpoints") {
    std::mt19937_64 rng(29);
    Toy toy = make_toy(rng, 3, 4);
    const std::vector<int> g_prime{3, 4};
    const std::vector<int> g_double_prime{5, 6};

    SUBCASE("lambda 0 beta 0 is the pure label risk") {
        const double risk = generalized_informed_risk(toy.outputs, toy.spec, toy.labeled,
                                                      toy.knowledge, 0.0, 0.0, g_prime,
                                                      g_double_prime);
        CHECK(risk == informed_risk(toy.outputs, toy.spec, toy.labeled, toy.knowledge, 0.0));
    }
    SUBCASE("lambda 1 beta 1 with empty S_z is the pure knowledge risk over S_g'' = S_g") {
        LabeledSet empty_z;
        empty_z.inputs.resize(2, 0);
        Toy pure = make_toy(rng, 0, 4);
        const std::vector<int> all_pp{0, 1, 2, 3};
        const double risk = generalized_informed_risk(pure.outputs, pure.spec, empty_z,
                                                      pure.knowledge, 1.0, 1.0, {}, all_pp);
        double mean = 0.0;
        for (int i = 0; i < 4; ++i) {
            mean += 0.25 *
                    knowledge_risk(pure.spec, pure.outputs.col(i), pure.knowledge.payloads[i]).value;
        }
        CHECK(risk == mean);
    }
    SUBCASE("coefficient-emptiness conflicts rejected") {
        CHECK_THROWS_AS(generalized_informed_risk(toy.outputs, toy.spec, toy.labeled, toy.knowledge,
                                                  0.5, 0.5, {}, g_double_prime),
                        std::invalid_argument);
    }
}

TEST_CASE("convexity probe for half-squared and constraint risks") {
    std::mt19937_64 rng(31);
    RiskSpec spec;
    for (int trial = 0; trial < 50; ++trial) {
        const Vector a = nt::random_vector(3, rng, 2.0);
        const Vector b = nt::random_vector(3, rng, 2.0);
        const Vector mid = 0.5 * (a + b);

        const Label z{nt::random_vector(3, rng)};
        const double label_mid = label_risk(spec, mid, z).value;
        const double label_avg =
            0.5 * (label_risk(spec, a, z).value + label_risk(spec, b, z).value);
        CHECK(label_mid <= label_avg + 1e-12);

        Vector lo = nt::random_vector(3, rng);
        Vector hi = lo.array() + 0.5;
        const KnowledgePayload g{Bounds{lo, hi}};
        const double know_mid = knowledge_risk(spec, mid, g).value;
        const double know_avg =
            0.5 * (knowledge_risk(spec, a, g).value + knowledge_risk(spec, b, g).value);
        CHECK(know_mid <= know_avg + 1e-12);
    }
}
