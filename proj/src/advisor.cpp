#include "informed/advisor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace informed {

double beta_lambda(double lambda, int n_g, int n_g_prime) {
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("beta_lambda: lambda outside [0,1]");
    if (n_g_prime < 0 || n_g < n_g_prime) {
        throw std::invalid_argument("beta_lambda: need n_g >= n_g' >= 0");
    }
    const double denom = (1.0 - lambda) * n_g + lambda * n_g_prime;
    if (!(denom > 0.0)) throw std::invalid_argument("beta_lambda: zero denominator");
    return lambda * n_g_prime / denom;
}

AdvisorDecision choose_lambda(double epsilon, double q_k, double q_r_star) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("choose_lambda: epsilon must be positive");
    if (epsilon >= 1.0) throw std::invalid_argument("choose_lambda: epsilon must be below 1");
    if (q_k < 0.0 || q_r_star < 0.0) {
        throw std::invalid_argument("choose_lambda: imperfectness must be nonnegative");
    }
    AdvisorDecision decision;
    decision.epsilon = epsilon;
    decision.q_k = q_k;
    decision.q_r_star = q_r_star;

    const double root = std::sqrt(epsilon);
    if (q_k <= root) {
        decision.which = AdvisorCase::A;
        decision.feasible = true;
        decision.has_lambda = true;
        decision.lambda = 1.0;
        decision.n_z_order = 0.0;
        decision.n_g_order = 1.0 / (epsilon * epsilon - epsilon * epsilon * epsilon);
        return decision;
    }
    const double inf = std::numeric_limits<double>::infinity();
    const double knowledge_term = root / q_k;
    const double label_term = q_r_star > 0.0 ? root / q_r_star : inf;
    if (knowledge_term + label_term >= 1.0) {
        decision.which = AdvisorCase::B;
        decision.feasible = true;
        decision.has_lambda = true;
        decision.lambda = knowledge_term;
        const double gap = 1.0 / epsilon - 1.0 / (root * q_k);
        decision.n_z_order = gap * gap;
        decision.n_g_order = 1.0 / ((epsilon - epsilon * epsilon) * q_k * q_k);
        return decision;
    }
    decision.which = AdvisorCase::C;
    decision.feasible = false;
    return decision;
}

std::string decision_to_json(const AdvisorDecision& decision) {
    nlohmann::json doc;
    doc["epsilon"] = decision.epsilon;
    doc["q_k"] = decision.q_k;
    doc["q_r_star"] = decision.q_r_star;
    doc["case"] = decision.which == AdvisorCase::A ? "a"
                  : decision.which == AdvisorCase::B ? "b"
                                                     : "c";
    doc["feasible"] = decision.feasible;
    if (decision.has_lambda) {
        doc["lambda"] = decision.lambda;
        doc["n_z_order"] = decision.n_z_order;
        doc["n_g_order"] = decision.n_g_order;
    }
    doc["order_of_magnitude_only"] = decision.order_of_magnitude_only;
    return doc.dump(2);
}

}  // namespace informed
