#pragma once

#include <string>

namespace informed {

/// beta induced by the single-weight objective:
///   lambda n_g' / ((1 - lambda) n_g + lambda n_g').
double beta_lambda(double lambda, int n_g, int n_g_prime);

enum class AdvisorCase { A, B, C };

/// Hyper-parameter and sampling advice for a population-risk target of
/// sqrt(epsilon). The n_z/n_g orders are unit-constant scale factors of the
/// O() expressions; order_of_magnitude_only marks them as such.
struct AdvisorDecision {
    double epsilon = 0.0;
    double q_k = 0.0;
    double q_r_star = 0.0;
    AdvisorCase which = AdvisorCase::C;
    bool feasible = false;
    bool has_lambda = false;
    double lambda = 0.0;
    double n_z_order = 0.0;
    double n_g_order = 0.0;
    bool order_of_magnitude_only = true;
};

/// Case a: q_k <= sqrt(eps) -> lambda 1, n_z 0, n_g ~ 1/(eps^2 - eps^3).
/// Case b: otherwise, if sqrt(eps)/q_k + sqrt(eps)/q_r* >= 1 ->
///   lambda = sqrt(eps)/q_k, n_z ~ (1/eps - 1/(sqrt(eps) q_k))^2,
///   n_g ~ 1/((eps - eps^2) q_k^2).
/// Case c: otherwise infeasible.
AdvisorDecision choose_lambda(double epsilon, double q_k, double q_r_star);

std::string decision_to_json(const AdvisorDecision& decision);

}  // namespace informed
