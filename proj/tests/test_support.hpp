#pragma once

// Test-side oracles, independent of the library's gradient and solver paths:
// finite-difference gradients through the forward pass only, brute-force
// geometric scans, and direct summations.

#include <functional>
#include <random>
#include <vector>

#include "informed/network.hpp"
#include "informed/risks.hpp"

namespace informed::testing {

inline std::vector<Matrix*> weight_list(Network& net) {
    std::vector<Matrix*> mats{&net.w0};
    for (auto& layer : net.w) mats.push_back(&layer);
    mats.push_back(&net.v);
    return mats;
}

inline std::vector<const Matrix*> weight_list(const Network& net) {
    std::vector<const Matrix*> mats{&net.w0};
    for (const auto& layer : net.w) mats.push_back(&layer);
    mats.push_back(&net.v);
    return mats;
}

/// Central finite differences of a scalar function of the weights, taken
/// coordinate by coordinate with the given step.
inline NetworkGradient finite_difference_gradient(Network net,
                                                  const std::function<double(const Network&)>& f,
                                                  double step = 1e-5) {
    NetworkGradient grad = NetworkGradient::zeros_like(net);
    std::vector<Matrix*> mats = weight_list(net);
    std::vector<Matrix*> grads{&grad.w0};
    for (auto& layer : grad.w) grads.push_back(&layer);
    grads.push_back(&grad.v);
    for (std::size_t m = 0; m < mats.size(); ++m) {
        Matrix& weights = *mats[m];
        Matrix& out = *grads[m];
        for (Eigen::Index r = 0; r < weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < weights.cols(); ++c) {
                const double saved = weights(r, c);
                weights(r, c) = saved + step;
                const double plus = f(net);
                weights(r, c) = saved - step;
                const double minus = f(net);
                weights(r, c) = saved;
                out(r, c) = (plus - minus) / (2.0 * step);
            }
        }
    }
    return grad;
}

/// max_i |a_i - b_i| / max(1, |a_i| + |b_i|) over all weight coordinates.
inline double max_relative_error(const NetworkGradient& a, const NetworkGradient& b) {
    double worst = 0.0;
    const auto compare = [&](const Matrix& x, const Matrix& y) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double denom = std::max(1.0, std::abs(x(r, c)) + std::abs(y(r, c)));
                worst = std::max(worst, std::abs(x(r, c) - y(r, c)) / denom);
            }
        }
    };
    compare(a.w0, b.w0);
    for (std::size_t l = 0; l < a.w.size(); ++l) compare(a.w[l], b.w[l]);
    compare(a.v, b.v);
    return worst;
}

/// True when any pre-activation magnitude over the batch falls below the
/// kink guard (finite differences are unreliable across a ReLU kink).
inline bool near_relu_kink(const Network& net, const Matrix& inputs, double guard = 1e-6) {
    BatchCache cache = forward_batch(net, inputs);
    for (const auto& pre : cache.pre) {
        if ((pre.array().abs() < guard).any()) return true;
    }
    return false;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                            double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Matrix out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = dist(rng);
    }
    return out;
}

inline Vector random_vector(Eigen::Index size, std::mt19937_64& rng, double scale = 1.0) {
    return random_matrix(size, 1, rng, scale).col(0);
}

}  // namespace informed::testing
