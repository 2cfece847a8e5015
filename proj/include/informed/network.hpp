#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "informed/linalg.hpp"

namespace informed {

/// Fully-connected ReLU network without bias terms:
///   output(x) = V relu(W[L] relu(... relu(W[1] relu(W0 x)))).
/// W0 maps the input (b) to the width (m), W[1..L] map m to m, and V maps
/// m to the output dimension (d).
struct Network {
    int input_dim = 0;      // b
    int width = 0;          // m
    int hidden_layers = 0;  // L, count of the m->m maps after W0
    int output_dim = 0;     // d
    std::uint64_t seed = 0;

    Matrix w0;               // m x b
    std::vector<Matrix> w;   // hidden_layers entries, each m x m
    Matrix v;                // d x m

    Network() = default;
    Network(int b, int m, int L, int d);  // zero-initialized weights

    // Total number of ReLU layers (W0 plus the m->m maps).
    int relu_layers() const { return hidden_layers + 1; }
};

/// Entries of W0 and each W[l] drawn i.i.d. from N(0, 2/m); entries of V
/// from N(0, 1/d). Identical seed gives a bit-identical network.
Network init_network(int b, int m, int L, int d, std::uint64_t seed);

/// Per-sample forward state. pre[k]/post[k] for k = 0..L correspond to the
/// ReLU layers in order (pre[0] = W0 x); output = V post[L].
struct ActivationCache {
    Vector input;
    std::vector<Vector> pre;
    std::vector<Vector> post;
    Vector output;
};

/// Batched forward state; samples are columns.
struct BatchCache {
    Matrix input;              // b x n
    std::vector<Matrix> pre;   // each m x n
    std::vector<Matrix> post;  // each m x n
    Matrix output;             // d x n
};

ActivationCache forward(const Network& net, const Vector& x);
BatchCache forward_batch(const Network& net, const Matrix& inputs);

/// Network outputs only (d x n), without retaining the caches.
Matrix evaluate_batch(const Network& net, const Matrix& inputs);

/// Gradient container with the same shapes as the Network weights.
struct NetworkGradient {
    Matrix w0;
    std::vector<Matrix> w;
    Matrix v;

    static NetworkGradient zeros_like(const Network& net);
    void set_zero();
    void add_scaled(const NetworkGradient& other, double scale);
    double squared_norm() const;
};

/// Exact backpropagated gradient of a scalar risk whose output-gradients
/// (one length-d column per sample) are given as seeds. The result is the
/// sum over the batch; the ReLU subgradient at 0 is taken as 0.
NetworkGradient backward_batch(const Network& net, const BatchCache& cache, const Matrix& seeds);

/// Spec-level convenience over (input, output-gradient seed) pairs.
NetworkGradient risk_gradient(const Network& net,
                              const std::vector<std::pair<Vector, Vector>>& batch);

/// Pre-activation of the last ReLU layer, f_L = W[L] post[L-1](x), together
/// with its sign pattern (bit j set iff f_L[j] >= 0).
struct LastHiddenState {
    Vector pre;
    std::vector<std::uint8_t> signs;
};
LastHiddenState last_hidden_state(const Network& net, const Vector& x);

/// JSON document with dims, seed, and row-major weight arrays; round-trip
/// exact for finite doubles.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace informed
