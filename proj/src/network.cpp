#include "informed/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace informed {

namespace {

void check_dims(int b, int m, int L, int d) {
    if (b < 1 || m < 1 || L < 1 || d < 1) {
        throw std::invalid_argument("network dimensions must be positive");
    }
}

void fill_gaussian(Matrix& mat, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    // Row-major fill order; this is also the serialization order.
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
        for (Eigen::Index c = 0; c < mat.cols(); ++c) {
            mat(r, c) = dist(rng);
        }
    }
}

}  // namespace

Network::Network(int b, int m, int L, int d)
    : input_dim(b), width(m), hidden_layers(L), output_dim(d) {
    check_dims(b, m, L, d);
    w0 = Matrix::Zero(m, b);
    w.assign(static_cast<std::size_t>(L), Matrix::Zero(m, m));
    v = Matrix::Zero(d, m);
}

Network init_network(int b, int m, int L, int d, std::uint64_t seed) {
    check_dims(b, m, L, d);
    Network net(b, m, L, d);
    net.seed = seed;
    std::mt19937_64 rng(seed);
    const double hidden_std = std::sqrt(2.0 / m);
    const double output_std = std::sqrt(1.0 / d);
    fill_gaussian(net.w0, hidden_std, rng);
    for (auto& layer : net.w) fill_gaussian(layer, hidden_std, rng);
    fill_gaussian(net.v, output_std, rng);
    return net;
}

ActivationCache forward(const Network& net, const Vector& x) {
    if (x.size() != net.input_dim) {
        throw std::invalid_argument("forward: input length does not match input_dim");
    }
    ActivationCache cache;
    cache.input = x;
    cache.pre.reserve(net.relu_layers());
    cache.post.reserve(net.relu_layers());
    Vector h = net.w0 * x;
    cache.pre.push_back(h);
    cache.post.push_back(h.cwiseMax(0.0));
    for (const auto& layer : net.w) {
        h = layer * cache.post.back();
        cache.pre.push_back(h);
        cache.post.push_back(h.cwiseMax(0.0));
    }
    cache.output = net.v * cache.post.back();
    return cache;
}

BatchCache forward_batch(const Network& net, const Matrix& inputs) {
    if (inputs.rows() != net.input_dim) {
        throw std::invalid_argument("forward_batch: input rows do not match input_dim");
    }
    BatchCache cache;
    cache.input = inputs;
    cache.pre.reserve(net.relu_layers());
    cache.post.reserve(net.relu_layers());
    Matrix h = net.w0 * inputs;
    cache.pre.push_back(h);
    cache.post.push_back(h.cwiseMax(0.0));
    for (const auto& layer : net.w) {
        h.noalias() = layer * cache.post.back();
        cache.pre.push_back(h);
        cache.post.push_back(h.cwiseMax(0.0));
    }
    cache.output.noalias() = net.v * cache.post.back();
    return cache;
}

Matrix evaluate_batch(const Network& net, const Matrix& inputs) {
    if (inputs.rows() != net.input_dim) {
        throw std::invalid_argument("evaluate_batch: input rows do not match input_dim");
    }
    Matrix h = (net.w0 * inputs).cwiseMax(0.0);
    for (const auto& layer : net.w) {
        h = (layer * h).cwiseMax(0.0);
    }
    return net.v * h;
}

NetworkGradient NetworkGradient::zeros_like(const Network& net) {
    NetworkGradient g;
    g.w0 = Matrix::Zero(net.width, net.input_dim);
    g.w.assign(net.w.size(), Matrix::Zero(net.width, net.width));
    g.v = Matrix::Zero(net.output_dim, net.width);
    return g;
}

void NetworkGradient::set_zero() {
    w0.setZero();
    for (auto& layer : w) layer.setZero();
    v.setZero();
}

void NetworkGradient::add_scaled(const NetworkGradient& other, double scale) {
    w0 += scale * other.w0;
    for (std::size_t l = 0; l < w.size(); ++l) w[l] += scale * other.w[l];
    v += scale * other.v;
}

double NetworkGradient::squared_norm() const {
    double total = w0.squaredNorm() + v.squaredNorm();
    for (const auto& layer : w) total += layer.squaredNorm();
    return total;
}

NetworkGradient backward_batch(const Network& net, const BatchCache& cache, const Matrix& seeds) {
    if (seeds.rows() != net.output_dim || seeds.cols() != cache.input.cols()) {
        throw std::invalid_argument("backward_batch: seed shape mismatch");
    }
    NetworkGradient grad = NetworkGradient::zeros_like(net);
    grad.v.noalias() = seeds * cache.post.back().transpose();
    // delta starts as d(risk)/d(post[L]) and is masked down through the layers.
    Matrix delta = net.v.transpose() * seeds;
    const int layers = net.relu_layers();
    for (int k = layers - 1; k >= 1; --k) {
        delta.array() *= (cache.pre[static_cast<std::size_t>(k)].array() > 0.0).cast<double>();
        grad.w[static_cast<std::size_t>(k - 1)].noalias() =
            delta * cache.post[static_cast<std::size_t>(k - 1)].transpose();
        delta = net.w[static_cast<std::size_t>(k - 1)].transpose() * delta;
    }
    delta.array() *= (cache.pre[0].array() > 0.0).cast<double>();
    grad.w0.noalias() = delta * cache.input.transpose();
    return grad;
}

NetworkGradient risk_gradient(const Network& net,
                              const std::vector<std::pair<Vector, Vector>>& batch) {
    Matrix inputs(net.input_dim, static_cast<Eigen::Index>(batch.size()));
    Matrix seeds(net.output_dim, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].first.size() != net.input_dim) {
            throw std::invalid_argument("risk_gradient: input length mismatch");
        }
        if (batch[i].second.size() != net.output_dim) {
            throw std::invalid_argument("risk_gradient: seed length mismatch");
        }
        inputs.col(static_cast<Eigen::Index>(i)) = batch[i].first;
        seeds.col(static_cast<Eigen::Index>(i)) = batch[i].second;
    }
    return backward_batch(net, forward_batch(net, inputs), seeds);
}

LastHiddenState last_hidden_state(const Network& net, const Vector& x) {
    ActivationCache cache = forward(net, x);
    LastHiddenState state;
    state.pre = cache.pre.back();
    state.signs.resize(static_cast<std::size_t>(net.width));
    for (int j = 0; j < net.width; ++j) {
        state.signs[static_cast<std::size_t>(j)] = state.pre[j] >= 0.0 ? 1 : 0;
    }
    return state;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& mat) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
        for (Eigen::Index c = 0; c < mat.cols(); ++c) {
            arr.push_back(mat(r, c));
        }
    }
    return arr;
}

Matrix matrix_from_json(const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols) {
        throw std::invalid_argument("network json: weight array size mismatch");
    }
    Matrix mat(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            mat(r, c) = arr[static_cast<std::size_t>(k++)].get<double>();
        }
    }
    return mat;
}

}  // namespace

std::string network_to_json(const Network& net) {
    nlohmann::json doc;
    doc["input_dim"] = net.input_dim;
    doc["width"] = net.width;
    doc["hidden_layers"] = net.hidden_layers;
    doc["output_dim"] = net.output_dim;
    doc["seed"] = net.seed;
    doc["w0"] = matrix_to_json(net.w0);
    nlohmann::json hidden = nlohmann::json::array();
    for (const auto& layer : net.w) hidden.push_back(matrix_to_json(layer));
    doc["w"] = hidden;
    doc["v"] = matrix_to_json(net.v);
    return doc.dump();
}

Network network_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    Network net(doc.at("input_dim").get<int>(), doc.at("width").get<int>(),
                doc.at("hidden_layers").get<int>(), doc.at("output_dim").get<int>());
    net.seed = doc.at("seed").get<std::uint64_t>();
    net.w0 = matrix_from_json(doc.at("w0"), net.width, net.input_dim);
    const auto& hidden = doc.at("w");
    if (!hidden.is_array() || static_cast<int>(hidden.size()) != net.hidden_layers) {
        throw std::invalid_argument("network json: hidden layer count mismatch");
    }
    for (int l = 0; l < net.hidden_layers; ++l) {
        net.w[static_cast<std::size_t>(l)] =
            matrix_from_json(hidden[static_cast<std::size_t>(l)], net.width, net.width);
    }
    net.v = matrix_from_json(doc.at("v"), net.output_dim, net.width);
    return net;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << network_to_json(net);
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_from_json(text);
}

}  // namespace informed
