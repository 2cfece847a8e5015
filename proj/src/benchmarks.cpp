#include "informed/benchmarks.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace informed {

namespace {

Matrix random_orthogonal(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix gauss(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) gauss(r, c) = dist(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(gauss);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the signs so the distribution is Haar rather than QR-convention.
    for (int c = 0; c < dim; ++c) {
        if (r(c, c) < 0.0) q.col(c) *= -1.0;
    }
    return q;
}

Matrix uniform_cube(int dim, int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix points(dim, count);
    for (int i = 0; i < count; ++i) {
        for (int r = 0; r < dim; ++r) points(r, i) = dist(rng);
    }
    return points;
}

double gaussian_noise(double variance, std::mt19937_64& rng) {
    if (variance <= 0.0) return 0.0;
    std::normal_distribution<double> dist(0.0, std::sqrt(variance));
    return dist(rng);
}

char fmt_buf[64];

std::string fmt(double value) {
    std::snprintf(fmt_buf, sizeof(fmt_buf), "%.17g", value);
    return fmt_buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bohachevsky
// ---------------------------------------------------------------------------

void BohachevskyInstance::finalize_defaults() {
    std::mt19937_64 rng(hash_combine(seed, 0xb0b0));
    if (a_matrix.size() == 0) a_matrix = 0.5 * random_orthogonal(dim, rng);
    if (a_vector.size() == 0) a_vector = Vector::Ones(dim);
}

void BohachevskyInstance::validate() const {
    if (dim < 1) throw std::invalid_argument("bohachevsky: dim must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("bohachevsky: c must be positive");
    if (lb > 0.0) throw std::invalid_argument("bohachevsky: lb must be <= 0");
    if (ub < 2.0 * c) throw std::invalid_argument("bohachevsky: ub must be >= 2c");
    if (sigma_z_sq < 0.0) throw std::invalid_argument("bohachevsky: negative noise variance");
    if (n_z < 0 || n_g < 0 || n_t < 1) throw std::invalid_argument("bohachevsky: bad sizes");
    if (a_matrix.rows() != dim || a_matrix.cols() != dim || a_vector.size() != dim) {
        throw std::invalid_argument("bohachevsky: parameter shapes do not match dim");
    }
}

double bohachevsky_value(const BohachevskyInstance& instance, const Vector& x) {
    const double quad = (instance.a_matrix.transpose() * x).squaredNorm();
    return quad - instance.c * std::cos(instance.a_vector.dot(x)) + instance.c;
}

std::pair<double, double> bohachevsky_knowledge(const BohachevskyInstance& instance,
                                                const Vector& x) {
    const double quad = (instance.a_matrix.transpose() * x).squaredNorm();
    return {quad + instance.lb, quad + instance.ub};
}

BohachevskyData bohachevsky_generate(const BohachevskyInstance& instance) {
    instance.validate();
    BohachevskyData data;
    std::mt19937_64 rng(instance.seed);

    data.labeled.inputs = uniform_cube(instance.dim, instance.n_z, rng);
    data.labeled_truth = Vector::Zero(instance.n_z);
    data.labeled.labels.reserve(static_cast<std::size_t>(instance.n_z));
    for (int i = 0; i < instance.n_z; ++i) {
        const double truth = bohachevsky_value(instance, data.labeled.inputs.col(i));
        data.labeled_truth[i] = truth;
        data.labeled.labels.emplace_back(
            Vector::Constant(1, truth + gaussian_noise(instance.sigma_z_sq, rng)));
    }

    data.knowledge.inputs = uniform_cube(instance.dim, instance.n_g, rng);
    data.knowledge_truth = Vector::Zero(instance.n_g);
    data.knowledge.payloads.reserve(static_cast<std::size_t>(instance.n_g));
    for (int i = 0; i < instance.n_g; ++i) {
        data.knowledge_truth[i] = bohachevsky_value(instance, data.knowledge.inputs.col(i));
        auto [lo, hi] = bohachevsky_knowledge(instance, data.knowledge.inputs.col(i));
        data.knowledge.payloads.emplace_back(
            Bounds{Vector::Constant(1, lo), Vector::Constant(1, hi)});
    }

    data.test_inputs = uniform_cube(instance.dim, instance.n_t, rng);
    data.test_truth = Vector::Zero(instance.n_t);
    for (int i = 0; i < instance.n_t; ++i) {
        data.test_truth[i] = bohachevsky_value(instance, data.test_inputs.col(i));
    }
    return data;
}

double test_mse_outputs(const Vector& outputs, const Vector& test_truth) {
    if (outputs.size() != test_truth.size() || test_truth.size() == 0) {
        throw std::invalid_argument("test_mse: size mismatch or empty test set");
    }
    return (outputs - test_truth).squaredNorm() / (2.0 * static_cast<double>(test_truth.size()));
}

double test_mse(const Network& net, const Matrix& test_inputs, const Vector& test_truth) {
    if (net.output_dim != 1) throw std::invalid_argument("test_mse: scalar outputs expected");
    const Matrix outputs = evaluate_batch(net, test_inputs);
    return test_mse_outputs(outputs.row(0).transpose(), test_truth);
}

std::string bohachevsky_metadata_json(const BohachevskyInstance& instance) {
    nlohmann::json doc;
    doc["benchmark"] = "bohachevsky";
    doc["dim"] = instance.dim;
    doc["c"] = instance.c;
    doc["lb"] = instance.lb;
    doc["ub"] = instance.ub;
    doc["sigma_z_sq"] = instance.sigma_z_sq;
    doc["n_z"] = instance.n_z;
    doc["n_g"] = instance.n_g;
    doc["n_t"] = instance.n_t;
    doc["seed"] = instance.seed;
    doc["input_distribution"] = "uniform[-1,1]^b";
    std::vector<double> a_flat;
    for (int r = 0; r < instance.dim; ++r) {
        for (int c2 = 0; c2 < instance.dim; ++c2) a_flat.push_back(instance.a_matrix(r, c2));
    }
    doc["a_matrix_row_major"] = a_flat;
    doc["a_vector"] = std::vector<double>(instance.a_vector.data(),
                                          instance.a_vector.data() + instance.a_vector.size());
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Wireless
// ---------------------------------------------------------------------------

void WirelessInstance::validate() const {
    if (links < 1 || links > 20) throw std::invalid_argument("wireless: links must be in [1,20]");
    if (!(noise_power > 0.0)) throw std::invalid_argument("wireless: noise power must be positive");
    if (!(direct_power > 0.0) || !(cross_power > 0.0)) {
        throw std::invalid_argument("wireless: channel powers must be positive");
    }
    if (!(mu_real > 0.0 && mu_real <= 1.0) || !(mu_knowledge > 0.0 && mu_knowledge <= 1.0)) {
        throw std::invalid_argument("wireless: mu must lie in (0,1]");
    }
    if (!(temperature > 0.0)) throw std::invalid_argument("wireless: temperature must be positive");
    if (n_y < 0 || n_g < 0 || n_t < 0) throw std::invalid_argument("wireless: bad sizes");
}

void WirelessInstance::apply_matched_calibration() {
    direct_power = 100.0;
    cross_power = 10.0;
    noise_power = 1.0;
}

std::vector<int> decision_bits(int index, int links) {
    if (index < 0 || index >= (1 << links) - 1) {
        throw std::invalid_argument("decision_bits: index out of range");
    }
    std::vector<int> bits(static_cast<std::size_t>(links));
    const int pattern = index + 1;
    for (int u = 0; u < links; ++u) bits[static_cast<std::size_t>(u)] = (pattern >> u) & 1;
    return bits;
}

RateBreakdown shannon_rate(const Matrix& csi, const std::vector<int>& decision, double mu,
                           double noise_power) {
    const int links = static_cast<int>(csi.rows());
    if (csi.cols() != links || static_cast<int>(decision.size()) != links) {
        throw std::invalid_argument("shannon_rate: shape mismatch");
    }
    bool any = false;
    for (int bit : decision) any = any || bit != 0;
    if (!any) throw std::invalid_argument("shannon_rate: all-zero decision");

    RateBreakdown out;
    out.per_link = Vector::Zero(links);
    for (int u = 0; u < links; ++u) {
        if (decision[static_cast<std::size_t>(u)] == 0) continue;
        double interference = 0.0;
        for (int v = 0; v < links; ++v) {
            if (v == u || decision[static_cast<std::size_t>(v)] == 0) continue;
            interference += csi(v, u) * csi(v, u);
        }
        const double signal = mu * csi(u, u) * csi(u, u);
        out.per_link[u] = std::log1p(signal / (noise_power + interference));
        out.sum += out.per_link[u];
    }
    return out;
}

std::pair<int, double> oracle_schedule(const Matrix& csi, double mu, double noise_power,
                                       int links) {
    if (links < 1 || links > 20) throw std::invalid_argument("oracle_schedule: links outside [1,20]");
    const int count = (1 << links) - 1;
    int best_index = 0;
    double best_rate = -1.0;
    for (int j = 0; j < count; ++j) {
        const double rate = shannon_rate(csi, decision_bits(j, links), mu, noise_power).sum;
        if (rate > best_rate) {
            best_rate = rate;
            best_index = j;
        }
    }
    return {best_index, best_rate};
}

Vector rate_vector(const Matrix& csi, double mu, double noise_power, int links) {
    const int count = (1 << links) - 1;
    Vector rates(count);
    for (int j = 0; j < count; ++j) {
        rates[j] = shannon_rate(csi, decision_bits(j, links), mu, noise_power).sum;
    }
    return rates;
}

namespace {

Matrix rayleigh_csi(int links, double direct_power, double cross_power, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix gains(links, links);
    for (int v = 0; v < links; ++v) {
        for (int u = 0; u < links; ++u) {
            const double power = v == u ? direct_power : cross_power;
            const double scale = std::sqrt(power / 2.0);
            const double quantile = 1.0 - unit(rng);  // (0,1]
            gains(v, u) = scale * std::sqrt(-2.0 * std::log(quantile));
        }
    }
    return gains;
}

Vector vectorize_csi(const Matrix& csi) {
    const int links = static_cast<int>(csi.rows());
    Vector flat(links * links);
    int k = 0;
    // Row-major: [g_{1,1},...,g_{1,N}, g_{2,1},...,g_{N,N}].
    for (int v = 0; v < links; ++v) {
        for (int u = 0; u < links; ++u) flat[k++] = csi(v, u);
    }
    return flat;
}

}  // namespace

WirelessData wireless_generate(const WirelessInstance& instance) {
    instance.validate();
    WirelessData data;
    std::mt19937_64 rng(instance.seed);
    const int links = instance.links;
    const int total = instance.n_y + instance.n_g + instance.n_t;
    data.csi.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        data.csi.push_back(rayleigh_csi(links, instance.direct_power, instance.cross_power, rng));
    }

    data.labeled.inputs.resize(links * links, instance.n_y);
    data.labeled.labels.reserve(static_cast<std::size_t>(instance.n_y));
    data.labeled_indices.reserve(static_cast<std::size_t>(instance.n_y));
    for (int i = 0; i < instance.n_y; ++i) {
        const Matrix& csi = data.csi[static_cast<std::size_t>(i)];
        data.labeled.inputs.col(i) = vectorize_csi(csi);
        const int label = oracle_schedule(csi, instance.mu_real, instance.noise_power, links).first;
        data.labeled_indices.push_back(label);
        data.labeled.labels.emplace_back(ClassLabel{label});
    }

    data.knowledge.inputs.resize(links * links, instance.n_g);
    data.knowledge.payloads.reserve(static_cast<std::size_t>(instance.n_g));
    data.knowledge_truth.reserve(static_cast<std::size_t>(instance.n_g));
    for (int i = 0; i < instance.n_g; ++i) {
        const Matrix& csi = data.csi[static_cast<std::size_t>(instance.n_y + i)];
        data.knowledge.inputs.col(i) = vectorize_csi(csi);
        data.knowledge.payloads.emplace_back(
            RateVector{rate_vector(csi, instance.mu_knowledge, instance.noise_power, links)});
        data.knowledge_truth.push_back(
            oracle_schedule(csi, instance.mu_real, instance.noise_power, links).first);
    }

    data.test_inputs.resize(links * links, instance.n_t);
    data.test_labels.reserve(static_cast<std::size_t>(instance.n_t));
    for (int i = 0; i < instance.n_t; ++i) {
        const Matrix& csi = data.csi[static_cast<std::size_t>(instance.n_y + instance.n_g + i)];
        data.test_inputs.col(i) = vectorize_csi(csi);
        data.test_labels.push_back(
            oracle_schedule(csi, instance.mu_real, instance.noise_power, links).first);
    }
    return data;
}

AccuracySumRate test_accuracy_and_sumrate(const std::vector<int>& predicted,
                                          const std::vector<Matrix>& test_csi,
                                          const std::vector<int>& test_labels, double mu_real,
                                          double noise_power) {
    if (predicted.size() != test_labels.size() || predicted.size() != test_csi.size()) {
        throw std::invalid_argument("test_accuracy_and_sumrate: length mismatch");
    }
    if (predicted.empty()) throw std::invalid_argument("test_accuracy_and_sumrate: empty test set");
    const int links = static_cast<int>(test_csi.front().rows());
    int hits = 0;
    double rate_total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == test_labels[i]) ++hits;
        rate_total +=
            shannon_rate(test_csi[i], decision_bits(predicted[i], links), mu_real, noise_power).sum;
    }
    AccuracySumRate out;
    out.accuracy = static_cast<double>(hits) / static_cast<double>(predicted.size());
    out.mean_sum_rate = rate_total / static_cast<double>(predicted.size());
    return out;
}

double knowledge_only_accuracy(const std::vector<Matrix>& test_csi,
                               const std::vector<int>& test_labels, double mu_k,
                               double noise_power) {
    if (test_csi.size() != test_labels.size() || test_csi.empty()) {
        throw std::invalid_argument("knowledge_only_accuracy: bad test set");
    }
    const int links = static_cast<int>(test_csi.front().rows());
    int hits = 0;
    for (std::size_t i = 0; i < test_csi.size(); ++i) {
        if (oracle_schedule(test_csi[i], mu_k, noise_power, links).first == test_labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test_csi.size());
}

std::string wireless_metadata_json(const WirelessInstance& instance) {
    nlohmann::json doc;
    doc["benchmark"] = "wireless";
    doc["links"] = instance.links;
    doc["decision_count"] = instance.decision_count();
    doc["noise_power"] = instance.noise_power;
    doc["direct_power"] = instance.direct_power;
    doc["cross_power"] = instance.cross_power;
    doc["mu_real"] = instance.mu_real;
    doc["mu_knowledge"] = instance.mu_knowledge;
    doc["temperature"] = instance.temperature;
    doc["n_y"] = instance.n_y;
    doc["n_g"] = instance.n_g;
    doc["n_t"] = instance.n_t;
    doc["seed"] = instance.seed;
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Synthetic quadratic
// ---------------------------------------------------------------------------

void SyntheticQuadraticInstance::validate() const {
    if (dim < 1 || n_pairs < 1 || n_t < 1) {
        throw std::invalid_argument("synthetic-quadratic: bad sizes");
    }
    if (label_noise < 0.0 || teacher_noise < 0.0) {
        throw std::invalid_argument("synthetic-quadratic: negative noise");
    }
}

SyntheticQuadraticData synthetic_quadratic_generate(const SyntheticQuadraticInstance& instance) {
    instance.validate();
    std::mt19937_64 rng(instance.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int b = instance.dim;
    Matrix symmetric(b, b);
    for (int r = 0; r < b; ++r) {
        for (int c = 0; c < b; ++c) symmetric(r, c) = gauss(rng);
    }
    symmetric = ((symmetric + symmetric.transpose()) / (2.0 * std::sqrt(double(b)))).eval();

    const auto sphere_points = [&](int count) {
        Matrix points(b, count);
        for (int i = 0; i < count; ++i) {
            Vector x(b);
            do {
                for (int r = 0; r < b; ++r) x[r] = gauss(rng);
            } while (x.norm() < 1e-12);
            points.col(i) = x / x.norm();
        }
        return points;
    };
    const auto target = [&](const Vector& x) {
        return instance.target_scale * x.dot(symmetric * x);
    };

    SyntheticQuadraticData data;
    const Matrix inputs = sphere_points(instance.n_pairs);
    data.labeled.inputs = inputs;
    data.knowledge.inputs = inputs;
    data.labeled_truth = Vector::Zero(instance.n_pairs);
    data.knowledge_truth = Vector::Zero(instance.n_pairs);
    for (int i = 0; i < instance.n_pairs; ++i) {
        const double truth = target(inputs.col(i));
        data.labeled_truth[i] = truth;
        data.knowledge_truth[i] = truth;
        data.labeled.labels.emplace_back(
            Vector::Constant(1, truth + gaussian_noise(instance.label_noise * instance.label_noise, rng)));
        data.knowledge.payloads.emplace_back(Teacher{Vector::Constant(
            1, truth + gaussian_noise(instance.teacher_noise * instance.teacher_noise, rng))});
    }
    data.test_inputs = sphere_points(instance.n_t);
    data.test_truth = Vector::Zero(instance.n_t);
    for (int i = 0; i < instance.n_t; ++i) {
        data.test_truth[i] = target(data.test_inputs.col(i));
    }
    return data;
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

void save_csv(const std::string& path, const std::vector<std::string>& header,
              const Matrix& columns) {
    if (static_cast<Eigen::Index>(header.size()) != columns.cols()) {
        throw std::invalid_argument("save_csv: header/column mismatch");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path);
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << header[c] << (c + 1 < header.size() ? "," : "\n");
    }
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
        for (Eigen::Index c = 0; c < columns.cols(); ++c) {
            out << fmt(columns(r, c)) << (c + 1 < columns.cols() ? "," : "\n");
        }
    }
}

Matrix load_csv(const std::string& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file");
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    if (header != nullptr) *header = names;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell = line.substr(pos, comma - pos);
            row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : std::stod(cell));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (row.size() != names.size()) throw std::runtime_error("load_csv: ragged row");
        rows.push_back(std::move(row));
    }
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return out;
}

}  // namespace informed
