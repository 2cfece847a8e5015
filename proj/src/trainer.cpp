#include "informed/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace informed {

void validate_config(const TrainConfig& config) {
    if (config.steps < 0) throw std::invalid_argument("train config: negative step count");
    if (config.batch_size < 0) throw std::invalid_argument("train config: negative batch size");
    if (config.record_every < 1) throw std::invalid_argument("train config: record_every must be >= 1");
    if (config.optimizer == OptimizerKind::Gd && config.eta < 0.0) {
        throw std::invalid_argument("train config: negative gd step size");
    }
    int prev = 0;
    for (const auto& seg : config.adam_schedule) {
        if (seg.until_step < prev) {
            throw std::invalid_argument("train config: schedule breakpoints must be nondecreasing");
        }
        if (seg.until_step > config.steps) {
            throw std::invalid_argument("train config: schedule breakpoint exceeds step count");
        }
        if (!(seg.rate > 0.0)) throw std::invalid_argument("train config: nonpositive learning rate");
        prev = seg.until_step;
    }
    if (config.plateau && (config.plateau->window < 1 || !(config.plateau->rel_tol >= 0.0))) {
        throw std::invalid_argument("train config: bad plateau rule");
    }
}

double TrainerObjective::full_value(const Network& net) const {
    std::vector<int> all(static_cast<std::size_t>(sample_count()));
    std::iota(all.begin(), all.end(), 0);
    return evaluate(net, all, 1.0, nullptr);
}

InformedObjective::InformedObjective(const LabeledSet& labeled, const KnowledgeSet& knowledge,
                                     RiskSpec spec, ObjectiveWeights weights)
    : labeled_(labeled), knowledge_(knowledge), spec_(spec), weights_(std::move(weights)) {
    validate_weights(weights_, labeled.size(), knowledge.size());
    n_total_ = labeled.size() + knowledge.size();
    const Eigen::Index b = labeled.size() > 0 ? labeled.inputs.rows() : knowledge.inputs.rows();
    all_inputs_.resize(b, n_total_);
    if (labeled.size() > 0) all_inputs_.leftCols(labeled.size()) = labeled.inputs;
    if (knowledge.size() > 0) all_inputs_.rightCols(knowledge.size()) = knowledge.inputs;
}

double InformedObjective::evaluate(const Network& net, std::span<const int> batch, double scale,
                                   NetworkGradient* grad) const {
    Matrix inputs(all_inputs_.rows(), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        inputs.col(static_cast<Eigen::Index>(b)) = all_inputs_.col(batch[b]);
    }
    const std::vector<int> batch_vec(batch.begin(), batch.end());
    if (grad == nullptr) {
        const Matrix outputs = evaluate_batch(net, inputs);
        return weighted_risk_and_seeds(outputs, spec_, labeled_, knowledge_, weights_, batch_vec,
                                       scale, nullptr);
    }
    BatchCache cache = forward_batch(net, inputs);
    Matrix seeds(net.output_dim, static_cast<Eigen::Index>(batch.size()));
    const double value = weighted_risk_and_seeds(cache.output, spec_, labeled_, knowledge_,
                                                 weights_, batch_vec, scale, &seeds);
    NetworkGradient batch_grad = backward_batch(net, cache, seeds);
    grad->add_scaled(batch_grad, 1.0);
    return value;
}

double default_step_size(const Network& net) {
    return static_cast<double>(net.output_dim) /
           (static_cast<double>(net.hidden_layers) * net.hidden_layers * net.width);
}

namespace {

double schedule_rate(const TrainConfig& config, int step) {
    if (config.adam_schedule.empty()) return config.adam_lr;
    for (const auto& seg : config.adam_schedule) {
        if (step <= seg.until_step) return seg.rate;
    }
    return config.adam_schedule.back().rate;
}

struct AdamState {
    NetworkGradient m;
    NetworkGradient v;
    int t = 0;

    static AdamState zeros_like(const Network& net) {
        return AdamState{NetworkGradient::zeros_like(net), NetworkGradient::zeros_like(net), 0};
    }
};

void adam_update_matrix(Matrix& param, Matrix& m, Matrix& v, const Matrix& g, double lr,
                        double bias1, double bias2) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + kEps);
}

void check_finite(double value, int step, const char* what) {
    if (!std::isfinite(value)) {
        throw std::runtime_error("train: " + std::string(what) + " is not finite at step " +
                                 std::to_string(step));
    }
}

}  // namespace

TrainResult train(Network net, const TrainerObjective& objective, const TrainConfig& config,
                  const GapProbe& gap_probe) {
    validate_config(config);
    const int n = objective.sample_count();
    if (n < 1) throw std::invalid_argument("train: objective has no samples");
    const int batch_size = config.batch_size == 0 ? n : std::min(config.batch_size, n);
    const double eta = config.eta > 0.0 ? config.eta : default_step_size(net);

    TrainResult result;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    std::size_t epoch_pos = order.size();  // forces a shuffle before the first batch

    AdamState adam = AdamState::zeros_like(net);
    NetworkGradient grad = NetworkGradient::zeros_like(net);

    const auto record = [&](int step) {
        grad.set_zero();
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        const double value = objective.evaluate(net, all, 1.0, &grad);
        TrainRecord rec;
        rec.step = step;
        rec.objective = value;
        rec.grad_norm = std::sqrt(grad.squared_norm());
        if (gap_probe) {
            rec.gap = gap_probe(net);
            rec.has_gap = true;
        }
        result.history.push_back(rec);
        return value;
    };

    double best_seen = record(0);
    double plateau_ref = best_seen;
    int plateau_mark = 0;

    for (int step = 1; step <= config.steps; ++step) {
        std::vector<int> batch;
        if (batch_size == n) {
            batch = order;
        } else {
            if (epoch_pos + static_cast<std::size_t>(batch_size) > order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                epoch_pos = 0;
            }
            batch.assign(order.begin() + static_cast<std::ptrdiff_t>(epoch_pos),
                         order.begin() + static_cast<std::ptrdiff_t>(epoch_pos) + batch_size);
            epoch_pos += static_cast<std::size_t>(batch_size);
        }
        const double scale = static_cast<double>(n) / batch_size;

        grad.set_zero();
        const double value = objective.evaluate(net, batch, scale, &grad);
        check_finite(value, step, "objective");
        const double gnorm_sq = grad.squared_norm();
        check_finite(gnorm_sq, step, "gradient");

        if (config.optimizer == OptimizerKind::Gd) {
            net.w0 -= eta * grad.w0;
            for (std::size_t l = 0; l < net.w.size(); ++l) net.w[l] -= eta * grad.w[l];
            net.v -= eta * grad.v;
        } else {
            adam.t += 1;
            const double lr = schedule_rate(config, step);
            const double bias1 = 1.0 - std::pow(0.9, adam.t);
            const double bias2 = 1.0 - std::pow(0.999, adam.t);
            adam_update_matrix(net.w0, adam.m.w0, adam.v.w0, grad.w0, lr, bias1, bias2);
            for (std::size_t l = 0; l < net.w.size(); ++l) {
                adam_update_matrix(net.w[l], adam.m.w[l], adam.v.w[l], grad.w[l], lr, bias1, bias2);
            }
            adam_update_matrix(net.v, adam.m.v, adam.v.v, grad.v, lr, bias1, bias2);
        }
        result.steps_run = step;

        const bool due = step % config.record_every == 0 || step == config.steps;
        if (due) {
            const double full = record(step);
            best_seen = std::min(best_seen, full);
            // Plateau on the running best rather than the last value, so a
            // transient uptick does not read as convergence.
            if (config.plateau && step - plateau_mark >= config.plateau->window) {
                const double denom = std::max(std::abs(plateau_ref), 1e-300);
                if ((plateau_ref - best_seen) / denom < config.plateau->rel_tol) {
                    result.plateaued = true;
                    break;
                }
                plateau_ref = best_seen;
                plateau_mark = step;
            }
        }
    }
    result.net = std::move(net);
    return result;
}

std::string history_to_csv(const std::vector<TrainRecord>& history) {
    std::ostringstream out;
    out << "step,objective,grad_norm,gap\n";
    char buf[64];
    for (const auto& rec : history) {
        out << rec.step << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", rec.objective);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", rec.grad_norm);
        out << buf << ',';
        if (rec.has_gap) {
            std::snprintf(buf, sizeof(buf), "%.17g", rec.gap);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace informed
