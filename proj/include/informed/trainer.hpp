#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "informed/network.hpp"
#include "informed/risks.hpp"

namespace informed {

enum class OptimizerKind { Gd, Adam };

struct LrSegment {
    int until_step = 0;  // 1-based step index; the rate applies through this step
    double rate = 0.0;
};

struct PlateauStop {
    int window = 200;
    double rel_tol = 1e-6;
};

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::Gd;
    double eta = 0.0;                      // gd step; 0 selects default_step_size
    double adam_lr = 1e-3;                 // base Adam rate when no schedule is given
    std::vector<LrSegment> adam_schedule;  // nondecreasing until_step, last <= steps
    int steps = 0;
    int batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 0;
    int record_every = 100;
    std::optional<PlateauStop> plateau;
};

void validate_config(const TrainConfig& config);

struct TrainRecord {
    int step = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    double gap = 0.0;
    bool has_gap = false;
};

struct TrainResult {
    Network net;
    std::vector<TrainRecord> history;
    int steps_run = 0;
    bool plateaued = false;
};

/// Objective the trainer minimizes. evaluate() returns the scaled batch
/// objective and, when grad is non-null, accumulates the weight gradient.
class TrainerObjective {
  public:
    virtual ~TrainerObjective() = default;
    virtual int sample_count() const = 0;
    virtual double evaluate(const Network& net, std::span<const int> batch, double scale,
                            NetworkGradient* grad) const = 0;

    double full_value(const Network& net) const;
};

/// Weighted informed objective over a labeled and a knowledge dataset.
class InformedObjective final : public TrainerObjective {
  public:
    InformedObjective(const LabeledSet& labeled, const KnowledgeSet& knowledge, RiskSpec spec,
                      ObjectiveWeights weights);

    int sample_count() const override { return n_total_; }
    double evaluate(const Network& net, std::span<const int> batch, double scale,
                    NetworkGradient* grad) const override;

    const ObjectiveWeights& weights() const { return weights_; }
    const RiskSpec& spec() const { return spec_; }

  private:
    const LabeledSet& labeled_;
    const KnowledgeSet& knowledge_;
    RiskSpec spec_;
    ObjectiveWeights weights_;
    Matrix all_inputs_;
    int n_total_ = 0;
};

/// Theorem-facing default gd step, d / (L^2 m).
double default_step_size(const Network& net);

using GapProbe = std::function<double(const Network&)>;

/// Full-batch gradient descent W <- W - eta grad, or Adam (beta1 0.9,
/// beta2 0.999, eps 1e-8) with per-epoch shuffled mini-batches and the
/// configured rate schedule. History records step 0, every record_every
/// steps, and the final step. NaN or Inf in the objective or gradient
/// aborts with the offending step index.
TrainResult train(Network net, const TrainerObjective& objective, const TrainConfig& config,
                  const GapProbe& gap_probe = {});

/// History rows as CSV: step,objective,grad_norm,gap.
std::string history_to_csv(const std::vector<TrainRecord>& history);

}  // namespace informed
