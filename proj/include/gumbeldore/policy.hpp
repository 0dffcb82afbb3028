// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "gumbeldore/core.hpp"
#include "gumbeldore/problems/instance_io.hpp"

namespace gumbeldore {

/// Linear-softmax policy: logit(c) = weights · features(c).
class LinearPolicy final : public SequencePolicy {
public:
    /// Zero weights, i.e. uniform over feasible tokens.
    explicit LinearPolicy(ProblemKind kind);
    LinearPolicy(ProblemKind kind, std::vector<double> weights);

    ProblemKind kind() const { return kind_; }
    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& weights() { return weights_; }

    /// Requires a FeaturizedInstance whose feature dimension matches.
    std::vector<ScoredToken> conditional_logits(const Instance& instance, TokenView prefix) const override;

private:
    ProblemKind kind_;
    std::vector<double> weights_;
};

/// One supervised next-token example: predict `target` after `prefix`.
struct TrainItem {
    std::shared_ptr<const FeaturizedInstance> instance;
    Trajectory prefix;
    Token target = 0;
};

using TrainBatch = std::vector<TrainItem>;

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean next-token cross-entropy over the batch and its exact gradient.
LossAndGrad nll_loss_and_grad(const LinearPolicy& policy, std::span<const TrainItem> batch);

/// Clips `grad` to unit L2 norm, then takes a plain gradient step.
void sgd_step(LinearPolicy& policy, std::span<const double> grad, double lr);

/// Argmax-logit rollout; ties go to the smallest token index.
Trajectory greedy_rollout(const SequencePolicy& policy, const Instance& instance);

struct Checkpoint {
    LinearPolicy policy;
    std::size_t epoch = 0;
    double validation_score = 0.0;
};

/// Text checkpoint: a four-line header (kind, feature dim, epoch, validation
/// score) followed by one weight per line.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gumbeldore
