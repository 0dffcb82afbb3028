// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gumbeldore/policy.hpp"
#include "gumbeldore/problems/instance_io.hpp"
#include "gumbeldore/sampler.hpp"

namespace gumbeldore {

using InstancePtr = std::shared_ptr<const FeaturizedInstance>;

struct DatasetEntry {
    InstancePtr instance;
    Trajectory trajectory;
    double f = 0.0;
    std::size_t epoch_added = 0;
};

/// Best sampled solution per instance, kept until the best policy improves.
struct PseudoExpertDataset {
    std::vector<DatasetEntry> entries;
};

struct TrainConfig {
    ProblemKind problem = ProblemKind::tsp;
    ProblemSize size;
    std::size_t instances_per_epoch = 50;
    /// sampler.p_min applies after `p_min_switch_epoch`; earlier epochs use 1.
    SamplerConfig sampler{32, 4, 0.3, 0.95, UpdateMode::gd, 0};
    std::optional<std::size_t> p_min_switch_epoch;  // default: epochs / 2
    std::size_t batches_per_epoch = 100;
    std::size_t batch_size = 64;
    double lr = 1e-2;
    std::size_t epochs = 40;
    std::size_t validation_size = 100;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    std::size_t samples_per_instance() const { return sampler.k * sampler.n; }
    double p_min_for_epoch(std::size_t epoch) const;
    void validate() const;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double mean_val_f = 0.0;
    double best_val_f = 0.0;
    double mean_best_sampled_f = 0.0;
    std::size_t dataset_size = 0;
    bool promoted = false;
    double wall_ms = 0.0;
};

struct TrainerState {
    LinearPolicy current;
    LinearPolicy best;
    double best_val_f;
    PseudoExpertDataset dataset;
    std::vector<InstancePtr> validation;
    std::size_t epoch = 0;
    /// Everything the sampler returned in the most recent epoch, one list
    /// per sampled instance in generation order.
    std::vector<std::vector<Trajectory>> last_epoch_samples;
};

/// Fixed validation set derived from the config seed.
std::vector<InstancePtr> make_validation_set(const TrainConfig& config);

/// Zero-weight current and best policies with the best's validation score.
TrainerState initial_state(const TrainConfig& config);

/// Mean objective of greedy rollouts over the set.
double validate_greedy(const SequencePolicy& policy, std::span<const InstancePtr> validation, std::size_t workers = 1);

/// One self-improvement epoch: sample with the best policy, extend the
/// dataset, train the current policy, validate, and promote on strict
/// improvement (which also clears the dataset).
EpochMetrics run_epoch(TrainerState& state, const TrainConfig& config);

struct TrainingResult {
    LinearPolicy best;
    LinearPolicy current;
    double initial_val_f = 0.0;
    double best_val_f = 0.0;
    std::vector<EpochMetrics> log;
    std::vector<InstancePtr> validation;
};

using EpochCallback = std::function<void(const EpochMetrics&, const TrainerState&)>;

/// Runs config.epochs epochs from zero weights. When `checkpoint_dir` is set,
/// writes best.ckpt (and epoch_<e>.ckpt) whenever the best policy changes.
TrainingResult run_training(const TrainConfig& config, const EpochCallback& on_epoch = {},
                            const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

struct SigmaGridPoint {
    double sigma = 0.0;
    double mean_best_f = 0.0;
};

struct SigmaGridResult {
    TrainingResult warmup;
    std::vector<SigmaGridPoint> grid;
    double selected_sigma = 0.0;
};

/// Step-size selection: train with sigma = 0 for `warmup_epochs`, then score
/// each grid value by the mean best sampled objective on `eval_instances`
/// fresh instances. Ties go to the smaller sigma.
SigmaGridResult sigma_grid_search(TrainConfig config, std::span<const double> grid, std::size_t warmup_epochs,
                                  std::size_t eval_instances);

}  // namespace gumbeldore
