// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/selfimprove.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gumbeldore/parallel.hpp"

namespace gumbeldore {

namespace {

enum Stream : std::uint64_t {
    kValidationStream = 1,
    kInstanceStream = 2,
    kSampleStream = 3,
    kBatchStream = 4,
    kGridStream = 5,
};

constexpr double kPromotionMargin = 1e-9;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

double TrainConfig::p_min_for_epoch(std::size_t epoch) const {
    const std::size_t switch_at = p_min_switch_epoch.value_or(epochs / 2);
    return epoch > switch_at ? sampler.p_min : 1.0;
}

void TrainConfig::validate() const {
    sampler.validate();
    if (instances_per_epoch == 0 || batches_per_epoch == 0 || batch_size == 0 || validation_size == 0)
        throw Error("train config: counts must be positive");
    if (!(lr > 0.0)) throw Error("train config: lr must be positive");
    if (workers == 0) throw Error("train config: workers must be positive");
}

std::vector<InstancePtr> make_validation_set(const TrainConfig& config) {
    std::vector<InstancePtr> out(config.validation_size);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto rng = make_rng(config.seed, {kValidationStream, i});
        out[i] = generate_instance(config.problem, config.size, rng);
    }
    return out;
}

double validate_greedy(const SequencePolicy& policy, std::span<const InstancePtr> validation, std::size_t workers) {
    if (validation.empty()) throw Error("validate_greedy: empty validation set");
    std::vector<double> f(validation.size());
    parallel_for(validation.size(), workers, [&](std::size_t i) {
        f[i] = validation[i]->objective(greedy_rollout(policy, *validation[i]));
    });
    return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
}

TrainerState initial_state(const TrainConfig& config) {
    config.validate();
    TrainerState state{LinearPolicy(config.problem), LinearPolicy(config.problem), 0.0, {}, make_validation_set(config), 0, {}};
    state.best_val_f = validate_greedy(state.best, state.validation, config.workers);
    return state;
}

EpochMetrics run_epoch(TrainerState& state, const TrainConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    const std::size_t epoch = ++state.epoch;
    const std::size_t count = config.instances_per_epoch;

    SamplerConfig sampler = config.sampler;
    sampler.p_min = config.p_min_for_epoch(epoch);

    // Sampling phase: read-only snapshot of the best policy, one RNG stream
    // per (epoch, instance), results gathered in index order.
    const LinearPolicy snapshot = state.best;
    std::vector<InstancePtr> instances(count);
    std::vector<SamplingResult> results(count);
    parallel_for(count, config.workers, [&](std::size_t i) {
        auto gen_rng = make_rng(config.seed, {kInstanceStream, epoch, i});
        instances[i] = generate_instance(config.problem, config.size, gen_rng);
        auto rng = make_rng(config.seed, {kSampleStream, epoch, i});
        results[i] = gumbeldore_sample(*instances[i], snapshot, sampler, rng);
    });

    double best_sampled_sum = 0.0;
    state.last_epoch_samples.assign(count, {});
    for (std::size_t i = 0; i < count; ++i) {
        best_sampled_sum += results[i].best_f;
        state.dataset.entries.push_back({instances[i], results[i].best, results[i].best_f, epoch});
        auto& drawn = state.last_epoch_samples[i];
        drawn.reserve(results[i].samples.size());
        for (auto& s : results[i].samples) drawn.push_back(std::move(s.tokens));
    }

    // Supervised phase on the current policy.
    auto batch_rng = make_rng(config.seed, {kBatchStream, epoch});
    const auto& entries = state.dataset.entries;
    TrainBatch batch(config.batch_size);
    for (std::size_t b = 0; b < config.batches_per_epoch; ++b) {
        for (auto& item : batch) {
            const auto& entry = entries[uniform_index(batch_rng, entries.size())];
            const std::size_t d = uniform_index(batch_rng, entry.trajectory.size());
            item.instance = entry.instance;
            item.prefix.assign(entry.trajectory.begin(), entry.trajectory.begin() + static_cast<std::ptrdiff_t>(d));
            item.target = entry.trajectory[d];
        }
        const auto step = nll_loss_and_grad(state.current, batch);
        sgd_step(state.current, step.grad, config.lr);
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.mean_val_f = validate_greedy(state.current, state.validation, config.workers);
    metrics.mean_best_sampled_f = best_sampled_sum / static_cast<double>(count);
    if (metrics.mean_val_f > state.best_val_f + kPromotionMargin) {
        state.best = state.current;
        state.best_val_f = metrics.mean_val_f;
        state.dataset.entries.clear();
        metrics.promoted = true;
    }
    metrics.best_val_f = state.best_val_f;
    metrics.dataset_size = state.dataset.entries.size();
    metrics.wall_ms = elapsed_ms(started);
    return metrics;
}

TrainingResult run_training(const TrainConfig& config, const EpochCallback& on_epoch,
                            const std::optional<std::filesystem::path>& checkpoint_dir) {
    TrainerState state = initial_state(config);
    TrainingResult result{state.best, state.current, state.best_val_f, state.best_val_f, {}, state.validation};
    if (checkpoint_dir) std::filesystem::create_directories(*checkpoint_dir);
    for (std::size_t e = 0; e < config.epochs; ++e) {
        auto metrics = run_epoch(state, config);
        if (metrics.promoted && checkpoint_dir) {
            const Checkpoint ckpt{state.best, metrics.epoch, state.best_val_f};
            save_checkpoint(*checkpoint_dir / "best.ckpt", ckpt);
            save_checkpoint(*checkpoint_dir / ("epoch_" + std::to_string(metrics.epoch) + ".ckpt"), ckpt);
        }
        if (on_epoch) on_epoch(metrics, state);
        result.log.push_back(metrics);
    }
    result.best = state.best;
    result.current = state.current;
    result.best_val_f = state.best_val_f;
    return result;
}

SigmaGridResult sigma_grid_search(TrainConfig config, std::span<const double> grid, std::size_t warmup_epochs,
                                  std::size_t eval_instances) {
    if (grid.empty()) throw Error("sigma_grid_search: empty grid");
    if (eval_instances == 0) throw Error("sigma_grid_search: need at least one evaluation instance");
    for (double s : grid)
        if (!(s >= 0.0) || !std::isfinite(s)) throw Error("sigma_grid_search: sigma values must be finite and non-negative");

    TrainConfig warmup = config;
    warmup.epochs = warmup_epochs;
    warmup.sampler.sigma = 0.0;
    SigmaGridResult out{run_training(warmup), {}, 0.0};

    std::vector<InstancePtr> instances(eval_instances);
    for (std::size_t i = 0; i < eval_instances; ++i) {
        auto rng = make_rng(config.seed, {kGridStream, i});
        instances[i] = generate_instance(config.problem, config.size, rng);
    }
    double best_score = -std::numeric_limits<double>::infinity();
    for (double sigma : grid) {
        SamplerConfig sampler = config.sampler;
        sampler.sigma = sigma;
        std::vector<double> best_f(eval_instances);
        parallel_for(eval_instances, config.workers, [&](std::size_t i) {
            // Same stream for every sigma: differences come from the update only.
            auto rng = make_rng(config.seed, {kGridStream, eval_instances, i});
            best_f[i] = gumbeldore_sample(*instances[i], out.warmup.best, sampler, rng).best_f;
        });
        const double mean = std::accumulate(best_f.begin(), best_f.end(), 0.0) / static_cast<double>(eval_instances);
        out.grid.push_back({sigma, mean});
        if (mean > best_score || (mean == best_score && sigma < out.selected_sigma)) {
            best_score = mean;
            out.selected_sigma = sigma;
        }
    }
    return out;
}

}  // namespace gumbeldore
