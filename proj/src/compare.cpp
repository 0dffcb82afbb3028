// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/compare.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "gumbeldore/parallel.hpp"

namespace gumbeldore {

std::string to_string(SamplingMethod method) {
    switch (method) {
        case SamplingMethod::wr: return "wr";
        case SamplingMethod::wor: return "wor";
        case SamplingMethod::wor_nucleus: return "wor_nucleus";
        case SamplingMethod::gd: return "gd";
        case SamplingMethod::theory_gd: return "theory_gd";
    }
    return "wr";
}

SamplingMethod parse_sampling_method(const std::string& name) {
    for (auto m : all_sampling_methods())
        if (to_string(m) == name) return m;
    throw Error("unknown sampling method '" + name + "'");
}

std::vector<SamplingMethod> all_sampling_methods() {
    return {SamplingMethod::wr, SamplingMethod::wor, SamplingMethod::wor_nucleus, SamplingMethod::gd,
            SamplingMethod::theory_gd};
}

namespace {

struct RunOutcome {
    double best_f;
    std::size_t num_samples;
    std::size_t num_unique;
};

RunOutcome run_method(SamplingMethod method, const Instance& instance, const SequencePolicy& policy,
                      const CompareConfig& config, std::size_t rounds, Rng rng) {
    if (method == SamplingMethod::wr) {
        const auto drawn = sample_wr(instance, policy, config.k * rounds, rng);
        double best = kNegInf;
        for (const auto& t : drawn) best = std::max(best, instance.objective(t));
        const std::set<Trajectory> unique(drawn.begin(), drawn.end());
        return {best, drawn.size(), unique.size()};
    }
    SamplerConfig sampler{config.k, rounds, 0.0, 1.0, UpdateMode::none, config.seed};
    switch (method) {
        case SamplingMethod::wor_nucleus: sampler.p_min = config.p_min; break;
        case SamplingMethod::gd:
            sampler.p_min = config.p_min;
            sampler.sigma = config.sigma;
            sampler.mode = UpdateMode::gd;
            break;
        case SamplingMethod::theory_gd:
            sampler.p_min = config.p_min;
            sampler.sigma = config.sigma;
            sampler.mode = UpdateMode::theory_gd;
            break;
        default: break;
    }
    const auto result = gumbeldore_sample(instance, policy, sampler, rng);
    std::set<Trajectory> unique;
    for (const auto& s : result.samples) unique.insert(s.tokens);
    return {result.best_f, result.samples.size(), unique.size()};
}

}  // namespace

CompareResult compare_samplers(const SequencePolicy& policy, std::span<const InstancePtr> instances,
                               const CompareConfig& config) {
    if (instances.empty()) throw Error("compare_samplers: no instances");
    if (config.k == 0 || config.max_rounds == 0 || config.repetitions == 0)
        throw Error("compare_samplers: k, rounds and repetitions must be positive");

    std::vector<std::size_t> round_counts;
    for (std::size_t n = config.only_max_rounds ? config.max_rounds : 1; n <= config.max_rounds; ++n)
        round_counts.push_back(n);

    const std::size_t per_setting = config.repetitions * instances.size();
    const std::size_t settings = config.methods.size() * round_counts.size();
    CompareResult out;
    out.records.resize(settings * per_setting);

    parallel_for(per_setting, config.workers, [&](std::size_t job) {
        const std::size_t rep = job / instances.size();
        const std::size_t inst = job % instances.size();
        const Rng base = make_rng(config.seed, {rep, inst});
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            for (std::size_t r = 0; r < round_counts.size(); ++r) {
                const auto started = std::chrono::steady_clock::now();
                const auto outcome = run_method(config.methods[m], *instances[inst], policy, config, round_counts[r], base);
                const double ms = config.timing
                                      ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count()
                                      : 0.0;
                const bool wr = config.methods[m] == SamplingMethod::wr;
                const bool nucleus = !wr && config.methods[m] != SamplingMethod::wor;
                out.records[(m * round_counts.size() + r) * per_setting + job] = {
                    config.methods[m], config.k, round_counts[r],
                    (config.methods[m] == SamplingMethod::gd || config.methods[m] == SamplingMethod::theory_gd) ? config.sigma : 0.0,
                    nucleus ? config.p_min : 1.0, inst, rep, outcome.best_f, outcome.num_samples, outcome.num_unique, ms};
            }
        }
    });

    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        for (std::size_t r = 0; r < round_counts.size(); ++r) {
            CompareSummary summary{config.methods[m], round_counts[r], 0.0, 0.0, std::vector<double>(config.repetitions, 0.0)};
            const std::size_t offset = (m * round_counts.size() + r) * per_setting;
            for (std::size_t job = 0; job < per_setting; ++job)
                summary.per_repetition[job / instances.size()] += out.records[offset + job].best_f;
            for (double& v : summary.per_repetition) v /= static_cast<double>(instances.size());
            double mean = 0.0;
            for (double v : summary.per_repetition) mean += v;
            mean /= static_cast<double>(config.repetitions);
            double var = 0.0;
            for (double v : summary.per_repetition) var += (v - mean) * (v - mean);
            const double reps = static_cast<double>(config.repetitions);
            summary.mean_best_f = mean;
            summary.std_err = config.repetitions > 1 ? std::sqrt(var / (reps - 1.0) / reps) : 0.0;
            out.summaries.push_back(std::move(summary));
        }
    }
    return out;
}

double sign_test_p_value(std::size_t wins, std::size_t trials) {
    if (wins > trials) throw Error("sign_test_p_value: wins exceed trials");
    // Σ_{i ≥ wins} C(trials, i) / 2^trials, accumulated in log space.
    double p = 0.0;
    for (std::size_t i = wins; i <= trials; ++i) {
        const double log_c = std::lgamma(static_cast<double>(trials) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                             std::lgamma(static_cast<double>(trials - i) + 1.0);
        p += std::exp(log_c - static_cast<double>(trials) * std::log(2.0));
    }
    return std::min(p, 1.0);
}

}  // namespace gumbeldore
