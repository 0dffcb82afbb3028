// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gumbeldore/selfimprove.hpp"

namespace gumbeldore {

/// Sampling methods compared head to head at equal sample budgets k·n.
///  - wr: k·n i.i.d. rollouts
///  - wor: round-wise SBS, mass removal only, no nucleus
///  - wor_nucleus: as wor with the growing nucleus from p_min
///  - gd: advantage trie update with the growing nucleus
///  - theory_gd: local-advantage trie update with the growing nucleus
enum class SamplingMethod { wr, wor, wor_nucleus, gd, theory_gd };

std::string to_string(SamplingMethod method);
SamplingMethod parse_sampling_method(const std::string& name);
std::vector<SamplingMethod> all_sampling_methods();

struct CompareConfig {
    std::vector<SamplingMethod> methods = all_sampling_methods();
    std::size_t k = 32;
    std::size_t max_rounds = 4;
    /// When set, only this round count is run instead of 1..max_rounds.
    bool only_max_rounds = false;
    double sigma = 0.3;
    double p_min = 0.95;
    std::size_t repetitions = 20;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool timing = false;
};

struct CompareRecord {
    SamplingMethod method;
    std::size_t k = 0;
    std::size_t n = 0;
    double sigma = 0.0;
    double p_min = 1.0;
    std::size_t instance_id = 0;
    std::size_t repetition = 0;
    double best_f = 0.0;
    std::size_t num_samples = 0;
    std::size_t num_unique = 0;
    double wall_ms = 0.0;
};

struct CompareSummary {
    SamplingMethod method;
    std::size_t n = 0;
    double mean_best_f = 0.0;  // mean over repetitions of the per-repetition instance mean
    double std_err = 0.0;
    std::vector<double> per_repetition;  // instance-mean best f per repetition
};

struct CompareResult {
    std::vector<CompareRecord> records;  // ordered by (method, n, repetition, instance)
    std::vector<CompareSummary> summaries;
};

/// Every (repetition, instance) pair draws from one RNG stream shared by all
/// methods and round counts, so single-round rows coincide by construction.
CompareResult compare_samplers(const SequencePolicy& policy, std::span<const InstancePtr> instances,
                               const CompareConfig& config);

/// One-sided sign test: P(X ≥ wins) for X ~ Binomial(trials, 1/2).
double sign_test_p_value(std::size_t wins, std::size_t trials);

}  // namespace gumbeldore
