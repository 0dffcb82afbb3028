// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "gumbeldore/core.hpp"
#include "gumbeldore/estimator.hpp"
#include "gumbeldore/rng.hpp"
#include "gumbeldore/trie.hpp"

namespace gumbeldore {

/// Partial trajectory in the beam: phi is its total log-probability under
/// the round's (possibly truncated) trie policy, g its perturbed score.
struct BeamEntry {
    Trajectory prefix;
    double phi = 0.0;
    double g = 0.0;
};

struct SamplerConfig {
    std::size_t k = 32;       // beam width
    std::size_t n = 4;        // rounds
    double sigma = 0.0;       // advantage step size
    double p_min = 1.0;       // nucleus size of the first round
    UpdateMode mode = UpdateMode::gd;
    std::uint64_t seed = 0;

    /// Throws on k = 0, n = 0, sigma < 0 or p_min outside (0, 1].
    void validate() const;
};

/// Smallest set of highest-probability tokens whose cumulative probability
/// reaches p, renormalized. Tokens keep their input order. Input scores are
/// unnormalized log-weights; output scores are normalized log-probabilities.
std::vector<ScoredToken> nucleus_truncate(std::vector<ScoredToken> cond_weights, double p);

/// Linear nucleus growth from p_min in round 1 to 1 in round n.
double nucleus_schedule(std::size_t round_i, std::size_t n, double p_min);

/// One round of stochastic beam search over the trie. Returns up to k
/// complete entries sorted by g descending (ties: lexicographic tokens).
std::vector<BeamEntry> sbs_round(SearchTrie& trie, const SequencePolicy& policy, const Instance& instance,
                                 std::size_t k, double p, Rng& rng);

struct SamplingResult {
    Trajectory best;
    double best_f = kNegInf;
    std::vector<SampledTrajectory> samples;  // all rounds, in draw order
    std::vector<std::size_t> round_sizes;
    std::size_t policy_calls = 0;
};

/// Called after each round's commit with the trie and the 1-based round index.
using RoundObserver = std::function<void(const SearchTrie&, std::size_t)>;

/// Round-wise SBS over one trie with advantage-based trie updates between
/// rounds and a growing nucleus.
SamplingResult gumbeldore_sample(const Instance& instance, const SequencePolicy& policy,
                                 const SamplerConfig& config, Rng& rng, const RoundObserver& observer = {});

/// Ancestral sampling with replacement: m independent rollouts.
std::vector<Trajectory> sample_wr(const Instance& instance, const SequencePolicy& policy, std::size_t m, Rng& rng);

}  // namespace gumbeldore
