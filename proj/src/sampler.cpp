// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gumbeldore/gumbel.hpp"

namespace gumbeldore {

void SamplerConfig::validate() const {
    if (k == 0) throw Error("sampler: beam width k must be positive");
    if (n == 0) throw Error("sampler: number of rounds n must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error("sampler: sigma must be finite and non-negative");
    if (!(p_min > 0.0 && p_min <= 1.0)) throw Error("sampler: p_min must lie in (0, 1]");
}

std::vector<ScoredToken> nucleus_truncate(std::vector<ScoredToken> cond_weights, double p) {
    log_softmax(cond_weights);
    if (p >= 1.0 || cond_weights.size() <= 1) return cond_weights;

    std::vector<std::size_t> order(cond_weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cond_weights[a].score > cond_weights[b].score; });
    std::vector<bool> keep(cond_weights.size(), false);
    double cumulative = 0.0;
    for (std::size_t idx : order) {
        keep[idx] = true;
        cumulative += std::exp(cond_weights[idx].score);
        if (cumulative >= p - 1e-12) break;
    }
    std::vector<ScoredToken> kept;
    for (std::size_t i = 0; i < cond_weights.size(); ++i)
        if (keep[i]) kept.push_back(cond_weights[i]);
    log_softmax(kept);
    return kept;
}

double nucleus_schedule(std::size_t round_i, std::size_t n, double p_min) {
    if (round_i < 1 || round_i > n) throw Error("nucleus_schedule: round index out of range");
    // A single round is the final round of the schedule.
    if (n == 1) return 1.0;
    const double frac = static_cast<double>(round_i - 1) / static_cast<double>(n - 1);
    return (1.0 - frac) * p_min + frac;
}

namespace {

struct LiveEntry {
    TrieNode* node;
    BeamEntry entry;
};

struct Candidate {
    TrieNode* parent;
    std::size_t child_index;
    BeamEntry entry;
};

bool ranks_before(const BeamEntry& a, const BeamEntry& b) {
    if (a.g != b.g) return a.g > b.g;
    return a.prefix < b.prefix;
}

}  // namespace

std::vector<BeamEntry> sbs_round(SearchTrie& trie, const SequencePolicy& policy, const Instance& instance,
                                 std::size_t k, double p, Rng& rng) {
    if (k == 0) throw Error("sbs_round: beam width must be positive");
    if (trie.root().depleted) throw Error("sbs_round: trie root is depleted");

    // The root's perturbed score is itself a Gumbel(0) draw; the estimator's
    // threshold probabilities assume unconditioned scores at the top.
    std::vector<LiveEntry> beam{{&trie.root(), BeamEntry{{}, 0.0, sample_gumbel(0.0, rng)}}};
    std::vector<Candidate> candidates;
    std::vector<double> locations;
    for (std::size_t depth = 0; depth < trie.horizon(); ++depth) {
        candidates.clear();
        for (auto& live : beam) {
            trie.ensure_expanded(*live.node, policy, instance, live.entry.prefix);
            const auto probs = nucleus_truncate(trie.adjusted_child_weights(*live.node), p);
            locations.resize(probs.size());
            for (std::size_t i = 0; i < probs.size(); ++i) locations[i] = live.entry.phi + probs[i].score;
            const auto scores = gumbels_with_max(locations, live.entry.g, rng);
            for (std::size_t i = 0; i < probs.size(); ++i) {
                Candidate c{live.node, *live.node->child_index(probs[i].token), {live.entry.prefix, locations[i], scores[i]}};
                c.entry.prefix.push_back(probs[i].token);
                candidates.push_back(std::move(c));
            }
        }
        const auto by_rank = [](const Candidate& a, const Candidate& b) { return ranks_before(a.entry, b.entry); };
        if (candidates.size() > k) {
            std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(), by_rank);
            candidates.resize(k);
        } else {
            std::sort(candidates.begin(), candidates.end(), by_rank);
        }
        std::vector<LiveEntry> next;
        next.reserve(candidates.size());
        for (auto& c : candidates) next.push_back({&trie.child_at(*c.parent, c.child_index), std::move(c.entry)});
        beam = std::move(next);
    }

    std::vector<BeamEntry> out;
    out.reserve(beam.size());
    for (auto& live : beam) out.push_back(std::move(live.entry));
    return out;
}

SamplingResult gumbeldore_sample(const Instance& instance, const SequencePolicy& policy,
                                 const SamplerConfig& config, Rng& rng, const RoundObserver& observer) {
    config.validate();
    SearchTrie trie(instance.horizon());
    SamplingResult result;
    for (std::size_t round = 1; round <= config.n; ++round) {
        if (trie.root().depleted) break;
        const double p = nucleus_schedule(round, config.n, config.p_min);
        auto beam = sbs_round(trie, policy, instance, config.k, p, rng);

        std::vector<SampledTrajectory> drawn;
        drawn.reserve(beam.size());
        for (auto& e : beam) {
            const double f = instance.objective(e.prefix);
            drawn.push_back({std::move(e.prefix), e.phi, e.g, f});
        }
        const double mu = estimate_expectation(drawn).normalized;
        trie.commit_round(drawn, mu, config.sigma, config.mode);
        if (observer) observer(trie, round);

        for (auto& s : drawn) {
            if (s.f > result.best_f) {
                result.best_f = s.f;
                result.best = s.tokens;
            }
        }
        result.round_sizes.push_back(drawn.size());
        std::move(drawn.begin(), drawn.end(), std::back_inserter(result.samples));
    }
    result.policy_calls = trie.policy_calls();
    return result;
}

std::vector<Trajectory> sample_wr(const Instance& instance, const SequencePolicy& policy, std::size_t m, Rng& rng) {
    std::vector<Trajectory> out;
    out.reserve(m);
    const std::size_t horizon = instance.horizon();
    for (std::size_t r = 0; r < m; ++r) {
        Trajectory traj;
        traj.reserve(horizon);
        while (traj.size() < horizon) {
            auto logits = policy.conditional_logits(instance, traj);
            if (logits.empty()) throw Error("sample_wr: policy returned an empty feasible set");
            log_softmax(logits);
            const double u = uniform01(rng);
            double cumulative = 0.0;
            Token pick = logits.back().token;
            for (const auto& s : logits) {
                cumulative += std::exp(s.score);
                if (u < cumulative) {
                    pick = s.token;
                    break;
                }
            }
            traj.push_back(pick);
        }
        out.push_back(std::move(traj));
    }
    return out;
}

}  // namespace gumbeldore
