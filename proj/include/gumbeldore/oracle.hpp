// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force ground truths. Everything here is computed by direct
// enumeration with its own arithmetic, sharing nothing with the sampling
// engine beyond <cmath>.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "gumbeldore/core.hpp"
#include "gumbeldore/problems/jssp.hpp"
#include "gumbeldore/problems/tsp.hpp"
#include "gumbeldore/rng.hpp"

namespace gumbeldore::oracle {

/// Explicit sequence model: per-prefix conditional probabilities over
/// tokens 0..b−1 and an objective value per complete leaf.
struct EnumerableModel {
    static constexpr std::size_t kMaxDepth = 6;
    static constexpr std::size_t kMaxBranching = 4;

    std::size_t depth = 0;
    std::map<Trajectory, std::vector<double>> conditionals;
    std::map<Trajectory, double> leaf_f;

    const std::vector<double>& conditional(const Trajectory& prefix) const { return conditionals.at(prefix); }
    std::size_t leaf_count() const { return leaf_f.size(); }
    /// Throws unless every prefix's conditionals sum to 1 and all leaves exist.
    void validate() const;
};

/// Random tree with branching drawn from [min_branching, max_branching] per
/// node, softmax(temperature · N(0,1)) conditionals and f ~ U(f_lo, f_hi).
EnumerableModel random_model(Rng& rng, std::size_t depth, std::size_t min_branching, std::size_t max_branching,
                             double temperature = 1.5, double f_lo = -2.0, double f_hi = -1.0);

/// Uniform conditionals with fixed branching and f = 0.
EnumerableModel uniform_model(std::size_t depth, std::size_t branching);

/// Exact product-of-conditionals distribution over all leaves.
std::map<Trajectory, double> enumerate_leaf_distribution(const EnumerableModel& model);

double exact_expectation(const EnumerableModel& model);

/// E[f | prefix] under the model.
double exact_conditional_expectation(const EnumerableModel& model, const Trajectory& prefix);

/// Shifts the logit of each token on `trajectory` by
/// sigma · (E[f | a_{1:i}] − E[f | a_{1:i−1}]) with exact expectations, then
/// renormalizes every touched node.
EnumerableModel apply_trajectory_update(const EnumerableModel& model, const Trajectory& trajectory, double sigma);

/// Single-logit categorical update: logit(j) += q(j) − E_π[q].
std::vector<double> lemma_update(const std::vector<double>& probs, const std::vector<double>& q, std::size_t j);

/// Leaf distribution of the trie policy obtained from `model` after
/// removing `removed` leaves and adding `node_bonus` to node logits,
/// evaluated directly: each child weighs (π(child) − Σ_removed π(leaf))·e^B.
std::map<Trajectory, double> symbolic_trie_distribution(const EnumerableModel& model,
                                                        const std::set<Trajectory>& removed,
                                                        const std::map<Trajectory, double>& node_bonus);

/// Exact shortest closed tour length by bitmask dynamic programming. N ≤ 16.
double held_karp(const TspInstance& instance);

/// Makespan from an event-driven simulation: each machine serves its
/// operations in sequence order, starting one as soon as the machine is idle
/// and the job's previous operation has completed.
std::int64_t event_simulation_makespan(const JsspInstance& instance, TokenView sequence);

/// Adapter exposing a model as an instance: feasible tokens are the
/// model's children, f is the leaf value.
class EnumerableInstance final : public Instance {
public:
    explicit EnumerableInstance(std::shared_ptr<const EnumerableModel> model);

    std::size_t horizon() const override { return model_->depth; }
    std::size_t action_space() const override { return EnumerableModel::kMaxBranching; }
    std::vector<Token> feasible_tokens(TokenView prefix) const override;
    double objective(TokenView trajectory) const override;

    const EnumerableModel& model() const { return *model_; }

private:
    std::shared_ptr<const EnumerableModel> model_;
};

/// Policy whose logits are the model's log-probabilities.
class ModelPolicy final : public SequencePolicy {
public:
    explicit ModelPolicy(std::shared_ptr<const EnumerableModel> model) : model_(std::move(model)) {}
    std::vector<ScoredToken> conditional_logits(const Instance& instance, TokenView prefix) const override;

private:
    std::shared_ptr<const EnumerableModel> model_;
};

}  // namespace gumbeldore::oracle
