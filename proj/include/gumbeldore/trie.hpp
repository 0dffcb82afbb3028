// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gumbeldore/core.hpp"
#include "gumbeldore/estimator.hpp"

namespace gumbeldore {

/// How committed trajectories reshape the trie policy between rounds.
///  - none: mass removal only (plain round-wise sampling without replacement)
///  - gd: every node on a path gains sigma * (f - mu), the global advantage
///  - theory_gd: every node gains sigma * (E[f | node] - E[f | parent]),
///    estimated from the round's shared-prefix subsets
enum class UpdateMode { none, gd, theory_gd };

std::string to_string(UpdateMode mode);
UpdateMode parse_update_mode(const std::string& name);

/// Relative tolerance below which remaining mass counts as exhausted.
inline constexpr double kDepletionLogTolerance = 1e-12;

/// Trie bookkeeping for one prefix. Masses are totals in the original model's
/// measure; the bonus is an additive logit shift.
struct TrieNode {
    std::optional<Token> edge_token;
    std::size_t depth = 0;

    bool expanded = false;
    std::vector<ScoredToken> cond_logits;  // policy output, sorted by token
    std::vector<double> child_log_cond;    // original log-conditionals, aligned with cond_logits
    std::vector<std::unique_ptr<TrieNode>> children;

    double log_orig_mass = 0.0;
    double log_sampled_mass = kNegInf;
    double bonus = 0.0;
    bool depleted = false;

    /// Index of `token` among cond_logits, if expanded and feasible.
    std::optional<std::size_t> child_index(Token token) const;
    const TrieNode* child(Token token) const;
};

/// Augmented search trie shared by all rounds of one sampling run.
class SearchTrie {
public:
    explicit SearchTrie(std::size_t horizon);

    std::size_t horizon() const { return horizon_; }
    TrieNode& root() { return *root_; }
    const TrieNode& root() const { return *root_; }

    /// Queries the policy on first visit only and caches the logits.
    const std::vector<ScoredToken>& ensure_expanded(TrieNode& node, const SequencePolicy& policy,
                                                    const Instance& instance, TokenView prefix);

    /// Child node for an expanded node's `index`-th feasible token, created on demand.
    TrieNode& child_at(TrieNode& node, std::size_t index);

    /// Node reached by `path`, or nullptr if not instantiated.
    const TrieNode* find(TokenView path) const;

    /// Unnormalized log-weights log R(child) + B(child) of non-depleted children.
    std::vector<ScoredToken> adjusted_child_weights(const TrieNode& node) const;

    /// Removes the round's trajectories from the trie and applies the bonus
    /// for `mode`. Entries must be sorted by g descending.
    void commit_round(std::span<const SampledTrajectory> sampled, double mu, double sigma, UpdateMode mode);

    /// Fully expands the trie and returns the current trie-policy distribution
    /// over unsampled leaves. Refuses instances with more than `max_leaves`.
    std::map<Trajectory, double> exact_leaf_distribution(const SequencePolicy& policy, const Instance& instance,
                                                         std::size_t max_leaves = 100000);

    /// Visits every instantiated node with its path.
    void for_each_node(const std::function<void(const TrieNode&, TokenView)>& visit) const;

    /// Indented text tree: one line per node with token, remaining mass R,
    /// bonus B and depletion flag.
    void dump(std::ostream& out) const;

    std::size_t policy_calls() const { return policy_calls_; }
    std::size_t node_count() const { return node_count_; }

private:
    TrieNode& require_path(TokenView path);
    void refresh_depletion(TrieNode& node) const;

    std::size_t horizon_;
    std::unique_ptr<TrieNode> root_;
    std::size_t policy_calls_ = 0;
    std::size_t node_count_ = 1;
};

/// log(exp(log_orig_mass) − exp(log_sampled_mass)); −∞ once depleted.
double remaining_log_mass(const TrieNode& node);

}  // namespace gumbeldore
