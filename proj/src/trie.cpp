// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/trie.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gumbeldore {

std::string to_string(UpdateMode mode) {
    switch (mode) {
        case UpdateMode::none: return "none";
        case UpdateMode::gd: return "gd";
        case UpdateMode::theory_gd: return "theory";
    }
    return "none";
}

UpdateMode parse_update_mode(const std::string& name) {
    if (name == "none") return UpdateMode::none;
    if (name == "gd") return UpdateMode::gd;
    if (name == "theory" || name == "theory_gd") return UpdateMode::theory_gd;
    throw Error("unknown update mode '" + name + "'");
}

std::optional<std::size_t> TrieNode::child_index(Token token) const {
    if (!expanded) return std::nullopt;
    const auto it = std::lower_bound(cond_logits.begin(), cond_logits.end(), token,
                                     [](const ScoredToken& s, Token t) { return s.token < t; });
    if (it == cond_logits.end() || it->token != token) return std::nullopt;
    return static_cast<std::size_t>(it - cond_logits.begin());
}

const TrieNode* TrieNode::child(Token token) const {
    const auto idx = child_index(token);
    return idx ? children[*idx].get() : nullptr;
}

double remaining_log_mass(const TrieNode& node) {
    if (node.depleted) return kNegInf;
    return log_diff_exp(node.log_orig_mass, node.log_sampled_mass);
}

SearchTrie::SearchTrie(std::size_t horizon) : horizon_(horizon), root_(std::make_unique<TrieNode>()) {}

const std::vector<ScoredToken>& SearchTrie::ensure_expanded(TrieNode& node, const SequencePolicy& policy,
                                                            const Instance& instance, TokenView prefix) {
    if (node.expanded) return node.cond_logits;
    if (node.depth >= horizon_) throw Error("ensure_expanded: node is a complete trajectory");
    auto logits = policy.conditional_logits(instance, prefix);
    ++policy_calls_;
    if (logits.empty()) throw Error("ensure_expanded: policy returned an empty feasible set");
    std::sort(logits.begin(), logits.end(), [](const ScoredToken& a, const ScoredToken& b) { return a.token < b.token; });

    auto log_cond = logits;
    log_softmax(log_cond);
    node.child_log_cond.resize(logits.size());
    std::transform(log_cond.begin(), log_cond.end(), node.child_log_cond.begin(),
                   [](const ScoredToken& s) { return s.score; });
    node.cond_logits = std::move(logits);
    node.children.clear();
    node.children.resize(node.cond_logits.size());
    node.expanded = true;
    return node.cond_logits;
}

TrieNode& SearchTrie::child_at(TrieNode& node, std::size_t index) {
    if (!node.expanded || index >= node.children.size()) throw Error("child_at: node not expanded or index out of range");
    auto& slot = node.children[index];
    if (!slot) {
        slot = std::make_unique<TrieNode>();
        slot->edge_token = node.cond_logits[index].token;
        slot->depth = node.depth + 1;
        slot->log_orig_mass = node.log_orig_mass + node.child_log_cond[index];
        ++node_count_;
    }
    return *slot;
}

const TrieNode* SearchTrie::find(TokenView path) const {
    const TrieNode* node = root_.get();
    for (Token t : path) {
        node = node->child(t);
        if (!node) return nullptr;
    }
    return node;
}

TrieNode& SearchTrie::require_path(TokenView path) {
    TrieNode* node = root_.get();
    for (std::size_t d = 0; d < path.size(); ++d) {
        const auto idx = node->child_index(path[d]);
        if (!idx || !node->children[*idx]) throw Error("commit_round: trajectory path not present in trie");
        node = node->children[*idx].get();
    }
    return *node;
}

std::vector<ScoredToken> SearchTrie::adjusted_child_weights(const TrieNode& node) const {
    if (!node.expanded) throw Error("adjusted_child_weights: node not expanded");
    std::vector<ScoredToken> out;
    out.reserve(node.cond_logits.size());
    for (std::size_t i = 0; i < node.cond_logits.size(); ++i) {
        const Token token = node.cond_logits[i].token;
        if (const auto* c = node.children[i].get()) {
            if (c->depleted) continue;
            out.push_back({token, remaining_log_mass(*c) + c->bonus});
        } else {
            out.push_back({token, node.log_orig_mass + node.child_log_cond[i]});
        }
    }
    if (out.empty()) throw Error("adjusted_child_weights: all children depleted");
    return out;
}

void SearchTrie::refresh_depletion(TrieNode& node) const {
    if (node.log_sampled_mass >= node.log_orig_mass - kDepletionLogTolerance) {
        node.depleted = true;
        return;
    }
    if (!node.expanded) {
        node.depleted = false;
        return;
    }
    node.depleted = std::all_of(node.children.begin(), node.children.end(),
                                [](const std::unique_ptr<TrieNode>& c) { return c && c->depleted; });
}

void SearchTrie::commit_round(std::span<const SampledTrajectory> sampled, double mu, double sigma,
                              UpdateMode mode) {
    std::vector<std::vector<TrieNode*>> paths;
    paths.reserve(sampled.size());
    for (const auto& s : sampled) {
        if (s.tokens.size() != horizon_) throw Error("commit_round: trajectory is not complete");
        std::vector<TrieNode*> path{root_.get()};
        for (Token t : s.tokens) {
            TrieNode* cur = path.back();
            const auto idx = cur->child_index(t);
            if (!idx || !cur->children[*idx]) throw Error("commit_round: trajectory path not present in trie");
            path.push_back(cur->children[*idx].get());
        }
        TrieNode* leaf = path.back();
        if (leaf->depleted || leaf->log_sampled_mass != kNegInf)
            throw Error("commit_round: trajectory already sampled");
        const double mass = leaf->log_orig_mass;
        for (TrieNode* node : path) node->log_sampled_mass = log_add_exp(node->log_sampled_mass, mass);
        if (mode == UpdateMode::gd) {
            const double shift = sigma * (s.f - mu);
            for (TrieNode* node : path) node->bonus += shift;
        }
        paths.push_back(std::move(path));
    }

    if (mode == UpdateMode::theory_gd && sigma != 0.0) {
        // Shared-prefix subsets S(b); insertion keeps the g-descending order.
        std::map<Trajectory, std::vector<SampledTrajectory>> subsets;
        for (const auto& s : sampled)
            for (std::size_t d = 0; d <= s.tokens.size(); ++d)
                subsets[Trajectory(s.tokens.begin(), s.tokens.begin() + static_cast<std::ptrdiff_t>(d))].push_back(s);
        std::map<Trajectory, double> estimates;
        for (const auto& [prefix, members] : subsets) estimates[prefix] = conditional_expectation(members);

        for (const auto& [prefix, members] : subsets) {
            if (prefix.empty()) continue;
            const Trajectory parent(prefix.begin(), prefix.end() - 1);
            if (subsets.at(parent).size() < 2) continue;  // no local contrast available
            require_path(prefix).bonus += sigma * (estimates.at(prefix) - estimates.at(parent));
        }
    }

    for (auto& path : paths)
        for (auto it = path.rbegin(); it != path.rend(); ++it) refresh_depletion(**it);
}

std::map<Trajectory, double> SearchTrie::exact_leaf_distribution(const SequencePolicy& policy,
                                                                 const Instance& instance,
                                                                 std::size_t max_leaves) {
    std::map<Trajectory, double> out;
    if (root_->depleted) return out;
    std::size_t leaves_seen = 0;
    Trajectory prefix;
    std::function<void(TrieNode&, double)> visit = [&](TrieNode& node, double log_p) {
        if (node.depth == horizon_) {
            if (++leaves_seen > max_leaves) throw Error("exact_leaf_distribution: instance too large to enumerate");
            out[prefix] = std::exp(log_p);
            return;
        }
        ensure_expanded(node, policy, instance, prefix);
        for (std::size_t i = 0; i < node.children.size(); ++i) child_at(node, i);
        auto weights = adjusted_child_weights(node);
        log_softmax(weights);
        for (const auto& w : weights) {
            TrieNode& child = *node.children[*node.child_index(w.token)];
            prefix.push_back(w.token);
            visit(child, log_p + w.score);
            prefix.pop_back();
        }
    };
    visit(*root_, 0.0);
    return out;
}

void SearchTrie::for_each_node(const std::function<void(const TrieNode&, TokenView)>& visit) const {
    Trajectory prefix;
    std::function<void(const TrieNode&)> walk = [&](const TrieNode& node) {
        visit(node, prefix);
        for (const auto& c : node.children) {
            if (!c) continue;
            prefix.push_back(*c->edge_token);
            walk(*c);
            prefix.pop_back();
        }
    };
    walk(*root_);
}

void SearchTrie::dump(std::ostream& out) const {
    for_each_node([&](const TrieNode& node, TokenView path) {
        char line[160];
        const double remaining = std::exp(remaining_log_mass(node));
        if (path.empty()) {
            std::snprintf(line, sizeof line, "root R=%.6f B=%.6f%s\n", remaining, node.bonus,
                          node.depleted ? " depleted" : "");
        } else {
            std::snprintf(line, sizeof line, "%*s%u R=%.6f B=%.6f%s\n", static_cast<int>(2 * path.size()), "",
                          static_cast<unsigned>(path.back()), remaining, node.bonus, node.depleted ? " depleted" : "");
        }
        out << line;
    });
}

}  // namespace gumbeldore
