// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

namespace gumbeldore::oracle {

namespace {

double standard_normal(Rng& rng) {
    // Box–Muller on the portable uniform.
    const double u1 = std::max(uniform01(rng), 1e-300);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::vector<double> normalized_exp(const std::vector<double>& logits) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double l : logits) peak = std::max(peak, l);
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) total += out[i] = std::exp(logits[i] - peak);
    for (double& v : out) v /= total;
    return out;
}

Trajectory extended(const Trajectory& prefix, Token t) {
    Trajectory out = prefix;
    out.push_back(t);
    return out;
}

bool has_prefix(const Trajectory& seq, const Trajectory& prefix) {
    return seq.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), seq.begin());
}

}  // namespace

void EnumerableModel::validate() const {
    if (depth == 0 || depth > kMaxDepth) throw Error("EnumerableModel: depth out of range");
    std::function<void(const Trajectory&)> walk = [&](const Trajectory& prefix) {
        if (prefix.size() == depth) {
            if (!leaf_f.count(prefix)) throw Error("EnumerableModel: missing leaf value");
            return;
        }
        const auto it = conditionals.find(prefix);
        if (it == conditionals.end() || it->second.empty() || it->second.size() > kMaxBranching)
            throw Error("EnumerableModel: missing or oversized conditional");
        double total = 0.0;
        for (double p : it->second) {
            if (!(p > 0.0)) throw Error("EnumerableModel: unreachable child");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw Error("EnumerableModel: conditional does not sum to 1");
        for (Token t = 0; t < it->second.size(); ++t) walk(extended(prefix, t));
    };
    walk({});
}

EnumerableModel random_model(Rng& rng, std::size_t depth, std::size_t min_branching, std::size_t max_branching,
                             double temperature, double f_lo, double f_hi) {
    if (min_branching < 1 || max_branching < min_branching || max_branching > EnumerableModel::kMaxBranching)
        throw Error("random_model: bad branching range");
    EnumerableModel model;
    model.depth = depth;
    std::function<void(const Trajectory&)> build = [&](const Trajectory& prefix) {
        if (prefix.size() == depth) {
            model.leaf_f[prefix] = f_lo + (f_hi - f_lo) * uniform01(rng);
            return;
        }
        const std::size_t b = min_branching + uniform_index(rng, max_branching - min_branching + 1);
        std::vector<double> logits(b);
        for (double& l : logits) l = temperature * standard_normal(rng);
        model.conditionals[prefix] = normalized_exp(logits);
        for (Token t = 0; t < b; ++t) build(extended(prefix, t));
    };
    build({});
    return model;
}

EnumerableModel uniform_model(std::size_t depth, std::size_t branching) {
    EnumerableModel model;
    model.depth = depth;
    std::function<void(const Trajectory&)> build = [&](const Trajectory& prefix) {
        if (prefix.size() == depth) {
            model.leaf_f[prefix] = 0.0;
            return;
        }
        model.conditionals[prefix] = std::vector<double>(branching, 1.0 / static_cast<double>(branching));
        for (Token t = 0; t < branching; ++t) build(extended(prefix, t));
    };
    build({});
    return model;
}

std::map<Trajectory, double> enumerate_leaf_distribution(const EnumerableModel& model) {
    std::map<Trajectory, double> out;
    std::function<void(const Trajectory&, double)> walk = [&](const Trajectory& prefix, double p) {
        if (prefix.size() == model.depth) {
            out[prefix] = p;
            return;
        }
        const auto& cond = model.conditional(prefix);
        for (Token t = 0; t < cond.size(); ++t) walk(extended(prefix, t), p * cond[t]);
    };
    walk({}, 1.0);
    return out;
}

double exact_conditional_expectation(const EnumerableModel& model, const Trajectory& prefix) {
    if (prefix.size() == model.depth) return model.leaf_f.at(prefix);
    const auto& cond = model.conditional(prefix);
    double total = 0.0;
    for (Token t = 0; t < cond.size(); ++t) total += cond[t] * exact_conditional_expectation(model, extended(prefix, t));
    return total;
}

double exact_expectation(const EnumerableModel& model) { return exact_conditional_expectation(model, {}); }

EnumerableModel apply_trajectory_update(const EnumerableModel& model, const Trajectory& trajectory, double sigma) {
    if (trajectory.size() != model.depth) throw Error("apply_trajectory_update: trajectory must be complete");
    EnumerableModel updated = model;
    Trajectory parent;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const auto& cond = model.conditional(parent);
        const Token a = trajectory[i];
        if (a >= cond.size()) throw Error("apply_trajectory_update: trajectory not in model");
        const Trajectory child = extended(parent, a);
        const double advantage = exact_conditional_expectation(model, child) - exact_conditional_expectation(model, parent);
        std::vector<double> logits(cond.size());
        for (std::size_t t = 0; t < cond.size(); ++t) logits[t] = std::log(cond[t]);
        logits[a] += sigma * advantage;
        updated.conditionals[parent] = normalized_exp(logits);
        parent = child;
    }
    return updated;
}

std::vector<double> lemma_update(const std::vector<double>& probs, const std::vector<double>& q, std::size_t j) {
    double mean_q = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) mean_q += probs[i] * q[i];
    std::vector<double> logits(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) logits[i] = std::log(probs[i]);
    logits[j] += q[j] - mean_q;
    return normalized_exp(logits);
}

std::map<Trajectory, double> symbolic_trie_distribution(const EnumerableModel& model,
                                                        const std::set<Trajectory>& removed,
                                                        const std::map<Trajectory, double>& node_bonus) {
    const auto original = enumerate_leaf_distribution(model);
    std::map<Trajectory, double> out;
    std::function<void(const Trajectory&, double, double)> walk = [&](const Trajectory& prefix, double p_orig,
                                                                      double p_trie) {
        if (prefix.size() == model.depth) {
            out[prefix] = p_trie;
            return;
        }
        const auto& cond = model.conditional(prefix);
        std::vector<double> weight(cond.size(), 0.0);
        double total = 0.0;
        for (Token t = 0; t < cond.size(); ++t) {
            const Trajectory child = extended(prefix, t);
            const double mass = p_orig * cond[t];
            double removed_mass = 0.0;
            for (const auto& leaf : removed)
                if (has_prefix(leaf, child)) removed_mass += original.at(leaf);
            const double remaining = mass - removed_mass;
            if (remaining <= 1e-12 * mass) continue;
            const auto b = node_bonus.find(child);
            weight[t] = remaining * std::exp(b == node_bonus.end() ? 0.0 : b->second);
            total += weight[t];
        }
        for (Token t = 0; t < cond.size(); ++t)
            if (weight[t] > 0.0) walk(extended(prefix, t), p_orig * cond[t], p_trie * weight[t] / total);
    };
    walk({}, 1.0, 1.0);
    return out;
}

double held_karp(const TspInstance& instance) {
    const std::size_t n = instance.size();
    if (n > 16) throw Error("held_karp: at most 16 nodes supported");
    const auto& c = instance.coords();
    auto d = [&](std::size_t a, std::size_t b) { return std::hypot(c[a].x - c[b].x, c[a].y - c[b].y); };
    // Subsets over nodes 1..n−1; cost[mask][j] = shortest path 0 → … → j visiting mask.
    const std::size_t m = n - 1;
    const std::size_t full = (std::size_t{1} << m);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(full * m, inf);
    for (std::size_t j = 0; j < m; ++j) cost[(std::size_t{1} << j) * m + j] = d(0, j + 1);
    for (std::size_t mask = 1; mask < full; ++mask) {
        for (std::size_t j = 0; j < m; ++j) {
            const double here = cost[mask * m + j];
            if (!(mask & (std::size_t{1} << j)) || here == inf) continue;
            for (std::size_t next = 0; next < m; ++next) {
                if (mask & (std::size_t{1} << next)) continue;
                const std::size_t to = mask | (std::size_t{1} << next);
                cost[to * m + next] = std::min(cost[to * m + next], here + d(j + 1, next + 1));
            }
        }
    }
    double best = inf;
    for (std::size_t j = 0; j < m; ++j) best = std::min(best, cost[(full - 1) * m + j] + d(j + 1, 0));
    return best;
}

std::int64_t event_simulation_makespan(const JsspInstance& instance, TokenView sequence) {
    const std::size_t jobs = instance.jobs();
    const std::size_t machines = instance.machines();
    struct Op {
        std::size_t job;
        std::size_t index;
    };
    // Machine queues in dispatch order.
    std::vector<std::vector<Op>> queue(machines);
    std::vector<std::size_t> issued(jobs, 0);
    for (Token j : sequence) {
        if (j >= jobs || issued[j] >= machines) throw Error("event_simulation_makespan: malformed sequence");
        const std::size_t op = issued[j]++;
        queue[instance.machine_of(j, op)].push_back({j, op});
    }
    for (auto c : issued)
        if (c != machines) throw Error("event_simulation_makespan: malformed sequence");

    std::vector<std::size_t> head(machines, 0);
    std::vector<std::size_t> done_ops(jobs, 0);       // completed operations per job
    std::vector<bool> busy(machines, false);
    using Event = std::pair<std::int64_t, std::size_t>;  // (completion time, machine)
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    std::vector<std::size_t> running_job(machines, 0);
    std::int64_t now = 0;
    std::int64_t makespan = 0;
    std::size_t remaining = jobs * machines;

    auto try_start = [&] {
        for (std::size_t m = 0; m < machines; ++m) {
            if (busy[m] || head[m] >= queue[m].size()) continue;
            const Op& op = queue[m][head[m]];
            if (done_ops[op.job] != op.index) continue;  // job predecessor still pending
            // An operation is never started while the same job runs elsewhere,
            // because its predecessor must already be complete.
            busy[m] = true;
            running_job[m] = op.job;
            events.push({now + instance.proc_time(op.job, op.index), m});
        }
    };
    try_start();
    while (remaining > 0) {
        if (events.empty()) throw Error("event_simulation_makespan: deadlock");
        now = events.top().first;
        while (!events.empty() && events.top().first == now) {
            const std::size_t m = events.top().second;
            events.pop();
            busy[m] = false;
            ++done_ops[running_job[m]];
            ++head[m];
            --remaining;
            makespan = std::max(makespan, now);
        }
        try_start();
    }
    return makespan;
}

EnumerableInstance::EnumerableInstance(std::shared_ptr<const EnumerableModel> model) : model_(std::move(model)) {}

std::vector<Token> EnumerableInstance::feasible_tokens(TokenView prefix) const {
    if (prefix.size() >= model_->depth) return {};
    const auto it = model_->conditionals.find(Trajectory(prefix.begin(), prefix.end()));
    if (it == model_->conditionals.end()) return {};
    std::vector<Token> out(it->second.size());
    for (Token t = 0; t < out.size(); ++t) out[t] = t;
    return out;
}

double EnumerableInstance::objective(TokenView trajectory) const {
    return model_->leaf_f.at(Trajectory(trajectory.begin(), trajectory.end()));
}

std::vector<ScoredToken> ModelPolicy::conditional_logits(const Instance&, TokenView prefix) const {
    const auto& cond = model_->conditional(Trajectory(prefix.begin(), prefix.end()));
    std::vector<ScoredToken> out(cond.size());
    for (Token t = 0; t < cond.size(); ++t) out[t] = {t, std::log(cond[t])};
    return out;
}

}  // namespace gumbeldore::oracle
