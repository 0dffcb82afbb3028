// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "gumbeldore/core.hpp"
#include "gumbeldore/oracle.hpp"

namespace test_support {

using namespace gumbeldore;

/// Model, instance and policy bundled for enumerable test cases.
struct Enumerable {
    std::shared_ptr<const oracle::EnumerableModel> model;
    oracle::EnumerableInstance instance;
    oracle::ModelPolicy policy;

    explicit Enumerable(oracle::EnumerableModel m)
        : model(std::make_shared<const oracle::EnumerableModel>(std::move(m))), instance(model), policy(model) {}
};

/// Depth-`depth` model with the given per-level conditionals (same at every node) and f.
inline oracle::EnumerableModel fixed_model(std::size_t depth, const std::vector<double>& probs,
                                           const std::map<Trajectory, double>& f = {}) {
    oracle::EnumerableModel m;
    m.depth = depth;
    std::vector<Trajectory> level{{}};
    for (std::size_t d = 0; d < depth; ++d) {
        std::vector<Trajectory> next;
        for (const auto& prefix : level) {
            m.conditionals[prefix] = probs;
            for (Token t = 0; t < probs.size(); ++t) {
                auto child = prefix;
                child.push_back(t);
                next.push_back(child);
            }
        }
        level = std::move(next);
    }
    for (const auto& leaf : level) m.leaf_f[leaf] = f.count(leaf) ? f.at(leaf) : 0.0;
    return m;
}

/// Counts calls to the wrapped policy.
class CountingPolicy final : public SequencePolicy {
public:
    explicit CountingPolicy(const SequencePolicy& inner) : inner_(inner) {}
    std::vector<ScoredToken> conditional_logits(const Instance& instance, TokenView prefix) const override {
        ++calls;
        return inner_.conditional_logits(instance, prefix);
    }
    mutable std::size_t calls = 0;

private:
    const SequencePolicy& inner_;
};

inline std::vector<double> softmax_probs(std::vector<ScoredToken> scored) {
    double peak = -INFINITY;
    for (const auto& s : scored) peak = std::max(peak, s.score);
    double total = 0.0;
    std::vector<double> out;
    for (const auto& s : scored) out.push_back(std::exp(s.score - peak));
    for (double v : out) total += v;
    for (double& v : out) v /= total;
    return out;
}

}  // namespace test_support
