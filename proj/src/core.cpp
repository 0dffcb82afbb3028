// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/core.hpp"

#include <algorithm>
#include <cmath>

namespace gumbeldore {

ValidationReport validate_trajectory(const Instance& instance, TokenView trajectory) {
    const std::size_t horizon = instance.horizon();
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        if (t >= horizon) return {false, t};
        const auto feasible = instance.feasible_tokens(trajectory.first(t));
        if (!std::binary_search(feasible.begin(), feasible.end(), trajectory[t])) return {false, t};
    }
    return {};
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return kNegInf;
    const double peak = *std::max_element(values.begin(), values.end());
    if (peak == kNegInf) return kNegInf;
    if (std::isinf(peak)) return peak;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - peak);
    return peak + std::log(acc);
}

void log_softmax(std::vector<ScoredToken>& scored) {
    std::vector<double> scores(scored.size());
    std::transform(scored.begin(), scored.end(), scores.begin(), [](const ScoredToken& s) { return s.score; });
    const double norm = log_sum_exp(scores);
    for (auto& s : scored) s.score -= norm;
}

double log_diff_exp(double a, double b) {
    if (b >= a) return kNegInf;
    if (b == kNegInf) return a;
    const double d = b - a;
    // log1p(-e^d) loses precision when d is close to 0; use log(-expm1(d)) there.
    return a + (d > -0.693147180559945 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double total_log_prob(const SequencePolicy& policy, const Instance& instance, TokenView trajectory) {
    const auto report = validate_trajectory(instance, trajectory);
    if (!report.valid) {
        const std::size_t pos = *report.first_violation;
        throw InfeasibleTrajectory(pos, "trajectory infeasible at position " + std::to_string(pos));
    }
    double total = 0.0;
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        auto logits = policy.conditional_logits(instance, trajectory.first(t));
        log_softmax(logits);
        const auto it = std::find_if(logits.begin(), logits.end(),
                                     [&](const ScoredToken& s) { return s.token == trajectory[t]; });
        if (it == logits.end()) throw InfeasibleTrajectory(t, "policy has no logit for token at position " + std::to_string(t));
        total += it->score;
    }
    return total;
}

}  // namespace gumbeldore
