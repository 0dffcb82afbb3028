// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "gumbeldore/gumbel.hpp"

namespace gumbeldore {

double log_exceedance_prob(double location, double threshold) {
    const double x = location - threshold;
    if (x < -20.0) {
        // 1 − exp(−e^x) = e^x − e^{2x}/2 + …
        const double ex = std::exp(x);
        return x + std::log1p(-0.5 * ex);
    }
    return std::log(exceedance_prob(location, threshold));
}

std::vector<EstimatorTerm> estimator_terms(std::span<const SampledTrajectory> entries) {
    std::vector<EstimatorTerm> terms;
    if (entries.size() < 2) return terms;
    const double kappa = entries.back().g;
    terms.reserve(entries.size() - 1);
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        const auto& e = entries[i];
        const double log_q = log_exceedance_prob(e.phi, kappa);
        terms.push_back({e.phi, std::exp(log_q), e.phi - log_q, e.f});
    }
    return terms;
}

ExpectationEstimate estimate_expectation(std::span<const SampledTrajectory> entries) {
    if (entries.empty()) throw Error("estimate_expectation: no entries");
    if (entries.size() == 1) return {entries[0].f, entries[0].f, true};

    const auto terms = estimator_terms(entries);
    double peak = kNegInf;
    for (const auto& t : terms) peak = std::max(peak, t.log_w);
    double weight_sum = 0.0;
    double weighted_f = 0.0;
    for (const auto& t : terms) {
        const double w = std::exp(t.log_w - peak);
        weight_sum += w;
        weighted_f += w * t.f;
    }
    return {weighted_f / weight_sum, std::exp(peak) * weighted_f, false};
}

double conditional_expectation(std::span<const SampledTrajectory> entries) {
    if (entries.empty()) throw Error("conditional_expectation: empty subset");
    return estimate_expectation(entries).normalized;
}

}  // namespace gumbeldore
