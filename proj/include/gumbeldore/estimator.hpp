// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "gumbeldore/core.hpp"

namespace gumbeldore {

/// A complete trajectory drawn in one SBS round: total log-probability under
/// the sampling distribution of that round, its perturbed score, and its
/// objective value.
struct SampledTrajectory {
    Trajectory tokens;
    double phi = 0.0;
    double g = 0.0;
    double f = 0.0;
};

/// One importance-weighted term of the threshold estimator.
struct EstimatorTerm {
    double phi = 0.0;
    double q = 0.0;        // P(G_phi > kappa)
    double log_w = 0.0;    // log(exp(phi) / q)
    double f = 0.0;
};

struct ExpectationEstimate {
    double normalized = 0.0;
    double unnormalized = 0.0;
    bool degenerate = false;  // fewer than two entries: both fields hold the single f
};

/// log P(G > threshold) for G ~ Gumbel(location), accurate deep in the tail.
double log_exceedance_prob(double location, double threshold);

/// Terms for all entries but the last; the last entry's perturbed score is
/// the threshold kappa. Entries must be sorted by g descending.
std::vector<EstimatorTerm> estimator_terms(std::span<const SampledTrajectory> entries);

/// Unbiased threshold estimator and its self-normalized variant.
ExpectationEstimate estimate_expectation(std::span<const SampledTrajectory> entries);

/// Self-normalized estimate of E[f | prefix] from the entries sharing that
/// prefix (ordered by g). A single entry yields its own f.
double conditional_expectation(std::span<const SampledTrajectory> entries);

}  // namespace gumbeldore
