// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "gumbeldore/rng.hpp"

namespace gumbeldore {

/// Uniform draws are clamped to [kUniformEps, 1 − 2^-53] before the double
/// logarithm.
inline constexpr double kUniformEps = 1e-300;

/// Inverse-CDF Gumbel draw from a given uniform: location − log(−log(u)).
double gumbel_from_uniform(double location, double u);

/// Gumbel(location) sample using one uniform from `rng`.
double sample_gumbel(double location, Rng& rng);

/// Independent Gumbel(locations[i]) draws conditioned on their maximum being
/// `target_max`. Uses the shifted truncation form, which is stable when the
/// target lies far below the unconditioned maximum. The arg-max coordinate
/// equals `target_max` exactly.
std::vector<double> gumbels_with_max(std::span<const double> locations, double target_max, Rng& rng);

/// P(G > threshold) for G ~ Gumbel(location).
double exceedance_prob(double location, double threshold);

/// log(1 − e^x) for x ≤ 0, with log1mexp(0) = −∞.
double log1mexp(double x);

}  // namespace gumbeldore
