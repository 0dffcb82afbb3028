// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/gumbel.hpp"

#include <algorithm>
#include <cmath>

#include "gumbeldore/core.hpp"

namespace gumbeldore {

double gumbel_from_uniform(double location, double u) {
    // 1 − 1e-300 rounds to 1, so the upper bound is the largest double below 1.
    u = std::clamp(u, kUniformEps, std::nextafter(1.0, 0.0));
    return location - std::log(-std::log(u));
}

double sample_gumbel(double location, Rng& rng) {
    return gumbel_from_uniform(location, uniform01(rng));
}

double log1mexp(double x) {
    if (x >= 0.0) return kNegInf;
    return x > -0.693147180559945 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

std::vector<double> gumbels_with_max(std::span<const double> locations, double target_max, Rng& rng) {
    if (locations.empty()) throw Error("gumbels_with_max: empty location set");
    std::vector<double> raw(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) raw[i] = sample_gumbel(locations[i], rng);
    const auto argmax = static_cast<std::size_t>(std::max_element(raw.begin(), raw.end()) - raw.begin());
    const double z = raw[argmax];

    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i == argmax) {
            out[i] = target_max;
            continue;
        }
        const double v = target_max - raw[i] + log1mexp(raw[i] - z);
        out[i] = target_max - std::max(v, 0.0) - std::log1p(std::exp(-std::abs(v)));
    }
    return out;
}

double exceedance_prob(double location, double threshold) {
    if (threshold == std::numeric_limits<double>::infinity()) return 0.0;
    return std::clamp(-std::expm1(-std::exp(location - threshold)), 0.0, 1.0);
}

}  // namespace gumbeldore
