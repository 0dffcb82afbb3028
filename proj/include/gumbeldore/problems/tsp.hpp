// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "gumbeldore/core.hpp"
#include "gumbeldore/rng.hpp"

namespace gumbeldore {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

/// Euclidean TSP in the unit square. Tours start at node 0; a trajectory
/// lists the remaining N − 1 nodes in visiting order, so the horizon is N − 1.
class TspInstance final : public FeaturizedInstance {
public:
    static constexpr Token kStartNode = 0;
    static constexpr std::size_t kFeatureDim = 6;

    /// Throws for fewer than 3 nodes or coordinates outside [0, 1]².
    explicit TspInstance(std::vector<Point> coords);

    const std::vector<Point>& coords() const { return coords_; }
    std::size_t size() const { return coords_.size(); }

    std::size_t horizon() const override { return coords_.size() - 1; }
    std::size_t action_space() const override { return coords_.size(); }
    std::vector<Token> feasible_tokens(TokenView prefix) const override;
    double objective(TokenView trajectory) const override;

    std::size_t feature_dim() const override { return kFeatureDim; }
    CandidateFeatures candidate_features(TokenView prefix) const override;

private:
    std::vector<Point> coords_;
};

TspInstance gen_tsp(std::size_t n, Rng& rng);

/// Closed tour length of a full node permutation (any starting node).
double tour_length(const TspInstance& instance, TokenView tour);

/// Negative closed tour length of a trajectory that starts implicitly at
/// node 0. Throws unless the trajectory is a permutation of nodes 1..N−1.
double tsp_objective(const TspInstance& instance, TokenView trajectory);

/// Feature vector of one unvisited candidate after `prefix`:
/// (dist from current, dist to start, dx, dy, normalized distance rank
/// among remaining candidates, fraction of nodes remaining).
std::vector<double> tsp_features(const TspInstance& instance, TokenView prefix, Token candidate);

}  // namespace gumbeldore
