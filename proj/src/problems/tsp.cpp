// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/problems/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gumbeldore {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

TspInstance::TspInstance(std::vector<Point> coords) : coords_(std::move(coords)) {
    if (coords_.size() < 3) throw Error("tsp: instance needs at least 3 nodes");
    for (const auto& p : coords_) {
        if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0))
            throw Error("tsp: coordinates must lie in the unit square");
    }
}

namespace {

std::vector<bool> visited_mask(std::size_t n, TokenView prefix) {
    std::vector<bool> visited(n, false);
    visited[TspInstance::kStartNode] = true;
    for (Token t : prefix) {
        if (t >= n || visited[t]) return {};
        visited[t] = true;
    }
    return visited;
}

}  // namespace

std::vector<Token> TspInstance::feasible_tokens(TokenView prefix) const {
    if (prefix.size() >= horizon()) return {};
    const auto visited = visited_mask(coords_.size(), prefix);
    if (visited.empty()) return {};
    std::vector<Token> out;
    out.reserve(coords_.size() - 1 - prefix.size());
    for (std::size_t i = 0; i < coords_.size(); ++i)
        if (!visited[i]) out.push_back(static_cast<Token>(i));
    return out;
}

double TspInstance::objective(TokenView trajectory) const { return tsp_objective(*this, trajectory); }

CandidateFeatures TspInstance::candidate_features(TokenView prefix) const {
    CandidateFeatures out;
    out.dim = kFeatureDim;
    out.tokens = feasible_tokens(prefix);
    const std::size_t count = out.tokens.size();
    if (count == 0) return out;

    const Point& current = coords_[prefix.empty() ? kStartNode : prefix.back()];
    const Point& start = coords_[kStartNode];
    std::vector<double> dist(count);
    for (std::size_t i = 0; i < count; ++i) dist[i] = distance(current, coords_[out.tokens[i]]);
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end());

    const double rank_scale = count > 1 ? 1.0 / static_cast<double>(count - 1) : 0.0;
    const double remaining = static_cast<double>(count) / static_cast<double>(coords_.size());
    out.rows.resize(count * kFeatureDim);
    for (std::size_t i = 0; i < count; ++i) {
        const Point& c = coords_[out.tokens[i]];
        // Ties share the lowest rank, so relabeling never changes a feature.
        const auto rank = std::lower_bound(sorted.begin(), sorted.end(), dist[i]) - sorted.begin();
        double* row = out.rows.data() + i * kFeatureDim;
        row[0] = dist[i];
        row[1] = distance(start, c);
        row[2] = c.x - current.x;
        row[3] = c.y - current.y;
        row[4] = static_cast<double>(rank) * rank_scale;
        row[5] = remaining;
    }
    return out;
}

TspInstance gen_tsp(std::size_t n, Rng& rng) {
    if (n < 3) throw Error("gen_tsp: n must be at least 3");
    std::vector<Point> coords(n);
    for (auto& p : coords) {
        p.x = uniform01(rng);
        p.y = uniform01(rng);
    }
    return TspInstance(std::move(coords));
}

double tour_length(const TspInstance& instance, TokenView tour) {
    const auto& c = instance.coords();
    double total = 0.0;
    for (std::size_t i = 0; i < tour.size(); ++i) total += distance(c.at(tour[i]), c.at(tour[(i + 1) % tour.size()]));
    return total;
}

double tsp_objective(const TspInstance& instance, TokenView trajectory) {
    const std::size_t n = instance.size();
    if (trajectory.size() != n - 1) throw Error("tsp_objective: trajectory must visit all " + std::to_string(n - 1) + " non-start nodes");
    const auto visited = visited_mask(n, trajectory);
    if (visited.empty()) throw Error("tsp_objective: trajectory is not a permutation");
    const auto& c = instance.coords();
    double total = distance(c[TspInstance::kStartNode], c[trajectory.front()]);
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) total += distance(c[trajectory[i]], c[trajectory[i + 1]]);
    total += distance(c[trajectory.back()], c[TspInstance::kStartNode]);
    return -total;
}

std::vector<double> tsp_features(const TspInstance& instance, TokenView prefix, Token candidate) {
    const auto all = instance.candidate_features(prefix);
    const auto it = std::find(all.tokens.begin(), all.tokens.end(), candidate);
    if (it == all.tokens.end()) throw Error("tsp_features: candidate already visited");
    const auto row = all.row(static_cast<std::size_t>(it - all.tokens.begin()));
    return {row.begin(), row.end()};
}

}  // namespace gumbeldore
