// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gumbeldore {

/// Dense index into an instance's action space. Problem modules own the
/// mapping from tokens to domain objects (nodes, jobs).
using Token = std::uint32_t;

/// Ordered token sequence. A trajectory is complete once its length equals
/// the instance horizon.
using Trajectory = std::vector<Token>;
using TokenView = std::span<const Token>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ScoredToken {
    Token token = 0;
    double score = 0.0;  // logit or log-weight, depending on context

    friend bool operator==(const ScoredToken&, const ScoredToken&) = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a trajectory leaves the feasible set; `position` is the index
/// of the first offending token.
class InfeasibleTrajectory : public Error {
public:
    InfeasibleTrajectory(std::size_t position, const std::string& what)
        : Error(what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// A combinatorial optimization instance viewed as a token-by-token
/// construction problem with an objective to maximize.
class Instance {
public:
    virtual ~Instance() = default;

    /// Length T of every complete trajectory.
    virtual std::size_t horizon() const = 0;
    virtual std::size_t action_space() const = 0;
    /// Feasible next tokens after `prefix`, ascending. Empty iff the prefix
    /// is complete or itself infeasible.
    virtual std::vector<Token> feasible_tokens(TokenView prefix) const = 0;
    /// Objective f of a complete, feasible trajectory.
    virtual double objective(TokenView trajectory) const = 0;
};

/// Feasible candidates together with one feature row per candidate,
/// stored row-major.
struct CandidateFeatures {
    std::vector<Token> tokens;
    std::vector<double> rows;
    std::size_t dim = 0;

    std::span<const double> row(std::size_t i) const { return {rows.data() + i * dim, dim}; }
};

/// Instances that expose per-candidate features for the linear policy.
class FeaturizedInstance : public Instance {
public:
    virtual std::size_t feature_dim() const = 0;
    virtual CandidateFeatures candidate_features(TokenView prefix) const = 0;
};

/// Factorized sequence model. Implementations are pure functions of their
/// parameters, the instance and the prefix, and safe for concurrent reads.
class SequencePolicy {
public:
    virtual ~SequencePolicy() = default;
    /// One finite logit per feasible token after `prefix`.
    virtual std::vector<ScoredToken> conditional_logits(const Instance& instance,
                                                        TokenView prefix) const = 0;
};

struct ValidationReport {
    bool valid = true;
    std::optional<std::size_t> first_violation;
};

ValidationReport validate_trajectory(const Instance& instance, TokenView trajectory);

/// log Σ exp(x_i); −∞ for an empty or all −∞ input.
double log_sum_exp(std::span<const double> values);

/// In-place log-softmax of the scores.
void log_softmax(std::vector<ScoredToken>& scored);

/// log(exp(a) − exp(b)) for b ≤ a; −∞ when b ≥ a.
double log_diff_exp(double a, double b);

/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

/// Σ_t log π(a_t | a_{1:t−1}). Throws InfeasibleTrajectory on the first
/// token that the instance does not allow.
double total_log_prob(const SequencePolicy& policy, const Instance& instance, TokenView trajectory);

}  // namespace gumbeldore
