// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gumbeldore/core.hpp"
#include "gumbeldore/rng.hpp"

namespace gumbeldore {

/// Job shop instance: job i runs its l-th operation on machine_of(i, l) for
/// proc_time(i, l) time units. A schedule is a sequence of J·M job indices;
/// each occurrence dispatches that job's next operation as early as possible.
class JsspInstance final : public FeaturizedInstance {
public:
    static constexpr std::size_t kFeatureDim = 5;
    static constexpr std::int64_t kMaxProcTime = 99;

    /// Row-major J×M tables, machines 0-based. Throws unless each job's
    /// machine row is a permutation and every time lies in [1, 99].
    JsspInstance(std::size_t jobs, std::size_t machines, std::vector<std::size_t> machine_of,
                 std::vector<std::int64_t> proc_time);

    std::size_t jobs() const { return jobs_; }
    std::size_t machines() const { return machines_; }
    std::size_t machine_of(std::size_t job, std::size_t op) const { return machine_of_[job * machines_ + op]; }
    std::int64_t proc_time(std::size_t job, std::size_t op) const { return proc_time_[job * machines_ + op]; }

    std::size_t horizon() const override { return jobs_ * machines_; }
    std::size_t action_space() const override { return jobs_; }
    std::vector<Token> feasible_tokens(TokenView prefix) const override;
    double objective(TokenView trajectory) const override;

    std::size_t feature_dim() const override { return kFeatureDim; }
    CandidateFeatures candidate_features(TokenView prefix) const override;

    friend bool operator==(const JsspInstance& a, const JsspInstance& b) {
        return a.jobs_ == b.jobs_ && a.machines_ == b.machines_ && a.machine_of_ == b.machine_of_ &&
               a.proc_time_ == b.proc_time_;
    }

private:
    std::size_t jobs_;
    std::size_t machines_;
    std::vector<std::size_t> machine_of_;
    std::vector<std::int64_t> proc_time_;
};

/// Partial schedule summary: next unscheduled operation per job and the
/// availability times of machines and jobs. Integral throughout.
struct JsspState {
    std::vector<std::size_t> next_op;
    std::vector<std::int64_t> avail_mach;
    std::vector<std::int64_t> avail_job;

    static JsspState empty(const JsspInstance& instance);
    std::int64_t makespan() const;
    friend bool operator==(const JsspState&, const JsspState&) = default;
};

/// Uniform times in {1..99}, independent uniform machine permutations.
JsspInstance gen_jssp(std::size_t jobs, std::size_t machines, Rng& rng);

/// Dispatches the next operation of `job`: z = max(A_job, A_mach) + p, and
/// both availabilities become z. Returns the new state and z.
std::pair<JsspState, std::int64_t> jssp_step(const JsspState& state, const JsspInstance& instance, Token job);

/// In-place variant of jssp_step; returns z.
std::int64_t jssp_apply(JsspState& state, const JsspInstance& instance, Token job);

/// State after dispatching `tokens` from `state`.
JsspState jssp_replay(const JsspInstance& instance, JsspState state, TokenView tokens);

/// Makespan of a complete job sequence. Throws unless each job appears
/// exactly M times.
std::int64_t jssp_makespan(const JsspInstance& instance, TokenView trajectory);

/// Negative makespan.
double jssp_objective(const JsspInstance& instance, TokenView trajectory);

/// Features of one unfinished candidate job in `state`.
std::vector<double> jssp_features(const JsspInstance& instance, const JsspState& state, Token job);

}  // namespace gumbeldore
