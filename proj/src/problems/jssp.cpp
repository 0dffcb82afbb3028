// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/problems/jssp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace gumbeldore {

JsspInstance::JsspInstance(std::size_t jobs, std::size_t machines, std::vector<std::size_t> machine_of,
                           std::vector<std::int64_t> proc_time)
    : jobs_(jobs), machines_(machines), machine_of_(std::move(machine_of)), proc_time_(std::move(proc_time)) {
    if (jobs_ == 0 || machines_ == 0) throw Error("jssp: need at least one job and one machine");
    if (machine_of_.size() != jobs_ * machines_ || proc_time_.size() != jobs_ * machines_)
        throw Error("jssp: table sizes do not match J x M");
    std::vector<bool> seen(machines_);
    for (std::size_t i = 0; i < jobs_; ++i) {
        std::fill(seen.begin(), seen.end(), false);
        for (std::size_t l = 0; l < machines_; ++l) {
            const std::size_t m = machine_of_[i * machines_ + l];
            if (m >= machines_ || seen[m]) throw Error("jssp: machine row of job " + std::to_string(i) + " is not a permutation");
            seen[m] = true;
            const auto p = proc_time_[i * machines_ + l];
            if (p < 1 || p > kMaxProcTime) throw Error("jssp: processing time out of [1, 99]");
        }
    }
}

JsspState JsspState::empty(const JsspInstance& instance) {
    return {std::vector<std::size_t>(instance.jobs(), 0), std::vector<std::int64_t>(instance.machines(), 0),
            std::vector<std::int64_t>(instance.jobs(), 0)};
}

std::int64_t JsspState::makespan() const {
    return avail_mach.empty() ? 0 : *std::max_element(avail_mach.begin(), avail_mach.end());
}

std::vector<Token> JsspInstance::feasible_tokens(TokenView prefix) const {
    if (prefix.size() >= horizon()) return {};
    std::vector<std::size_t> used(jobs_, 0);
    for (Token t : prefix) {
        if (t >= jobs_ || used[t] >= machines_) return {};
        ++used[t];
    }
    std::vector<Token> out;
    for (std::size_t j = 0; j < jobs_; ++j)
        if (used[j] < machines_) out.push_back(static_cast<Token>(j));
    return out;
}

double JsspInstance::objective(TokenView trajectory) const { return jssp_objective(*this, trajectory); }

std::int64_t jssp_apply(JsspState& state, const JsspInstance& instance, Token job) {
    if (job >= instance.jobs()) throw Error("jssp_step: job index out of range");
    const std::size_t op = state.next_op[job];
    if (op >= instance.machines()) throw Error("jssp_step: job " + std::to_string(job) + " is already finished");
    const std::size_t m = instance.machine_of(job, op);
    const std::int64_t z = std::max(state.avail_job[job], state.avail_mach[m]) + instance.proc_time(job, op);
    state.avail_job[job] = z;
    state.avail_mach[m] = z;
    ++state.next_op[job];
    return z;
}

std::pair<JsspState, std::int64_t> jssp_step(const JsspState& state, const JsspInstance& instance, Token job) {
    JsspState next = state;
    const auto z = jssp_apply(next, instance, job);
    return {std::move(next), z};
}

JsspState jssp_replay(const JsspInstance& instance, JsspState state, TokenView tokens) {
    for (Token t : tokens) jssp_apply(state, instance, t);
    return state;
}

std::int64_t jssp_makespan(const JsspInstance& instance, TokenView trajectory) {
    if (trajectory.size() != instance.horizon()) throw Error("jssp_objective: sequence length must be J*M");
    std::vector<std::size_t> count(instance.jobs(), 0);
    for (Token t : trajectory) {
        if (t >= instance.jobs()) throw Error("jssp_objective: job index out of range");
        ++count[t];
    }
    for (auto c : count)
        if (c != instance.machines()) throw Error("jssp_objective: every job must appear exactly M times");
    return jssp_replay(instance, JsspState::empty(instance), trajectory).makespan();
}

double jssp_objective(const JsspInstance& instance, TokenView trajectory) {
    return -static_cast<double>(jssp_makespan(instance, trajectory));
}

namespace {

std::int64_t start_if_dispatched(const JsspInstance& instance, const JsspState& state, std::size_t job) {
    return std::max(state.avail_job[job], state.avail_mach[instance.machine_of(job, state.next_op[job])]);
}

void fill_features(const JsspInstance& instance, const JsspState& state, std::size_t job, std::int64_t min_start,
                   double* row) {
    const std::size_t op = state.next_op[job];
    const std::size_t machines = instance.machines();
    const std::int64_t start = start_if_dispatched(instance, state, job);
    std::int64_t remaining_work = 0;
    for (std::size_t l = op; l < machines; ++l) remaining_work += instance.proc_time(job, l);
    const auto machine_avail = state.avail_mach[instance.machine_of(job, op)];
    row[0] = static_cast<double>(instance.proc_time(job, op)) / 100.0;
    row[1] = static_cast<double>(start - min_start) / 100.0;
    row[2] = static_cast<double>(remaining_work) / (100.0 * static_cast<double>(machines));
    row[3] = static_cast<double>(machines - op) / static_cast<double>(machines);
    row[4] = static_cast<double>(start - machine_avail) / 100.0;
}

std::int64_t min_start_over_unfinished(const JsspInstance& instance, const JsspState& state) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = 0; j < instance.jobs(); ++j)
        if (state.next_op[j] < instance.machines()) best = std::min(best, start_if_dispatched(instance, state, j));
    return best;
}

}  // namespace

CandidateFeatures JsspInstance::candidate_features(TokenView prefix) const {
    CandidateFeatures out;
    out.dim = kFeatureDim;
    out.tokens = feasible_tokens(prefix);
    if (out.tokens.empty()) return out;
    const JsspState state = jssp_replay(*this, JsspState::empty(*this), prefix);
    const std::int64_t min_start = min_start_over_unfinished(*this, state);
    out.rows.resize(out.tokens.size() * kFeatureDim);
    for (std::size_t i = 0; i < out.tokens.size(); ++i)
        fill_features(*this, state, out.tokens[i], min_start, out.rows.data() + i * kFeatureDim);
    return out;
}

JsspInstance gen_jssp(std::size_t jobs, std::size_t machines, Rng& rng) {
    if (jobs == 0 || machines == 0) throw Error("gen_jssp: need J >= 1 and M >= 1");
    std::vector<std::size_t> machine_of(jobs * machines);
    std::vector<std::int64_t> proc_time(jobs * machines);
    for (std::size_t i = 0; i < jobs; ++i) {
        for (std::size_t l = 0; l < machines; ++l)
            proc_time[i * machines + l] = 1 + static_cast<std::int64_t>(uniform_index(rng, JsspInstance::kMaxProcTime));
        auto row = machine_of.begin() + static_cast<std::ptrdiff_t>(i * machines);
        std::iota(row, row + static_cast<std::ptrdiff_t>(machines), std::size_t{0});
        // Fisher–Yates with the portable index draw.
        for (std::size_t l = machines; l > 1; --l) std::swap(row[l - 1], row[uniform_index(rng, l)]);
    }
    return JsspInstance(jobs, machines, std::move(machine_of), std::move(proc_time));
}

std::vector<double> jssp_features(const JsspInstance& instance, const JsspState& state, Token job) {
    if (job >= instance.jobs() || state.next_op[job] >= instance.machines())
        throw Error("jssp_features: candidate job is finished");
    std::vector<double> row(JsspInstance::kFeatureDim);
    fill_features(instance, state, job, min_start_over_unfinished(instance, state), row.data());
    return row;
}

}  // namespace gumbeldore
