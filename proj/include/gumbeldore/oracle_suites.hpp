// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gumbeldore::oracle {

/// Outcome of one proof-check suite. Failing cases are serialized as JSON
/// objects carrying the seed and case index needed to replay them.
struct SuiteResult {
    std::string name;
    std::size_t passed = 0;
    std::size_t total = 0;
    std::vector<std::string> failures;
    /// Free-form suite statistic (p-values, z-scores) as a JSON object.
    std::string details = "{}";

    bool ok() const { return passed == total; }
};

struct SuiteOptions {
    std::uint64_t seed = 0;
    std::size_t cases = 0;  // 0: the suite's default count
    std::size_t max_failures_reported = 10;
};

/// Suite names in execution order: wor, mass, improvement, lemma, estimator, jssp.
std::vector<std::string> suite_names();

/// Throws gumbeldore::Error on an unknown name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& options);

/// Case i of every suite draws from make_rng(seed, {suite id, i}), so a
/// reported failure replays from (seed, name, index) alone.
SuiteResult replay_case(const std::string& name, std::uint64_t seed, std::size_t index);

/// Upper-tail probability of the chi-square statistic for observed counts
/// against expected probabilities. Bins with expected count below 5 are
/// pooled into one.
double chi_square_gof_p_value(const std::vector<double>& observed, const std::vector<double>& expected_probs);

/// Two-sample Kolmogorov–Smirnov test, asymptotic p-value.
double ks_two_sample_p_value(std::vector<double> a, std::vector<double> b);

}  // namespace gumbeldore::oracle
