// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/oracle_suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "gumbeldore/oracle.hpp"
#include "gumbeldore/problems/jssp.hpp"
#include "gumbeldore/sampler.hpp"

namespace gumbeldore::oracle {

namespace {

using json = nlohmann::json;

enum SuiteId : std::uint64_t {
    kWorSuite = 1,  // shared by the mass suite: both check the same runs
    kImprovementSuite = 3,
    kLemmaSuite = 4,
    kEstimatorSuite = 5,
    kJsspSuite = 6,
};

constexpr std::uint64_t kStatisticStream = ~std::uint64_t{0};

using CaseFn = std::function<bool(std::uint64_t seed, std::size_t index, json& info)>;

struct SuiteSpec {
    std::string name;
    std::size_t default_cases;
    CaseFn run_case;
    // Optional aggregate check run once after the cases.
    std::function<bool(const SuiteOptions&, json& details)> statistic;
};

double prefix_probability(const EnumerableModel& model, TokenView path) {
    double p = 1.0;
    Trajectory prefix;
    for (Token t : path) {
        p *= model.conditional(prefix).at(t);
        prefix.push_back(t);
    }
    return p;
}

struct WorRun {
    std::shared_ptr<const EnumerableModel> model;
    SamplerConfig config;
};

WorRun make_wor_run(std::uint64_t seed, std::size_t index) {
    auto rng = make_rng(seed, {kWorSuite, index});
    auto model = std::make_shared<const EnumerableModel>(random_model(rng, 3, 3, 3));
    SamplerConfig config;
    config.k = 1 + uniform_index(rng, 12);
    config.n = 1 + uniform_index(rng, 6);
    config.sigma = 0.0;
    config.p_min = 1.0;
    config.mode = UpdateMode::gd;
    return {std::move(model), config};
}

bool wor_case(std::uint64_t seed, std::size_t index, json& info) {
    const auto run = make_wor_run(seed, index);
    const EnumerableInstance instance(run.model);
    const ModelPolicy policy(run.model);
    auto rng = make_rng(seed, {kWorSuite, index, 1});
    const auto result = gumbeldore_sample(instance, policy, run.config, rng);

    std::set<Trajectory> seen;
    std::size_t duplicates = 0;
    for (const auto& s : result.samples) {
        if (!run.model->leaf_f.count(s.tokens)) {
            info["error"] = "sample is not a leaf";
            return false;
        }
        if (!seen.insert(s.tokens).second) ++duplicates;
    }
    const std::size_t leaves = run.model->leaf_count();
    const std::size_t budget = run.config.k * run.config.n;
    const std::size_t expected = std::min(budget, leaves);
    info["k"] = run.config.k;
    info["n"] = run.config.n;
    info["duplicates"] = duplicates;
    info["unique"] = seen.size();
    if (duplicates != 0) return false;
    if (seen.size() != expected) {
        info["error"] = "unique count differs from min(k*n, leaves)";
        return false;
    }
    return true;
}

bool wor_first_draw_gof(const SuiteOptions& options, json& details) {
    auto model_rng = make_rng(options.seed, {kWorSuite, kStatisticStream});
    auto model = std::make_shared<const EnumerableModel>(random_model(model_rng, 3, 3, 3));
    const EnumerableInstance instance(model);
    const ModelPolicy policy(model);
    const auto exact = enumerate_leaf_distribution(*model);

    std::map<Trajectory, std::size_t> index_of;
    std::vector<double> expected;
    for (const auto& [leaf, p] : exact) {
        index_of[leaf] = expected.size();
        expected.push_back(p);
    }
    constexpr std::size_t kRuns = 50000;
    std::vector<double> observed(expected.size(), 0.0);
    SamplerConfig config{3, 1, 0.0, 1.0, UpdateMode::gd, 0};
    for (std::size_t r = 0; r < kRuns; ++r) {
        auto rng = make_rng(options.seed, {kWorSuite, kStatisticStream, r});
        const auto result = gumbeldore_sample(instance, policy, config, rng);
        observed[index_of.at(result.samples.front().tokens)] += 1.0;
    }
    const double p = chi_square_gof_p_value(observed, expected);
    details["first_draw_runs"] = kRuns;
    details["first_draw_chi2_p"] = p;
    return p > 1e-3;
}

bool mass_case(std::uint64_t seed, std::size_t index, json& info) {
    const auto run = make_wor_run(seed, index);
    const EnumerableInstance instance(run.model);
    const ModelPolicy policy(run.model);
    auto rng = make_rng(seed, {kWorSuite, index, 1});

    double worst = 0.0;
    bool structural_ok = true;
    const auto observer = [&](const SearchTrie& trie, std::size_t) {
        // Leaves instantiated at full depth are exactly the committed samples.
        std::vector<std::pair<Trajectory, double>> sampled;
        trie.for_each_node([&](const TrieNode& node, TokenView path) {
            if (node.depth == run.model->depth)
                sampled.emplace_back(Trajectory(path.begin(), path.end()), prefix_probability(*run.model, path));
        });
        trie.for_each_node([&](const TrieNode& node, TokenView path) {
            const double orig = prefix_probability(*run.model, path);
            double taken = 0.0;
            for (const auto& [leaf, p] : sampled)
                if (std::equal(path.begin(), path.end(), leaf.begin())) taken += p;
            const double remaining = orig - taken;
            const double engine_orig = std::exp(node.log_orig_mass);
            const double engine_taken = std::exp(node.log_sampled_mass);
            const double engine_remaining = std::exp(remaining_log_mass(node));
            worst = std::max({worst, std::abs(engine_orig - orig), std::abs(engine_taken - taken),
                              std::abs(engine_remaining - remaining),
                              std::abs(engine_remaining + engine_taken - engine_orig)});
            if (node.depleted != (remaining <= 1e-12 * orig)) structural_ok = false;
        });
    };
    const auto result = gumbeldore_sample(instance, policy, run.config, rng, observer);
    info["max_abs_error"] = worst;
    info["depletion_consistent"] = structural_ok;
    return worst <= 1e-9 && structural_ok && !result.samples.empty();
}

bool improvement_case(std::uint64_t seed, std::size_t index, json& info) {
    auto rng = make_rng(seed, {kImprovementSuite, index});
    const std::size_t depth = 1 + uniform_index(rng, 4);
    const auto model = random_model(rng, depth, 2, 4, 1.5, -5.0, 5.0);
    std::vector<Trajectory> leaves;
    for (const auto& [leaf, f] : model.leaf_f) leaves.push_back(leaf);
    const Trajectory& trajectory = leaves[uniform_index(rng, leaves.size())];
    const double sigma = 5.0 * (1.0 - uniform01(rng));

    const double before = exact_expectation(model);
    const double after = exact_expectation(apply_trajectory_update(model, trajectory, sigma));
    info["depth"] = depth;
    info["sigma"] = sigma;
    info["trajectory"] = trajectory;
    info["before"] = before;
    info["after"] = after;
    return after >= before - 1e-12;
}

bool lemma_case(std::uint64_t seed, std::size_t index, json& info) {
    auto rng = make_rng(seed, {kLemmaSuite, index});
    const std::size_t size = 2 + uniform_index(rng, 7);
    std::vector<double> logits(size), q(size);
    for (double& l : logits) l = -4.0 + 8.0 * uniform01(rng);
    for (double& v : q) v = -5.0 + 10.0 * uniform01(rng);
    double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(size);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) total += probs[i] = std::exp(logits[i] - peak);
    for (double& p : probs) p /= total;
    const std::size_t j = uniform_index(rng, size);

    const auto updated = lemma_update(probs, q, j);
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        before += probs[i] * q[i];
        after += updated[i] * q[i];
    }
    info["size"] = size;
    info["j"] = j;
    info["before"] = before;
    info["after"] = after;
    return after >= before - 1e-12;
}

struct EstimatorCheck {
    std::size_t k;
    bool normalized;
};

// Each check is one case: a full batch of independent single-round draws on
// a fixed 27-leaf model.
bool estimator_check(std::uint64_t seed, std::size_t index, std::size_t draws, json& info) {
    static const EstimatorCheck kChecks[] = {{5, false}, {10, false}, {20, true}};
    const auto& check = kChecks[index % 3];
    auto model_rng = make_rng(seed, {kEstimatorSuite, kStatisticStream});
    auto model = std::make_shared<const EnumerableModel>(random_model(model_rng, 3, 3, 3));
    const EnumerableInstance instance(model);
    const ModelPolicy policy(model);
    const double exact = exact_expectation(*model);

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
        auto rng = make_rng(seed, {kEstimatorSuite, index, r});
        SearchTrie trie(instance.horizon());
        const auto beam = sbs_round(trie, policy, instance, check.k, 1.0, rng);
        std::vector<SampledTrajectory> entries;
        entries.reserve(beam.size());
        for (const auto& e : beam) entries.push_back({e.prefix, e.phi, e.g, instance.objective(e.prefix)});
        const auto est = estimate_expectation(entries);
        const double v = check.normalized ? est.normalized : est.unnormalized;
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    const double se = std::sqrt(var / n);
    info["k"] = check.k;
    info["estimator"] = check.normalized ? "normalized" : "unnormalized";
    info["draws"] = draws;
    info["exact"] = exact;
    info["mean"] = mean;
    info["std_err"] = se;
    if (check.normalized) {
        info["relative_error"] = std::abs(mean - exact) / std::abs(exact);
        return std::abs(mean - exact) <= 0.01 * std::abs(exact);
    }
    info["z"] = se > 0.0 ? (mean - exact) / se : 0.0;
    return std::abs(mean - exact) <= 3.0 * se;
}

bool jssp_case(std::uint64_t seed, std::size_t index, json& info) {
    auto rng = make_rng(seed, {kJsspSuite, index});
    const std::size_t jobs = 1 + uniform_index(rng, 4);
    const std::size_t machines = 1 + uniform_index(rng, 4);
    const auto instance = gen_jssp(jobs, machines, rng);
    Trajectory sequence;
    for (Token j = 0; j < jobs; ++j) sequence.insert(sequence.end(), machines, j);
    for (std::size_t i = sequence.size(); i > 1; --i) std::swap(sequence[i - 1], sequence[uniform_index(rng, i)]);

    const std::int64_t recursion = jssp_makespan(instance, sequence);
    const std::int64_t simulated = event_simulation_makespan(instance, sequence);
    info["jobs"] = jobs;
    info["machines"] = machines;
    info["sequence"] = sequence;
    info["recursion"] = recursion;
    info["simulation"] = simulated;
    if (recursion != simulated) return false;

    const TokenView all(sequence);
    for (std::size_t q = 0; q <= sequence.size(); ++q) {
        const auto head = jssp_replay(instance, JsspState::empty(instance), all.first(q));
        const auto tail = jssp_replay(instance, head, all.subspan(q));
        if (tail.makespan() != recursion) {
            info["split"] = q;
            info["two_stage"] = tail.makespan();
            return false;
        }
    }
    return true;
}

const std::vector<SuiteSpec>& suites() {
    static const std::vector<SuiteSpec> specs = {
        {"wor", 10000, wor_case, wor_first_draw_gof},
        {"mass", 10000, mass_case, {}},
        {"improvement", 1000, improvement_case, {}},
        {"lemma", 10000, lemma_case, {}},
        {"estimator", 3, {}, {}},
        {"jssp", 1000, jssp_case, {}},
    };
    return specs;
}

const SuiteSpec& find_suite(const std::string& name) {
    for (const auto& s : suites())
        if (s.name == name) return s;
    throw Error("unknown oracle suite '" + name + "'");
}

constexpr std::size_t kEstimatorDraws = 50000;

}  // namespace

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& s : suites()) out.push_back(s.name);
    return out;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& options) {
    const auto& spec = find_suite(name);
    SuiteResult result;
    result.name = name;
    json details = json::object();

    auto record = [&](bool ok, std::size_t index, json info) {
        ++result.total;
        if (ok) {
            ++result.passed;
            return;
        }
        if (result.failures.size() < options.max_failures_reported) {
            info["suite"] = name;
            info["seed"] = options.seed;
            info["case"] = index;
            result.failures.push_back(info.dump());
        }
    };

    if (name == "estimator") {
        // Here `cases` sets the number of draws per check.
        const std::size_t draws = options.cases ? options.cases : kEstimatorDraws;
        json checks = json::array();
        for (std::size_t i = 0; i < spec.default_cases; ++i) {
            json info;
            const bool ok = estimator_check(options.seed, i, draws, info);
            checks.push_back(info);
            record(ok, i, info);
        }
        details["checks"] = checks;
    } else {
        const std::size_t count = options.cases ? options.cases : spec.default_cases;
        for (std::size_t i = 0; i < count; ++i) {
            json info = json::object();
            bool ok = false;
            try {
                ok = spec.run_case(options.seed, i, info);
            } catch (const std::exception& e) {
                info["exception"] = e.what();
            }
            record(ok, i, std::move(info));
        }
    }
    if (spec.statistic) {
        json info = json::object();
        const bool ok = spec.statistic(options, info);
        for (auto& [key, value] : info.items()) details[key] = value;
        record(ok, result.total, info);
    }
    result.details = details.dump();
    return result;
}

SuiteResult replay_case(const std::string& name, std::uint64_t seed, std::size_t index) {
    const auto& spec = find_suite(name);
    SuiteResult result;
    result.name = name;
    result.total = 1;
    json info = json::object();
    bool ok = false;
    if (name == "estimator") {
        ok = estimator_check(seed, index, kEstimatorDraws, info);
    } else {
        try {
            ok = spec.run_case(seed, index, info);
        } catch (const std::exception& e) {
            info["exception"] = e.what();
        }
    }
    info["suite"] = name;
    info["seed"] = seed;
    info["case"] = index;
    if (ok)
        result.passed = 1;
    else
        result.failures.push_back(info.dump());
    result.details = info.dump();
    return result;
}

double chi_square_gof_p_value(const std::vector<double>& observed, const std::vector<double>& expected_probs) {
    if (observed.size() != expected_probs.size() || observed.empty())
        throw Error("chi_square_gof_p_value: size mismatch");
    double n = 0.0;
    for (double o : observed) n += o;
    double stat = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
    std::size_t bins = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = n * expected_probs[i];
        if (e < 5.0) {
            pooled_obs += observed[i];
            pooled_exp += e;
            continue;
        }
        stat += (observed[i] - e) * (observed[i] - e) / e;
        ++bins;
    }
    if (pooled_exp > 0.0) {
        stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        ++bins;
    }
    if (bins < 2) return 1.0;
    const boost::math::chi_squared dist(static_cast<double>(bins - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

double ks_two_sample_p_value(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks_two_sample_p_value: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double en = std::sqrt(na * nb / (na + nb));
    const double lambda = (en + 0.12 + 0.11 / en) * d;
    if (lambda < 0.2) return 1.0;
    // Kolmogorov distribution tail: 2 Σ (−1)^{j−1} exp(−2 j² λ²).
    double sum = 0.0, sign = 1.0;
    for (int term = 1; term <= 100; ++term) {
        const double t = sign * std::exp(-2.0 * term * term * lambda * lambda);
        sum += t;
        if (std::abs(t) < 1e-12 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace gumbeldore::oracle
