// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gumbeldore/oracle.hpp"
#include "gumbeldore/oracle_suites.hpp"
#include "gumbeldore/policy.hpp"
#include "gumbeldore/sampler.hpp"
#include "gumbeldore/trie.hpp"
#include "support.hpp"

using namespace gumbeldore;
using test_support::Enumerable;

namespace {

double brute_force_tour(const TspInstance& inst) {
    std::vector<Token> rest(inst.size() - 1);
    std::iota(rest.begin(), rest.end(), Token{1});
    double best = INFINITY;
    do {
        best = std::min(best, -tsp_objective(inst, rest));
    } while (std::next_permutation(rest.begin(), rest.end()));
    return best;
}

}  // namespace

TEST_CASE("held_karp") {
    CHECK(oracle::held_karp(TspInstance({{0, 0}, {0, 1}, {1, 1}, {1, 0}})) == doctest::Approx(4.0).epsilon(1e-15));

    auto rng = make_rng(1, {});
    const auto tri = gen_tsp(3, rng);
    const auto& c = tri.coords();
    CHECK(oracle::held_karp(tri) == doctest::Approx(distance(c[0], c[1]) + distance(c[1], c[2]) + distance(c[2], c[0])));

    for (int i = 0; i < 5; ++i) {
        const auto inst = gen_tsp(8, rng);
        CHECK(oracle::held_karp(inst) == doctest::Approx(brute_force_tour(inst)).epsilon(1e-12));
    }
    CHECK_NOTHROW(oracle::held_karp(gen_tsp(16, rng)));
    CHECK_THROWS_AS(oracle::held_karp(gen_tsp(17, rng)), Error);
}

TEST_CASE("held_karp bounds every sampled tour") {
    auto rng = make_rng(2, {});
    const LinearPolicy policy(ProblemKind::tsp, {-5.0, 0, 0, 0, 0, 0});
    for (int i = 0; i < 20; ++i) {
        const auto inst = gen_tsp(10, rng);
        const double opt = oracle::held_karp(inst);
        for (const auto& t : sample_wr(inst, policy, 50, rng)) CHECK(-inst.objective(t) >= opt - 1e-12);
    }
}

TEST_CASE("exact_expectation") {
    auto constant = oracle::uniform_model(3, 3);
    for (auto& [leaf, f] : constant.leaf_f) f = 2.5;
    CHECK(oracle::exact_expectation(constant) == doctest::Approx(2.5).epsilon(1e-14));

    const auto two = test_support::fixed_model(1, {0.25, 0.75}, {{{0}, 4.0}, {{1}, 0.0}});
    CHECK(oracle::exact_expectation(two) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(oracle::exact_conditional_expectation(two, {0}) == 4.0);
    CHECK(oracle::exact_conditional_expectation(two, {}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exact_expectation agrees with Monte Carlo") {
    auto rng = make_rng(3, {});
    const auto model = oracle::random_model(rng, 4, 2, 4);
    constexpr int draws = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int d = 0; d < draws; ++d) {
        Trajectory leaf;
        while (leaf.size() < model.depth) {
            const auto& probs = model.conditional(leaf);
            double u = uniform01(rng);
            Token t = 0;
            while (t + 1 < probs.size() && u >= probs[t]) u -= probs[t++];
            leaf.push_back(t);
        }
        const double f = model.leaf_f.at(leaf);
        sum += f;
        sum_sq += f * f;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    CHECK(std::abs(mean - oracle::exact_expectation(model)) < 3 * se);
}

TEST_CASE("logit update along a trajectory") {
    auto rng = make_rng(4, {});
    const auto model = oracle::random_model(rng, 3, 2, 4);
    const Trajectory path{1, 0, 1};
    const auto same = oracle::apply_trajectory_update(model, path, 0.0);
    for (const auto& [prefix, probs] : model.conditionals)
        for (std::size_t i = 0; i < probs.size(); ++i) CHECK(same.conditionals.at(prefix)[i] == doctest::Approx(probs[i]).epsilon(1e-14));

    for (int c = 0; c < 200; ++c) {
        const auto flat = oracle::random_model(rng, 1, 2, 4, 1.5, -5.0, 5.0);
        const auto& probs = flat.conditional({});
        const Token j = static_cast<Token>(uniform_index(rng, probs.size()));
        const double sigma = 5.0 * (1.0 - uniform01(rng));
        std::vector<double> q;
        for (Token t = 0; t < probs.size(); ++t) q.push_back(sigma * flat.leaf_f.at({t}));
        const auto lemma = oracle::lemma_update(probs, q, j);
        const auto updated = oracle::apply_trajectory_update(flat, {j}, sigma);
        for (std::size_t i = 0; i < probs.size(); ++i) CHECK(updated.conditional({})[i] == doctest::Approx(lemma[i]).epsilon(1e-12));
    }
}

TEST_CASE("leaf distribution") {
    const auto binary = oracle::enumerate_leaf_distribution(oracle::uniform_model(2, 2));
    CHECK(binary.size() == 4);
    for (const auto& [leaf, p] : binary) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

    auto rng = make_rng(5, {});
    for (int c = 0; c < 20; ++c) {
        Enumerable e(oracle::random_model(rng, 1 + uniform_index(rng, 4), 2, 4));
        const auto exact = oracle::enumerate_leaf_distribution(*e.model);
        double total = 0.0;
        for (const auto& [leaf, p] : exact) total += p;
        CHECK(std::abs(total - 1.0) < 1e-12);

        SearchTrie trie(e.instance.horizon());
        const auto from_trie = trie.exact_leaf_distribution(e.policy, e.instance);
        REQUIRE(from_trie.size() == exact.size());
        for (const auto& [leaf, p] : exact) CHECK(std::abs(from_trie.at(leaf) - p) < 1e-12);
    }
}

TEST_CASE("model validation") {
    auto model = oracle::uniform_model(2, 3);
    CHECK_NOTHROW(model.validate());
    model.conditionals.at({1})[0] = 0.5;
    CHECK_THROWS_AS(model.validate(), Error);
}

TEST_CASE("event simulation agrees with the dispatch recursion") {
    const auto result = oracle::run_suite("jssp", {7, 200});
    CHECK(result.total == 200);
    CHECK(result.ok());
}

TEST_CASE("suite runner") {
    const auto names = oracle::suite_names();
    CHECK(std::find(names.begin(), names.end(), "wor") != names.end());
    CHECK_THROWS_AS(oracle::run_suite("nonsense", {}), Error);

    oracle::SuiteOptions small{11, 50};
    for (const auto& name : {"wor", "mass", "improvement", "lemma"}) {
        const auto a = oracle::run_suite(name, small);
        const auto b = oracle::run_suite(name, small);
        CHECK(a.ok());
        CHECK(a.passed == b.passed);
        CHECK(a.details == b.details);
    }
}

TEST_CASE("statistical helpers") {
    CHECK(oracle::chi_square_gof_p_value(std::vector<double>{250, 250, 250, 250}, std::vector<double>{0.25, 0.25, 0.25, 0.25}) ==
          doctest::Approx(1.0));
    CHECK(oracle::chi_square_gof_p_value(std::vector<double>{400, 100}, std::vector<double>{0.5, 0.5}) < 1e-10);

    auto rng = make_rng(6, {});
    std::vector<double> a, b, shifted;
    for (int i = 0; i < 5000; ++i) {
        a.push_back(uniform01(rng));
        b.push_back(uniform01(rng));
        shifted.push_back(uniform01(rng) + 0.1);
    }
    CHECK(oracle::ks_two_sample_p_value(a, b) > 1e-3);
    CHECK(oracle::ks_two_sample_p_value(a, shifted) < 1e-6);
}
