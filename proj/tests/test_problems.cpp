// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gumbeldore/oracle.hpp"
#include "gumbeldore/policy.hpp"
#include "gumbeldore/problems/instance_io.hpp"
#include "gumbeldore/problems/jssp.hpp"
#include "gumbeldore/problems/tsp.hpp"

using namespace gumbeldore;

namespace {

const JsspInstance& hand_example() {
    // job 0: (m0, 3), (m1, 2); job 1: (m1, 2), (m0, 4)
    static const JsspInstance instance(2, 2, {0, 1, 1, 0}, {3, 2, 2, 4});
    return instance;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[uniform_index(rng, i)]);
    return p;
}

}  // namespace

TEST_CASE("TSP generation") {
    auto a = make_rng(1, {});
    auto b = make_rng(1, {});
    CHECK(gen_tsp(12, a).coords() == gen_tsp(12, b).coords());
    CHECK_THROWS_AS(gen_tsp(2, a), Error);

    auto rng = make_rng(2, {});
    double sx = 0.0, sy = 0.0;
    std::size_t points = 0;
    bool inside = true;
    for (int i = 0; i < 10000; ++i) {
        const auto inst = gen_tsp(10, rng);
        for (const auto& p : inst.coords()) {
            inside = inside && p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
            sx += p.x;
            sy += p.y;
            ++points;
        }
    }
    CHECK(inside);
    const double se = std::sqrt(1.0 / 12.0 / static_cast<double>(points));
    CHECK(std::abs(sx / points - 0.5) < 3 * se);
    CHECK(std::abs(sy / points - 0.5) < 3 * se);
}

TEST_CASE("TSP instance invariants") {
    CHECK_THROWS_AS(TspInstance({{0, 0}, {1, 1}}), Error);
    CHECK_THROWS_AS(TspInstance({{0, 0}, {1, 1}, {1.5, 0}}), Error);
    auto rng = make_rng(3, {});
    const auto inst = gen_tsp(9, rng);
    CHECK(inst.horizon() == 8);
    Trajectory prefix;
    for (std::size_t t = 1; t <= inst.horizon(); ++t) {
        const auto feasible = inst.feasible_tokens(prefix);
        // Node 0 is the fixed start, so step t chooses among N − t nodes.
        CHECK(feasible.size() == inst.size() - t);
        CHECK(std::is_sorted(feasible.begin(), feasible.end()));
        prefix.push_back(feasible[uniform_index(rng, feasible.size())]);
    }
    CHECK(inst.feasible_tokens(prefix).empty());
}

TEST_CASE("TSP objective") {
    const TspInstance square({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    CHECK(tsp_objective(square, Trajectory{1, 2, 3}) == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(tsp_objective(square, Trajectory{3, 2, 1}) == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(tsp_objective(square, Trajectory{2, 1, 3}) < -4.0);
    CHECK_THROWS_AS(tsp_objective(square, Trajectory{1, 1, 3}), Error);
    CHECK_THROWS_AS(tsp_objective(square, Trajectory{1, 2}), Error);

    auto rng = make_rng(4, {});
    const auto tri = gen_tsp(3, rng);
    CHECK(tsp_objective(tri, Trajectory{1, 2}) == doctest::Approx(tsp_objective(tri, Trajectory{2, 1})).epsilon(1e-15));

    for (int c = 0; c < 50; ++c) {
        const auto inst = gen_tsp(8, rng);
        const auto perm = random_permutation(7, rng);
        Trajectory tour;
        for (auto p : perm) tour.push_back(static_cast<Token>(p + 1));
        Trajectory reversed(tour.rbegin(), tour.rend());
        CHECK(tsp_objective(inst, tour) == doctest::Approx(tsp_objective(inst, reversed)).epsilon(1e-14));
    }
}

TEST_CASE("greedy tour length equals an independent edge sum") {
    auto rng = make_rng(5, {});
    const auto inst = gen_tsp(8, rng);
    const LinearPolicy nearest(ProblemKind::tsp, {-50.0, 0, 0, 0, 0, 0});
    const auto tour = greedy_rollout(nearest, inst);
    std::vector<std::size_t> order{0};
    for (Token t : tour) order.push_back(t);
    double length = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& a = inst.coords()[order[i]];
        const auto& b = inst.coords()[order[(i + 1) % order.size()]];
        length += std::hypot(a.x - b.x, a.y - b.y);
    }
    CHECK(std::abs(inst.objective(tour) + length) < 1e-12);
}

TEST_CASE("TSP features") {
    auto rng = make_rng(6, {});
    const auto inst = gen_tsp(10, rng);
    const Trajectory prefix{4, 7};
    const auto feats = inst.candidate_features(prefix);
    CHECK(feats.tokens == inst.feasible_tokens(prefix));
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < feats.tokens.size(); ++i) {
        for (double v : feats.row(i)) CHECK(std::isfinite(v));
        if (feats.row(i)[0] < feats.row(nearest)[0]) nearest = i;
        CHECK(feats.row(i)[5] == doctest::Approx(7.0 / 10.0));
    }
    CHECK(feats.row(nearest)[4] == 0.0);

    const auto first = inst.candidate_features({});
    for (std::size_t i = 0; i < first.tokens.size(); ++i) CHECK(first.row(i)[0] == first.row(i)[1]);
    CHECK_THROWS_AS(tsp_features(inst, prefix, 7), Error);
}

TEST_CASE("TSP features ignore labels of unvisited nodes") {
    auto rng = make_rng(7, {});
    for (int c = 0; c < 50; ++c) {
        const auto inst = gen_tsp(9, rng);
        const Trajectory prefix{3, 5};
        std::vector<Token> unvisited = inst.feasible_tokens(prefix);
        const auto perm = random_permutation(unvisited.size(), rng);
        std::vector<Token> relabel(inst.size());
        std::iota(relabel.begin(), relabel.end(), Token{0});
        for (std::size_t i = 0; i < unvisited.size(); ++i) relabel[unvisited[i]] = unvisited[perm[i]];
        std::vector<Point> coords(inst.size());
        for (std::size_t v = 0; v < inst.size(); ++v) coords[relabel[v]] = inst.coords()[v];
        const TspInstance permuted(coords);
        for (Token u : unvisited) CHECK(tsp_features(inst, prefix, u) == tsp_features(permuted, prefix, relabel[u]));
    }
}

TEST_CASE("JSSP generation") {
    auto rng = make_rng(8, {});
    double sum = 0.0;
    std::size_t draws = 0;
    bool permutations = true, in_range = true;
    for (int i = 0; i < 10000; ++i) {
        const auto inst = gen_jssp(10, 10, rng);
        for (std::size_t j = 0; j < 10; ++j) {
            std::vector<bool> seen(10, false);
            for (std::size_t l = 0; l < 10; ++l) {
                seen[inst.machine_of(j, l)] = true;
                const auto p = inst.proc_time(j, l);
                in_range = in_range && p >= 1 && p <= 99;
                sum += static_cast<double>(p);
                ++draws;
            }
            permutations = permutations && std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
        }
    }
    CHECK(permutations);
    CHECK(in_range);
    const double se = std::sqrt((99.0 * 99.0 - 1.0) / 12.0 / static_cast<double>(draws));
    CHECK(std::abs(sum / draws - 50.0) < 3 * se);
}

TEST_CASE("JSSP instance validation") {
    CHECK_THROWS_AS(JsspInstance(1, 2, {0, 0}, {1, 1}), Error);
    CHECK_THROWS_AS(JsspInstance(1, 2, {0, 1}, {0, 1}), Error);
    CHECK_THROWS_AS(JsspInstance(1, 2, {0, 1}, {1, 100}), Error);
    CHECK_THROWS_AS(JsspInstance(1, 2, {0, 1}, {1}), Error);
}

TEST_CASE("JSSP hand example") {
    const auto& inst = hand_example();
    auto state = JsspState::empty(inst);
    std::vector<std::int64_t> finish;
    for (Token j : {0, 1, 0, 1}) finish.push_back(jssp_apply(state, inst, j));
    CHECK(finish == std::vector<std::int64_t>{3, 2, 5, 7});
    CHECK(state.makespan() == 7);
    CHECK(jssp_makespan(inst, Trajectory{0, 1, 0, 1}) == 7);
    CHECK(jssp_objective(inst, Trajectory{0, 1, 0, 1}) == -7.0);
    CHECK(oracle::event_simulation_makespan(inst, Trajectory{0, 1, 0, 1}) == 7);
    CHECK_THROWS_AS(jssp_apply(state, inst, 0), Error);
    CHECK_THROWS_AS(jssp_makespan(inst, Trajectory{0, 0, 0, 1}), Error);
    CHECK_THROWS_AS(jssp_makespan(inst, Trajectory{0, 1, 0}), Error);

    const auto [next, z] = jssp_step(JsspState::empty(inst), inst, 1);
    CHECK(z == 2);
    CHECK(next.avail_mach[1] == 2);
    CHECK(next.avail_job[1] == 2);
    CHECK(next.next_op[1] == 1);
}

TEST_CASE("a single job runs without contention") {
    auto rng = make_rng(9, {});
    const auto inst = gen_jssp(1, 5, rng);
    std::int64_t total = 0;
    for (std::size_t l = 0; l < 5; ++l) total += inst.proc_time(0, l);
    CHECK(jssp_makespan(inst, Trajectory(5, 0)) == total);
    CHECK(jssp_objective(inst, Trajectory(5, 0)) == -static_cast<double>(total));
}

TEST_CASE("JSSP availabilities never decrease") {
    auto rng = make_rng(10, {});
    for (int c = 0; c < 200; ++c) {
        const auto inst = gen_jssp(1 + uniform_index(rng, 5), 1 + uniform_index(rng, 5), rng);
        auto state = JsspState::empty(inst);
        while (true) {
            std::vector<Token> open;
            for (Token j = 0; j < inst.jobs(); ++j)
                if (state.next_op[j] < inst.machines()) open.push_back(j);
            if (open.empty()) break;
            const auto before = state;
            jssp_apply(state, inst, open[uniform_index(rng, open.size())]);
            for (std::size_t m = 0; m < inst.machines(); ++m) CHECK(state.avail_mach[m] >= before.avail_mach[m]);
            for (std::size_t j = 0; j < inst.jobs(); ++j) CHECK(state.avail_job[j] >= before.avail_job[j]);
        }
    }
}

TEST_CASE("JSSP feasible set is the unfinished jobs") {
    const auto& inst = hand_example();
    CHECK(inst.feasible_tokens(Trajectory{}) == std::vector<Token>{0, 1});
    CHECK(inst.feasible_tokens(Trajectory{0, 0}) == std::vector<Token>{1});
    CHECK(inst.feasible_tokens(Trajectory{0, 0, 1, 1}).empty());
}

TEST_CASE("JSSP features") {
    // Identical jobs look identical on a fresh schedule.
    const JsspInstance twins(3, 2, {0, 1, 0, 1, 0, 1}, {5, 7, 5, 7, 5, 7});
    const auto fresh = twins.candidate_features({});
    for (std::size_t i = 1; i < 3; ++i)
        for (std::size_t d = 0; d < JsspInstance::kFeatureDim; ++d) CHECK(fresh.row(i)[d] == fresh.row(0)[d]);

    const auto& inst = hand_example();
    const auto after = inst.candidate_features(Trajectory{0});
    // Job 1's first op (m1) can start at 0; job 0's second op waits until 3.
    CHECK(after.row(1)[1] == 0.0);
    CHECK(after.row(0)[1] == doctest::Approx(0.03));
    CHECK(jssp_features(inst, jssp_replay(inst, JsspState::empty(inst), Trajectory{0}), 1) ==
          std::vector<double>(after.row(1).begin(), after.row(1).end()));
}

TEST_CASE("JSSP features ignore machine labels") {
    auto rng = make_rng(11, {});
    for (int c = 0; c < 100; ++c) {
        const std::size_t J = 2 + uniform_index(rng, 3), M = 2 + uniform_index(rng, 3);
        const auto inst = gen_jssp(J, M, rng);
        const auto relabel = random_permutation(M, rng);
        std::vector<std::size_t> machines;
        std::vector<std::int64_t> times;
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t l = 0; l < M; ++l) {
                machines.push_back(relabel[inst.machine_of(j, l)]);
                times.push_back(inst.proc_time(j, l));
            }
        const JsspInstance renamed(J, M, machines, times);
        Trajectory prefix;
        for (std::size_t t = 0; t < J * M; ++t) {
            const auto a = inst.candidate_features(prefix);
            const auto b = renamed.candidate_features(prefix);
            CHECK(a.tokens == b.tokens);
            CHECK(a.rows == b.rows);
            prefix.push_back(a.tokens[uniform_index(rng, a.tokens.size())]);
        }
        CHECK(jssp_makespan(inst, prefix) == jssp_makespan(renamed, prefix));
    }
}

TEST_CASE("two-stage replay") {
    auto rng = make_rng(12, {});
    for (int c = 0; c < 200; ++c) {
        const auto inst = gen_jssp(1 + uniform_index(rng, 4), 1 + uniform_index(rng, 4), rng);
        Trajectory seq;
        for (Token j = 0; j < inst.jobs(); ++j) seq.insert(seq.end(), inst.machines(), j);
        const auto perm = random_permutation(seq.size(), rng);
        Trajectory shuffled;
        for (auto p : perm) shuffled.push_back(seq[p]);
        const auto whole = jssp_makespan(inst, shuffled);
        for (std::size_t q = 0; q <= shuffled.size(); ++q) {
            const auto head = jssp_replay(inst, JsspState::empty(inst), TokenView(shuffled).first(q));
            CHECK(jssp_replay(inst, head, TokenView(shuffled).subspan(q)).makespan() == whole);
        }
    }
}

TEST_CASE("instance files") {
    std::istringstream tsp_text("3\n0 0\n0 1\n1 0\n");
    const auto tri = parse_tsp(tsp_text);
    CHECK(tri.size() == 3);
    CHECK(tri.coords()[1] == Point{0.0, 1.0});
    std::ostringstream tsp_out;
    write_tsp(tsp_out, tri);
    CHECK(tsp_out.str() == "3\n0 0\n0 1\n1 0\n");

    std::istringstream jssp_text("2 2\n0 3 1 2\n1 2 0 4\n");
    CHECK(parse_jssp(jssp_text) == hand_example());
    std::ostringstream jssp_out;
    write_jssp(jssp_out, hand_example());
    CHECK(jssp_out.str() == "2 2\n0 3 1 2\n1 2 0 4\n");

    auto line_of = [](auto parse, const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            parse(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of(parse_tsp, "3\n0 0\n0 x\n1 0\n") == 3);
    CHECK(line_of(parse_tsp, "3\n0 0\n0 1\n") == 4);
    CHECK(line_of(parse_tsp, "two\n") == 1);
    CHECK(line_of(parse_jssp, "2 2\n0 3 1 2\n1 2 1 4\n") == 3);
    CHECK(line_of(parse_jssp, "2 2\n0 3 1\n1 2 0 4\n") == 2);
}

TEST_CASE("instance files round-trip") {
    auto rng = make_rng(13, {});
    for (int c = 0; c < 1000; ++c) {
        std::ostringstream first, second;
        if (c % 2 == 0) {
            const auto inst = gen_tsp(3 + uniform_index(rng, 20), rng);
            write_tsp(first, inst);
            std::istringstream in(first.str());
            const auto back = parse_tsp(in);
            CHECK(back.coords() == inst.coords());
            write_tsp(second, back);
        } else {
            const auto inst = gen_jssp(1 + uniform_index(rng, 6), 1 + uniform_index(rng, 6), rng);
            write_jssp(first, inst);
            std::istringstream in(first.str());
            const auto back = parse_jssp(in);
            CHECK(back == inst);
            write_jssp(second, back);
        }
        CHECK(first.str() == second.str());
    }
}

TEST_CASE("problem kinds") {
    CHECK(parse_problem_kind("tsp") == ProblemKind::tsp);
    CHECK(parse_problem_kind("jssp") == ProblemKind::jssp);
    CHECK_THROWS_AS(parse_problem_kind("cvrp"), Error);
    CHECK(feature_dim(ProblemKind::tsp) == 6);
    CHECK(feature_dim(ProblemKind::jssp) == 5);
}
