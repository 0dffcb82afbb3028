// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion on stdout, exit status 1
// if any criterion fails.
//
//   acceptance <path-to-gumbeldore-cli> [AC-n ...]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gumbeldore/compare.hpp"
#include "gumbeldore/oracle.hpp"
#include "gumbeldore/oracle_suites.hpp"
#include "gumbeldore/selfimprove.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gumbeldore;

namespace {

constexpr std::uint64_t kSeed = 1;

// AC-5
constexpr std::size_t kCompareNodes = 20;
constexpr std::size_t kCompareEpochs = 10;
constexpr std::size_t kCompareInstances = 100;
constexpr std::size_t kCompareReps = 20;
constexpr double kCompareSigma = 0.3;
constexpr double kCompareNucleus = 0.95;
constexpr double kSignAlpha = 0.05;

// AC-6
constexpr std::size_t kTrainNodes = 10;
constexpr std::size_t kTrainEpochs = 40;
constexpr double kGapRatio = 0.6;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

Outcome suite_outcome(std::initializer_list<const char*> names) {
    Outcome out{true, ""};
    for (const char* name : names) {
        const auto r = oracle::run_suite(name, {kSeed, 0, 10});
        out.pass = out.pass && r.ok();
        if (!out.detail.empty()) out.detail += ", ";
        out.detail += std::string(name) + " " + std::to_string(r.passed) + "/" + std::to_string(r.total);
        if (r.details != "{}") out.detail += " " + r.details;
        for (const auto& f : r.failures) out.detail += " failing case " + f;
    }
    return out;
}

TrainConfig tsp_training(std::size_t nodes, std::size_t epochs, std::uint64_t seed) {
    TrainConfig c;
    c.problem = ProblemKind::tsp;
    c.size.nodes = nodes;
    c.epochs = epochs;
    c.seed = seed;
    return c;
}

/// Mean relative Held–Karp gap of the greedy rollouts on the set.
double mean_gap(const SequencePolicy& policy, const std::vector<InstancePtr>& set) {
    double total = 0.0;
    for (const auto& inst : set) {
        const auto& tsp = dynamic_cast<const TspInstance&>(*inst);
        const double opt = oracle::held_karp(tsp);
        total += (-tsp.objective(greedy_rollout(policy, tsp)) - opt) / opt;
    }
    return total / static_cast<double>(set.size());
}

/// Per-instance mean best f over repetitions for one method at n rounds.
std::vector<double> per_instance_mean(const CompareResult& result, SamplingMethod method, std::size_t n,
                                      std::size_t instances) {
    std::vector<double> sum(instances, 0.0), count(instances, 0.0);
    for (const auto& r : result.records) {
        if (r.method != method || r.n != n) continue;
        sum[r.instance_id] += r.best_f;
        count[r.instance_id] += 1.0;
    }
    for (std::size_t i = 0; i < instances; ++i) sum[i] /= count[i];
    return sum;
}

struct SignTest {
    std::size_t wins = 0, losses = 0;
    double p = 1.0;
};

/// One-sided test that `a` has the higher objective (shorter tour) than `b`.
SignTest paired_sign_test(const std::vector<double>& a, const std::vector<double>& b) {
    SignTest t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) ++t.wins;
        if (a[i] < b[i]) ++t.losses;
    }
    t.p = sign_test_p_value(t.wins, t.wins + t.losses);
    return t;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

Outcome ac5() {
    const auto training = run_training(tsp_training(kCompareNodes, kCompareEpochs, kSeed));
    const LinearPolicy& frozen = training.best;

    std::vector<InstancePtr> instances;
    for (std::size_t i = 0; i < kCompareInstances; ++i) {
        auto rng = make_rng(kSeed, {0xac5, i});
        instances.push_back(generate_instance(ProblemKind::tsp, {kCompareNodes, 0, 0}, rng));
    }
    CompareConfig config;
    config.k = 32;
    config.max_rounds = 4;
    config.only_max_rounds = true;
    config.sigma = kCompareSigma;
    config.repetitions = kCompareReps;
    config.seed = kSeed;

    config.methods = {SamplingMethod::wor, SamplingMethod::gd};
    config.p_min = 1.0;
    const auto plain = compare_samplers(frozen, instances, config);
    config.methods = {SamplingMethod::gd};
    config.p_min = kCompareNucleus;
    const auto nucleus = compare_samplers(frozen, instances, config);

    const auto wor = per_instance_mean(plain, SamplingMethod::wor, 4, kCompareInstances);
    const auto gd = per_instance_mean(plain, SamplingMethod::gd, 4, kCompareInstances);
    const auto gd_nucleus = per_instance_mean(nucleus, SamplingMethod::gd, 4, kCompareInstances);
    const auto t1 = paired_sign_test(gd, wor);
    const auto t2 = paired_sign_test(gd_nucleus, wor);

    Outcome out;
    out.pass = mean(gd) >= mean(wor) && t1.p < kSignAlpha && mean(gd_nucleus) >= mean(wor) && t2.p < kSignAlpha;
    out.detail = "checkpoint val " + fmt(training.best_val_f) + "; mean tour wor " + fmt(-mean(wor), 6) + ", gd " +
                 fmt(-mean(gd), 6) + " (" + std::to_string(t1.wins) + "-" + std::to_string(t1.losses) + ", p " +
                 fmt(t1.p, 3) + "), gd p_min " + fmt(kCompareNucleus, 2) + " " + fmt(-mean(gd_nucleus), 6) + " (" +
                 std::to_string(t2.wins) + "-" + std::to_string(t2.losses) + ", p " + fmt(t2.p, 3) + ")";
    return out;
}

Outcome ac6() {
    const auto config = tsp_training(kTrainNodes, kTrainEpochs, kSeed);
    const auto result = run_training(config);
    const double initial = mean_gap(LinearPolicy(ProblemKind::tsp), result.validation);
    const double final_gap = mean_gap(result.best, result.validation);

    bool monotone = true;
    double prev = result.initial_val_f;
    std::size_t promotions = 0;
    for (const auto& m : result.log) {
        monotone = monotone && m.best_val_f >= prev;
        prev = m.best_val_f;
        promotions += m.promoted;
    }
    Outcome out;
    out.pass = monotone && final_gap <= kGapRatio * initial;
    out.detail = "gap epoch 0 " + fmt(initial) + ", final " + fmt(final_gap) + " (ratio " + fmt(final_gap / initial, 3) +
                 ", limit " + fmt(kGapRatio, 2) + "), " + std::to_string(promotions) + " promotions, best curve " +
                 (monotone ? "non-decreasing" : "DECREASES");
    return out;
}

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome ac8(const std::string& cli) {
    const auto root = fs::temp_directory_path() / "gumbeldore_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string ckpt = (root / "ckpt").string();
    if (run_cli(cli, "train --epochs 0 --n 8 --validation 5 --out " + ckpt) != 0) return {false, "cannot create checkpoint"};
    if (run_cli(cli, "gen --n 8 --count 4 --seed 2 --out " + (root / "inst").string()) != 0) return {false, "gen failed"};

    // Where a command leaves its output: a metrics file inside --out, a
    // directory of instance files, or --out itself.
    enum class Output { train_dir, instance_dir, file };
    struct Command {
        std::string name, args;
        Output output;
    };
    const std::vector<Command> commands{
        {"train", "train --n 8 --epochs 2 --instances 6 --batches 10 --batch-size 16 --validation 6 --k 8 --rounds 3 --seed 5", Output::train_dir},
        {"train-jssp", "train --problem jssp --jobs 3 --machines 3 --epochs 2 --instances 6 --batches 10 --validation 6 --k 8 --seed 6", Output::train_dir},
        {"sample-compare", "sample-compare --checkpoint " + ckpt + "/final.ckpt --n 8 --count 6 --reps 3 --k 8 --rounds 2 --seed 7", Output::file},
        {"eval", "eval --checkpoint " + ckpt + "/final.ckpt --instances " + (root / "inst").string() + " --k 8 --rounds 2 --seed 8", Output::file},
        {"sigma-grid", "sigma-grid --n 8 --warmup-epochs 1 --eval-instances 4 --grid 0,0.5 --instances 4 --batches 5 --validation 4 --k 8 --seed 9", Output::file},
        {"oracle", "oracle --suite lemma,jssp,wor --cases 200 --seed 10", Output::file},
        {"gen", "gen --problem jssp --jobs 4 --machines 3 --count 5 --seed 11", Output::instance_dir},
    };

    auto collect = [](const fs::path& target, Output kind) {
        if (kind == Output::file) return slurp(target);
        if (kind == Output::train_dir) return slurp(target / "metrics.jsonl");
        std::string all;
        for (const auto& e : std::set<fs::path>(fs::directory_iterator(target), fs::directory_iterator()))
            all += e.filename().string() + "\n" + slurp(e);
        return all;
    };

    Outcome out{true, ""};
    std::size_t identical = 0;
    for (const auto& c : commands) {
        std::vector<std::string> outputs;
        for (const char* workers : {"1", "1", "8", "8"}) {
            const auto target = root / (c.name + "_" + std::to_string(outputs.size()));
            const int code = run_cli(cli, c.args + " --workers " + workers + " --out " + target.string());
            if (code != 0) {
                out.detail += c.name + " exited " + std::to_string(code) + "; ";
                break;
            }
            outputs.push_back(collect(target, c.output));
        }
        const bool same = outputs.size() == 4 && !outputs[0].empty() &&
                          std::all_of(outputs.begin(), outputs.end(), [&](const auto& o) { return o == outputs[0]; });
        if (same) ++identical;
        else if (outputs.size() == 4) out.detail += c.name + " differs; ";
    }
    out.pass = identical == commands.size();
    fs::remove_all(root);
    out.detail += std::to_string(identical) + "/" + std::to_string(commands.size()) +
                  " commands byte-identical across reruns and workers 1, 8";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <gumbeldore-cli> [AC-n ...]\n";
        return 2;
    }
    const std::string cli = argv[1];
    std::set<std::string> only(argv + 2, argv + argc);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC-1", [] { return suite_outcome({"wor"}); }},
        {"AC-2", [] { return suite_outcome({"mass"}); }},
        {"AC-3", [] { return suite_outcome({"improvement", "lemma"}); }},
        {"AC-4", [] { return suite_outcome({"estimator"}); }},
        {"AC-5", ac5},
        {"AC-6", ac6},
        {"AC-7", [] { return suite_outcome({"jssp"}); }},
        {"AC-8", [&] { return ac8(cli); }},
    };

    bool all = true;
    for (const auto& [name, check] : criteria) {
        if (!only.empty() && !only.count(name)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && o.pass;
        std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << " (" << fmt(secs, 3) << " s) " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
