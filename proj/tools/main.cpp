// SPDX-License-Identifier: Apache-2.0
// gumbeldore: training, sampler comparison, oracle suites, instance
// generation and evaluation from the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gumbeldore/compare.hpp"
#include "gumbeldore/oracle.hpp"
#include "gumbeldore/oracle_suites.hpp"
#include "gumbeldore/parallel.hpp"
#include "gumbeldore/policy.hpp"
#include "gumbeldore/problems/instance_io.hpp"
#include "gumbeldore/problems/tsp.hpp"
#include "gumbeldore/selfimprove.hpp"

#ifndef GUMBELDORE_GIT_DESCRIBE
#define GUMBELDORE_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gumbeldore;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Raised for semantically invalid flag combinations detected after parsing.
struct UsageError : Error {
    using Error::Error;
};

enum InstanceStream : std::uint64_t { kCompareInstances = 11, kGenInstances = 12, kEvalSamples = 13 };

// Flags shared by several subcommands.
struct CommonFlags {
    std::string problem = "tsp";
    std::uint64_t seed = 0;
    std::string out;
    std::size_t workers = 1;
    std::size_t k = 32;
    std::size_t rounds = 4;
    double sigma = 0.3;
    double p_min = 0.95;
    std::string mode = "gd";
    std::size_t n = 10;
    std::size_t jobs = 4;
    std::size_t machines = 4;
    bool timing = false;

    ProblemKind kind() const {
        try {
            return parse_problem_kind(problem);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    ProblemSize size() const { return {n, jobs, machines}; }
    SamplerConfig sampler() const {
        SamplerConfig c;
        c.k = k;
        c.n = rounds;
        c.sigma = sigma;
        c.p_min = p_min;
        try {
            c.mode = parse_update_mode(mode);
            c.validate();
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        c.seed = seed;
        return c;
    }
};

void add_problem_flags(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--problem", f.problem, "tsp or jssp")->check(CLI::IsMember({"tsp", "jssp"}));
    cmd.add_option("--n", f.n, "TSP nodes");
    cmd.add_option("--jobs", f.jobs, "JSSP jobs");
    cmd.add_option("--machines", f.machines, "JSSP machines");
}

void add_sampler_flags(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--k", f.k, "beam width per round");
    cmd.add_option("--rounds", f.rounds, "sampling rounds");
    cmd.add_option("--sigma", f.sigma, "advantage step size");
    cmd.add_option("--p-min", f.p_min, "first-round nucleus size");
    cmd.add_option("--mode", f.mode, "trie update: none, gd or theory")->check(CLI::IsMember({"none", "gd", "theory", "theory_gd"}));
}

void add_run_flags(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--seed", f.seed, "master seed");
    cmd.add_option("--out", f.out, "output path");
    cmd.add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd.add_flag("--timing", f.timing, "record wall-clock times and timestamps");
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Buffers JSONL output so the manifest heading it can carry the end time.
class MetricsWriter {
public:
    MetricsWriter(std::string command, json config, std::uint64_t seed, bool timing)
        : command_(std::move(command)), config_(std::move(config)), seed_(seed), timing_(timing),
          start_(timing ? utc_now() : "") {}

    void add(const json& record) { lines_.push_back(record.dump()); }

    void write(const std::string& path) const {
        json manifest;
        manifest["type"] = "manifest";
        manifest["command"] = command_;
        manifest["config"] = config_;
        manifest["seed"] = seed_;
        manifest["git"] = GUMBELDORE_GIT_DESCRIBE;
        if (timing_) {
            manifest["start_time"] = start_;
            manifest["end_time"] = utc_now();
        }
        std::ostringstream text;
        text << manifest.dump() << '\n';
        for (const auto& line : lines_) text << line << '\n';
        if (path.empty() || path == "-") {
            std::cout << text.str();
            return;
        }
        const fs::path p(path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Error("cannot write " + path);
        out << text.str();
    }

private:
    std::string command_;
    json config_;
    std::uint64_t seed_;
    bool timing_;
    std::string start_;
    std::vector<std::string> lines_;
};

json sampler_json(const SamplerConfig& c) {
    return json{{"k", c.k}, {"rounds", c.n}, {"sigma", c.sigma}, {"p_min", c.p_min}, {"mode", to_string(c.mode)}};
}

json size_json(ProblemKind kind, const ProblemSize& s) {
    if (kind == ProblemKind::tsp) return json{{"n", s.nodes}};
    return json{{"jobs", s.jobs}, {"machines", s.machines}};
}

std::vector<fs::path> instance_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw UsageError("instance directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw UsageError("no .txt instances in " + dir);
    return files;
}

Checkpoint load_required_checkpoint(const std::string& path) {
    if (path.empty()) throw UsageError("--checkpoint is required");
    if (!fs::is_regular_file(path)) throw UsageError("checkpoint not found: " + path);
    return load_checkpoint(path);
}

// ---- train / sigma-grid -----------------------------------------------------

struct TrainFlags {
    std::size_t epochs = 40;
    std::size_t instances = 50;
    std::size_t batches = 100;
    std::size_t batch_size = 64;
    double lr = 1e-2;
    std::size_t validation = 100;
    std::optional<std::size_t> switch_epoch;
};

void add_train_flags(CLI::App& cmd, TrainFlags& t) {
    cmd.add_option("--epochs", t.epochs, "training epochs");
    cmd.add_option("--instances", t.instances, "instances sampled per epoch");
    cmd.add_option("--batches", t.batches, "gradient steps per epoch");
    cmd.add_option("--batch-size", t.batch_size, "examples per gradient step");
    cmd.add_option("--lr", t.lr, "learning rate");
    cmd.add_option("--validation", t.validation, "validation instances");
    cmd.add_option("--switch-epoch", t.switch_epoch, "last epoch sampled without nucleus (default epochs/2)");
}

TrainConfig make_train_config(const CommonFlags& f, const TrainFlags& t) {
    TrainConfig c;
    c.problem = f.kind();
    c.size = f.size();
    c.sampler = f.sampler();
    c.instances_per_epoch = t.instances;
    c.batches_per_epoch = t.batches;
    c.batch_size = t.batch_size;
    c.lr = t.lr;
    c.epochs = t.epochs;
    c.validation_size = t.validation;
    c.p_min_switch_epoch = t.switch_epoch;
    c.seed = f.seed;
    c.workers = f.workers;
    try {
        c.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return c;
}

json train_config_json(const TrainConfig& c) {
    return json{{"problem", to_string(c.problem)},
                {"size", size_json(c.problem, c.size)},
                {"sampler", sampler_json(c.sampler)},
                {"instances_per_epoch", c.instances_per_epoch},
                {"batches_per_epoch", c.batches_per_epoch},
                {"batch_size", c.batch_size},
                {"lr", c.lr},
                {"epochs", c.epochs},
                {"validation_size", c.validation_size},
                {"switch_epoch", c.p_min_switch_epoch.value_or(c.epochs / 2)}};
}

json epoch_json(const EpochMetrics& m, bool timing) {
    return json{{"epoch", m.epoch},
                {"mean_val_f", m.mean_val_f},
                {"best_val_f", m.best_val_f},
                {"mean_best_sampled_f", m.mean_best_sampled_f},
                {"dataset_size", m.dataset_size},
                {"promoted", m.promoted},
                {"wall_ms", timing ? m.wall_ms : 0.0}};
}

int cmd_train(const CommonFlags& f, const TrainFlags& t) {
    const auto config = make_train_config(f, t);
    if (f.out.empty()) throw UsageError("train needs --out <dir>");
    const fs::path dir(f.out);
    fs::create_directories(dir);
    MetricsWriter metrics("train", train_config_json(config), f.seed, f.timing);
    const auto result = run_training(
        config, [&](const EpochMetrics& m, const TrainerState&) { metrics.add(epoch_json(m, f.timing)); }, dir);
    save_checkpoint(dir / "final.ckpt", {result.current, config.epochs, 0.0});
    if (!fs::exists(dir / "best.ckpt")) save_checkpoint(dir / "best.ckpt", {result.best, 0, result.best_val_f});
    metrics.write((dir / "metrics.jsonl").string());
    std::cout << "initial_val_f " << result.initial_val_f << " best_val_f " << result.best_val_f << '\n';
    return kExitOk;
}

int cmd_sigma_grid(const CommonFlags& f, const TrainFlags& t, const std::vector<double>& grid, std::size_t warmup,
                   std::size_t eval_instances) {
    const auto config = make_train_config(f, t);
    if (grid.empty()) throw UsageError("--grid needs at least one value");
    json echo = train_config_json(config);
    echo["grid"] = grid;
    echo["warmup_epochs"] = warmup;
    echo["eval_instances"] = eval_instances;
    MetricsWriter metrics("sigma-grid", echo, f.seed, f.timing);
    const auto result = sigma_grid_search(config, grid, warmup, eval_instances);
    for (const auto& m : result.warmup.log) {
        auto line = epoch_json(m, f.timing);
        line["type"] = "warmup_epoch";
        metrics.add(line);
    }
    for (const auto& p : result.grid) metrics.add(json{{"type", "grid"}, {"sigma", p.sigma}, {"mean_best_f", p.mean_best_f}});
    metrics.add(json{{"type", "selected"}, {"sigma", result.selected_sigma}});
    metrics.write(f.out);
    return kExitOk;
}

// ---- sample-compare ---------------------------------------------------------

int cmd_sample_compare(const CommonFlags& f, const std::string& checkpoint_path, const std::string& instance_dir,
                       std::size_t count, std::size_t reps, const std::vector<std::string>& methods, bool only_max) {
    const auto checkpoint = load_required_checkpoint(checkpoint_path);
    const auto kind = checkpoint.policy.kind();
    std::vector<InstancePtr> instances;
    if (!instance_dir.empty()) {
        for (const auto& file : instance_files(instance_dir)) instances.push_back(read_instance_file(file, kind));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            auto rng = make_rng(f.seed, {kCompareInstances, i});
            instances.push_back(generate_instance(kind, f.size(), rng));
        }
    }
    if (instances.empty()) throw UsageError("no instances to compare on");

    CompareConfig config;
    if (!methods.empty()) {
        config.methods.clear();
        try {
            for (const auto& m : methods) config.methods.push_back(parse_sampling_method(m));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    const auto sampler = f.sampler();
    config.k = sampler.k;
    config.max_rounds = sampler.n;
    config.only_max_rounds = only_max;
    config.sigma = sampler.sigma;
    config.p_min = sampler.p_min;
    config.repetitions = reps;
    config.seed = f.seed;
    config.workers = f.workers;
    config.timing = f.timing;
    if (reps == 0) throw UsageError("--reps must be positive");

    json method_names = json::array();
    for (auto m : config.methods) method_names.push_back(to_string(m));
    json echo{{"problem", to_string(kind)},
              {"checkpoint", checkpoint_path},
              {"instances", instance_dir.empty() ? json(count) : json(instance_dir)},
              {"k", config.k},
              {"rounds", config.max_rounds},
              {"only_max_rounds", only_max},
              {"sigma", config.sigma},
              {"p_min", config.p_min},
              {"reps", reps},
              {"methods", method_names}};
    if (instance_dir.empty()) echo["size"] = size_json(kind, f.size());
    MetricsWriter metrics("sample-compare", echo, f.seed, f.timing);

    const auto result = compare_samplers(checkpoint.policy, instances, config);
    for (const auto& r : result.records) {
        metrics.add(json{{"type", "record"},
                         {"method", to_string(r.method)},
                         {"k", r.k},
                         {"n", r.n},
                         {"sigma", r.sigma},
                         {"p_min", r.p_min},
                         {"instance_id", r.instance_id},
                         {"repetition", r.repetition},
                         {"best_f", r.best_f},
                         {"num_samples", r.num_samples},
                         {"num_unique", r.num_unique},
                         {"duplicates", r.num_samples - r.num_unique},
                         {"wall_ms", r.wall_ms}});
    }
    for (const auto& s : result.summaries) {
        metrics.add(json{{"type", "summary"},
                         {"method", to_string(s.method)},
                         {"n", s.n},
                         {"mean_best_f", s.mean_best_f},
                         {"std_err", s.std_err},
                         {"reps", s.per_repetition.size()}});
    }
    metrics.write(f.out);
    return kExitOk;
}

// ---- oracle -----------------------------------------------------------------

int cmd_oracle(const CommonFlags& f, std::vector<std::string> suites, std::size_t cases,
               std::optional<std::size_t> replay_index) {
    const auto known = oracle::suite_names();
    if (suites.empty()) suites = known;
    for (const auto& s : suites)
        if (std::find(known.begin(), known.end(), s) == known.end()) throw UsageError("unknown suite '" + s + "'");
    if (replay_index && suites.size() != 1) throw UsageError("--case needs exactly one --suite");

    MetricsWriter metrics("oracle", json{{"suites", suites}, {"cases", cases}}, f.seed, f.timing);
    bool all_ok = true;
    for (const auto& name : suites) {
        const auto r = replay_index ? oracle::replay_case(name, f.seed, *replay_index)
                                    : oracle::run_suite(name, {f.seed, cases, 10});
        all_ok = all_ok && r.ok();
        std::cerr << name << ": " << r.passed << "/" << r.total << (r.ok() ? " pass" : " FAIL") << '\n';
        json line{{"type", "suite"}, {"suite", name}, {"passed", r.passed}, {"total", r.total}, {"ok", r.ok()},
                  {"details", json::parse(r.details)}};
        json failures = json::array();
        for (const auto& fail : r.failures) {
            failures.push_back(json::parse(fail));
            std::cerr << "  failing case: " << fail << '\n';
        }
        line["failures"] = failures;
        metrics.add(line);
    }
    metrics.write(f.out);
    return all_ok ? kExitOk : kExitFailure;
}

// ---- gen / eval -------------------------------------------------------------

int cmd_gen(const CommonFlags& f, std::size_t count) {
    if (f.out.empty()) throw UsageError("gen needs --out <dir>");
    const auto kind = f.kind();
    fs::create_directories(f.out);
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = make_rng(f.seed, {kGenInstances, i});
        char name[32];
        std::snprintf(name, sizeof name, "instance_%04zu.txt", i);
        write_instance_file(fs::path(f.out) / name, *generate_instance(kind, f.size(), rng));
    }
    std::cout << "wrote " << count << " " << to_string(kind) << " instances to " << f.out << '\n';
    return kExitOk;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoint_path, const std::string& instance_dir) {
    const auto checkpoint = load_required_checkpoint(checkpoint_path);
    const auto kind = checkpoint.policy.kind();
    const auto files = instance_files(instance_dir);
    const auto sampler = f.sampler();

    std::vector<InstancePtr> instances;
    for (const auto& file : files) instances.push_back(read_instance_file(file, kind));

    struct Row {
        double greedy_f = 0.0;
        double best_f = 0.0;
        std::optional<double> optimum;
    };
    std::vector<Row> rows(instances.size());
    parallel_for(instances.size(), f.workers, [&](std::size_t i) {
        const auto& inst = *instances[i];
        rows[i].greedy_f = inst.objective(greedy_rollout(checkpoint.policy, inst));
        auto rng = make_rng(f.seed, {kEvalSamples, i});
        rows[i].best_f = std::max(rows[i].greedy_f, gumbeldore_sample(inst, checkpoint.policy, sampler, rng).best_f);
        if (const auto* tsp = dynamic_cast<const TspInstance*>(&inst); tsp && tsp->size() <= 16)
            rows[i].optimum = oracle::held_karp(*tsp);
    });

    json echo{{"problem", to_string(kind)}, {"checkpoint", checkpoint_path}, {"instances", instance_dir},
              {"sampler", sampler_json(sampler)}};
    MetricsWriter metrics("eval", echo, f.seed, f.timing);
    double greedy_sum = 0.0, best_sum = 0.0, greedy_gap_sum = 0.0, best_gap_sum = 0.0;
    bool all_gaps = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        json line{{"type", "instance"}, {"file", files[i].filename().string()}, {"greedy_f", r.greedy_f}, {"best_f", r.best_f}};
        greedy_sum += r.greedy_f;
        best_sum += r.best_f;
        if (r.optimum) {
            const double greedy_gap = (-r.greedy_f - *r.optimum) / *r.optimum;
            const double best_gap = (-r.best_f - *r.optimum) / *r.optimum;
            line["optimal_length"] = *r.optimum;
            line["greedy_gap"] = greedy_gap;
            line["best_gap"] = best_gap;
            greedy_gap_sum += greedy_gap;
            best_gap_sum += best_gap;
        } else {
            all_gaps = false;
        }
        metrics.add(line);
    }
    const double count = static_cast<double>(rows.size());
    json summary{{"type", "summary"}, {"instances", rows.size()}, {"samples_per_instance", sampler.k * sampler.n},
                 {"mean_greedy_f", greedy_sum / count}, {"mean_best_f", best_sum / count}};
    if (all_gaps) {
        summary["mean_greedy_gap"] = greedy_gap_sum / count;
        summary["mean_best_gap"] = best_gap_sum / count;
    }
    metrics.add(summary);
    metrics.write(f.out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Round-wise stochastic beam search with advantage-based trie updates, and self-improvement training"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI/TOML file with flag defaults; explicit flags override");

    CommonFlags common;
    TrainFlags train_flags;

    auto* train = app.add_subcommand("train", "self-improvement training");
    add_problem_flags(*train, common);
    add_sampler_flags(*train, common);
    add_run_flags(*train, common);
    add_train_flags(*train, train_flags);

    auto* grid_cmd = app.add_subcommand("sigma-grid", "step-size selection by grid search");
    std::vector<double> grid{0.0, 0.1, 0.3, 1.0, 3.0};
    std::size_t warmup_epochs = 5;
    std::size_t grid_eval = 50;
    add_problem_flags(*grid_cmd, common);
    add_sampler_flags(*grid_cmd, common);
    add_run_flags(*grid_cmd, common);
    add_train_flags(*grid_cmd, train_flags);
    grid_cmd->add_option("--grid", grid, "sigma values")->delimiter(',');
    grid_cmd->add_option("--warmup-epochs", warmup_epochs, "sigma=0 training epochs before the search");
    grid_cmd->add_option("--eval-instances", grid_eval, "instances scored per sigma")->check(CLI::PositiveNumber);

    auto* compare = app.add_subcommand("sample-compare", "compare samplers at equal budgets");
    std::string checkpoint_path, instance_dir;
    std::size_t compare_count = 100, reps = 20;
    std::vector<std::string> methods;
    bool only_max_rounds = false;
    add_problem_flags(*compare, common);
    add_sampler_flags(*compare, common);
    add_run_flags(*compare, common);
    compare->add_option("--checkpoint", checkpoint_path, "policy checkpoint");
    compare->add_option("--instances", instance_dir, "instance directory (otherwise generated from the seed)");
    compare->add_option("--count", compare_count, "generated instance count");
    compare->add_option("--reps", reps, "repetitions");
    compare->add_option("--methods", methods, "subset of wr,wor,wor_nucleus,gd,theory_gd")->delimiter(',');
    compare->add_flag("--only-max-rounds", only_max_rounds, "run only the largest round count");

    auto* oracle_cmd = app.add_subcommand("oracle", "run the proof-check suites");
    std::vector<std::string> suites;
    std::size_t cases = 0;
    std::optional<std::size_t> replay_index;
    add_run_flags(*oracle_cmd, common);
    oracle_cmd->add_option("--suite", suites, "suite name (repeatable); default all")->delimiter(',');
    oracle_cmd->add_option("--cases", cases, "cases per suite (estimator: draws per check)");
    oracle_cmd->add_option("--case", replay_index, "replay a single case index");

    auto* gen = app.add_subcommand("gen", "write random instances");
    std::size_t gen_count = 10;
    add_problem_flags(*gen, common);
    add_run_flags(*gen, common);
    gen->add_option("--count", gen_count, "number of instances");

    auto* eval = app.add_subcommand("eval", "greedy and best-of-m evaluation of a checkpoint");
    add_sampler_flags(*eval, common);
    add_run_flags(*eval, common);
    eval->add_option("--checkpoint", checkpoint_path, "policy checkpoint");
    eval->add_option("--instances", instance_dir, "instance directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train) return cmd_train(common, train_flags);
        if (*grid_cmd) return cmd_sigma_grid(common, train_flags, grid, warmup_epochs, grid_eval);
        if (*compare)
            return cmd_sample_compare(common, checkpoint_path, instance_dir, compare_count, reps, methods, only_max_rounds);
        if (*oracle_cmd) return cmd_oracle(common, suites, cases, replay_index);
        if (*gen) return cmd_gen(common, gen_count);
        if (*eval) return cmd_eval(common, checkpoint_path, instance_dir);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
