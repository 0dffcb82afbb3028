// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace gumbeldore {

LinearPolicy::LinearPolicy(ProblemKind kind) : kind_(kind), weights_(feature_dim(kind), 0.0) {}

LinearPolicy::LinearPolicy(ProblemKind kind, std::vector<double> weights) : kind_(kind), weights_(std::move(weights)) {
    if (weights_.size() != feature_dim(kind_)) throw Error("LinearPolicy: weight count does not match feature dimension");
    for (double w : weights_)
        if (!std::isfinite(w)) throw Error("LinearPolicy: non-finite weight");
}

namespace {

const FeaturizedInstance& as_featurized(const Instance& instance, std::size_t dim) {
    const auto* featurized = dynamic_cast<const FeaturizedInstance*>(&instance);
    if (!featurized) throw Error("LinearPolicy: instance provides no features");
    if (featurized->feature_dim() != dim) throw Error("LinearPolicy: feature dimension mismatch");
    return *featurized;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

std::vector<ScoredToken> LinearPolicy::conditional_logits(const Instance& instance, TokenView prefix) const {
    const auto features = as_featurized(instance, weights_.size()).candidate_features(prefix);
    std::vector<ScoredToken> out(features.tokens.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {features.tokens[i], dot(weights_, features.row(i))};
    return out;
}

LossAndGrad nll_loss_and_grad(const LinearPolicy& policy, std::span<const TrainItem> batch) {
    if (batch.empty()) throw Error("nll_loss_and_grad: empty batch");
    const auto& w = policy.weights();
    LossAndGrad out{0.0, std::vector<double>(w.size(), 0.0)};
    std::vector<double> logits;
    for (const auto& item : batch) {
        const auto features = as_featurized(*item.instance, w.size()).candidate_features(item.prefix);
        const auto target = std::find(features.tokens.begin(), features.tokens.end(), item.target);
        if (target == features.tokens.end()) throw Error("nll_loss_and_grad: target token is infeasible");
        const auto target_idx = static_cast<std::size_t>(target - features.tokens.begin());

        logits.resize(features.tokens.size());
        for (std::size_t c = 0; c < logits.size(); ++c) logits[c] = dot(w, features.row(c));
        const double norm = log_sum_exp(logits);
        out.loss += norm - logits[target_idx];
        for (std::size_t c = 0; c < logits.size(); ++c) {
            const double coeff = std::exp(logits[c] - norm) - (c == target_idx ? 1.0 : 0.0);
            const auto row = features.row(c);
            for (std::size_t d = 0; d < w.size(); ++d) out.grad[d] += coeff * row[d];
        }
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    out.loss *= scale;
    for (double& g : out.grad) g *= scale;
    return out;
}

void sgd_step(LinearPolicy& policy, std::span<const double> grad, double lr) {
    if (!(lr > 0.0)) throw Error("sgd_step: learning rate must be positive");
    auto& w = policy.weights();
    if (grad.size() != w.size()) throw Error("sgd_step: gradient size mismatch");
    double norm_sq = 0.0;
    for (double g : grad) {
        if (!std::isfinite(g)) throw Error("sgd_step: non-finite gradient");
        norm_sq += g * g;
    }
    const double norm = std::sqrt(norm_sq);
    const double scale = norm > 1.0 ? lr / norm : lr;
    for (std::size_t d = 0; d < w.size(); ++d) w[d] -= scale * grad[d];
}

Trajectory greedy_rollout(const SequencePolicy& policy, const Instance& instance) {
    Trajectory traj;
    traj.reserve(instance.horizon());
    while (traj.size() < instance.horizon()) {
        const auto logits = policy.conditional_logits(instance, traj);
        if (logits.empty()) throw Error("greedy_rollout: no feasible token");
        const ScoredToken* best = &logits.front();
        for (const auto& s : logits)
            if (s.score > best->score || (s.score == best->score && s.token < best->token)) best = &s;
        traj.push_back(best->token);
    }
    return traj;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string expect_field(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw Error("checkpoint: missing '" + key + "' line");
    if (line.rfind(key + " ", 0) != 0) throw Error("checkpoint: expected '" + key + "', got '" + line + "'");
    return line.substr(key.size() + 1);
}

template <typename T>
T parse_value(const std::string& text, const std::string& what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw Error("checkpoint: malformed " + what + " '" + text + "'");
    return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
    const auto& w = checkpoint.policy.weights();
    out << "problem " << to_string(checkpoint.policy.kind()) << '\n'
        << "feature_dim " << w.size() << '\n'
        << "epoch " << checkpoint.epoch << '\n'
        << "validation_score " << format_double(checkpoint.validation_score) << '\n';
    for (double v : w) out << format_double(v) << '\n';
}

Checkpoint read_checkpoint(std::istream& in) {
    const auto kind = parse_problem_kind(expect_field(in, "problem"));
    const auto dim = parse_value<std::size_t>(expect_field(in, "feature_dim"), "feature_dim");
    const auto epoch = parse_value<std::size_t>(expect_field(in, "epoch"), "epoch");
    const auto score = parse_value<double>(expect_field(in, "validation_score"), "validation_score");
    std::vector<double> weights;
    std::string line;
    while (weights.size() < dim && std::getline(in, line)) weights.push_back(parse_value<double>(line, "weight"));
    if (weights.size() != dim) throw Error("checkpoint: expected " + std::to_string(dim) + " weights");
    return {LinearPolicy(kind, std::move(weights)), epoch, score};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace gumbeldore
