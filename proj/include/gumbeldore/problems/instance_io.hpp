// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "gumbeldore/problems/jssp.hpp"
#include "gumbeldore/problems/tsp.hpp"

namespace gumbeldore {

enum class ProblemKind { tsp, jssp };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& name);

/// Parse failure carrying the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// TSP text format: "N" then N lines "x y".
TspInstance parse_tsp(std::istream& in);
void write_tsp(std::ostream& out, const TspInstance& instance);

/// JSSP text format: "J M" then J lines of M "machine time" pairs, machines 0-based.
JsspInstance parse_jssp(std::istream& in);
void write_jssp(std::ostream& out, const JsspInstance& instance);

std::shared_ptr<const FeaturizedInstance> read_instance_file(const std::filesystem::path& path, ProblemKind kind);
void write_instance_file(const std::filesystem::path& path, const FeaturizedInstance& instance);

/// Problem size knobs shared by generators and the CLI.
struct ProblemSize {
    std::size_t nodes = 10;    // TSP
    std::size_t jobs = 4;      // JSSP
    std::size_t machines = 4;  // JSSP
};

std::shared_ptr<const FeaturizedInstance> generate_instance(ProblemKind kind, const ProblemSize& size, Rng& rng);

std::size_t feature_dim(ProblemKind kind);

}  // namespace gumbeldore
