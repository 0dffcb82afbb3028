// SPDX-License-Identifier: Apache-2.0
#include "gumbeldore/problems/instance_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace gumbeldore {

std::string to_string(ProblemKind kind) { return kind == ProblemKind::tsp ? "tsp" : "jssp"; }

ProblemKind parse_problem_kind(const std::string& name) {
    if (name == "tsp") return ProblemKind::tsp;
    if (name == "jssp") return ProblemKind::jssp;
    throw Error("unknown problem kind '" + name + "'");
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next line split on single spaces; throws at end of input.
    std::vector<std::string_view> fields() {
        if (!std::getline(in_, current_)) throw ParseError(line_ + 1, "unexpected end of file");
        ++line_;
        std::vector<std::string_view> out;
        std::string_view rest(current_);
        while (!rest.empty()) {
            const auto space = rest.find(' ');
            out.push_back(rest.substr(0, space));
            if (out.back().empty()) throw ParseError(line_, "unexpected whitespace");
            if (space == std::string_view::npos) break;
            rest.remove_prefix(space + 1);
            if (rest.empty()) throw ParseError(line_, "trailing whitespace");
        }
        return out;
    }

    void expect_end() {
        std::string extra;
        while (std::getline(in_, extra)) {
            ++line_;
            if (!extra.empty()) throw ParseError(line_, "unexpected trailing content");
        }
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::string current_;
    std::size_t line_ = 0;
};

template <typename T>
T parse_number(std::string_view text, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ParseError(line, "malformed number '" + std::string(text) + "'");
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

TspInstance parse_tsp(std::istream& in) {
    LineReader reader(in);
    auto header = reader.fields();
    if (header.size() != 1) throw ParseError(reader.line(), "expected node count");
    const auto n = parse_number<std::size_t>(header[0], reader.line());
    if (n < 3) throw ParseError(reader.line(), "need at least 3 nodes");
    std::vector<Point> coords(n);
    for (auto& p : coords) {
        auto f = reader.fields();
        if (f.size() != 2) throw ParseError(reader.line(), "expected 'x y'");
        p = {parse_number<double>(f[0], reader.line()), parse_number<double>(f[1], reader.line())};
        if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0))
            throw ParseError(reader.line(), "coordinates outside the unit square");
    }
    reader.expect_end();
    return TspInstance(std::move(coords));
}

void write_tsp(std::ostream& out, const TspInstance& instance) {
    out << instance.size() << '\n';
    for (const auto& p : instance.coords()) out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
}

JsspInstance parse_jssp(std::istream& in) {
    LineReader reader(in);
    auto header = reader.fields();
    if (header.size() != 2) throw ParseError(reader.line(), "expected 'J M'");
    const auto jobs = parse_number<std::size_t>(header[0], reader.line());
    const auto machines = parse_number<std::size_t>(header[1], reader.line());
    if (jobs == 0 || machines == 0) throw ParseError(reader.line(), "J and M must be positive");
    std::vector<std::size_t> machine_of;
    std::vector<std::int64_t> proc_time;
    for (std::size_t i = 0; i < jobs; ++i) {
        auto f = reader.fields();
        if (f.size() != 2 * machines) throw ParseError(reader.line(), "expected " + std::to_string(machines) + " machine/time pairs");
        std::vector<bool> seen(machines, false);
        for (std::size_t l = 0; l < machines; ++l) {
            const auto m = parse_number<std::size_t>(f[2 * l], reader.line());
            const auto t = parse_number<std::int64_t>(f[2 * l + 1], reader.line());
            if (m >= machines || seen[m]) throw ParseError(reader.line(), "machine row is not a permutation");
            if (t < 1 || t > JsspInstance::kMaxProcTime) throw ParseError(reader.line(), "processing time out of [1, 99]");
            seen[m] = true;
            machine_of.push_back(m);
            proc_time.push_back(t);
        }
    }
    reader.expect_end();
    return JsspInstance(jobs, machines, std::move(machine_of), std::move(proc_time));
}

void write_jssp(std::ostream& out, const JsspInstance& instance) {
    out << instance.jobs() << ' ' << instance.machines() << '\n';
    for (std::size_t i = 0; i < instance.jobs(); ++i) {
        for (std::size_t l = 0; l < instance.machines(); ++l) {
            if (l) out << ' ';
            out << instance.machine_of(i, l) << ' ' << instance.proc_time(i, l);
        }
        out << '\n';
    }
}

std::shared_ptr<const FeaturizedInstance> read_instance_file(const std::filesystem::path& path, ProblemKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open instance file " + path.string());
    if (kind == ProblemKind::tsp) return std::make_shared<TspInstance>(parse_tsp(in));
    return std::make_shared<JsspInstance>(parse_jssp(in));
}

void write_instance_file(const std::filesystem::path& path, const FeaturizedInstance& instance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write instance file " + path.string());
    if (const auto* tsp = dynamic_cast<const TspInstance*>(&instance)) {
        write_tsp(out, *tsp);
    } else if (const auto* jssp = dynamic_cast<const JsspInstance*>(&instance)) {
        write_jssp(out, *jssp);
    } else {
        throw Error("write_instance_file: unsupported instance type");
    }
    if (!out) throw Error("failed writing " + path.string());
}

std::shared_ptr<const FeaturizedInstance> generate_instance(ProblemKind kind, const ProblemSize& size, Rng& rng) {
    if (kind == ProblemKind::tsp) return std::make_shared<TspInstance>(gen_tsp(size.nodes, rng));
    return std::make_shared<JsspInstance>(gen_jssp(size.jobs, size.machines, rng));
}

std::size_t feature_dim(ProblemKind kind) {
    return kind == ProblemKind::tsp ? TspInstance::kFeatureDim : JsspInstance::kFeatureDim;
}

}  // namespace gumbeldore
