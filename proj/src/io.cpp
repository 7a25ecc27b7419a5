#include "coneflow/io.hpp"

#include "coneflow/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace coneflow {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(line);
    while (std::getline(ss, item, ','))
        out.push_back(item);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

double to_real(const std::string& text, std::size_t line) {
    double v = 0.0;
    if (text == "inf")
        return INFINITY;
    if (text == "-inf")
        return -INFINITY;
    if (text == "nan" || text == "-nan")
        return NAN;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ParameterError("line " + std::to_string(line) + ": not a number: '" + text + "'");
    return v;
}

} // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_records_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records) {
    const auto& names = record_field_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        out << (i ? "," : "") << names[i];
    out << '\n';
    for (const DiagnosticsRecord& r : records) {
        const std::vector<double> v = record_values(r);
        for (std::size_t i = 0; i < v.size(); ++i)
            out << (i ? "," : "") << format_real(v[i]);
        out << '\n';
    }
}

void write_records_jsonl(std::ostream& out, const std::vector<DiagnosticsRecord>& records) {
    const auto& names = record_field_names();
    for (const DiagnosticsRecord& r : records) {
        const std::vector<double> v = record_values(r);
        out << '{';
        for (std::size_t i = 0; i < v.size(); ++i) {
            out << (i ? "," : "") << '"' << names[i] << "\":";
            if (std::isfinite(v[i]))
                out << format_real(v[i]);
            else
                out << "null";
        }
        out << "}\n";
    }
}

std::vector<DiagnosticsRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParameterError("diagnostics CSV is empty");
    const auto& names = record_field_names();
    const std::vector<std::string> header = split(line);
    if (header != names)
        throw ParameterError("diagnostics CSV header does not match the record schema");
    std::vector<DiagnosticsRecord> out;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty())
            continue;
        const std::vector<std::string> cells = split(line);
        if (cells.size() != names.size())
            throw ParameterError("line " + std::to_string(lineNo) + ": wrong number of fields");
        std::vector<double> v;
        for (const std::string& c : cells)
            v.push_back(to_real(c, lineNo));
        out.push_back(record_from_values(v));
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<FlowState>& trajectory,
                          const Profile& s) {
    out << "t,node,s,phi,increment\n";
    for (const FlowState& st : trajectory) {
        if (st.phi.size() != s.size())
            throw ParameterError("trajectory and grid sizes differ");
        const Profile v = st.phi.values();
        const std::size_t m = st.phi.anchor();
        const std::string t = format_real(st.t);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double phi = i == m ? st.phi.anchorValue : v[i];
            const double inc = i + 1 < v.size() ? st.phi.increments[i] : 0.0;
            out << t << ',' << i << ',' << format_real(s[i]) << ',' << format_real(phi) << ','
                << format_real(inc) << '\n';
        }
    }
}

std::vector<FlowState> read_trajectory_csv(std::istream& in, const FlowProblem& problem) {
    std::string line;
    if (!std::getline(in, line) || line != "t,node,s,phi,increment")
        throw ParameterError("trajectory CSV: missing or unexpected header");
    const std::size_t n = problem.bg.grid.n;
    std::vector<FlowState> out;
    FlowState cur;
    std::size_t expect = 0;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty())
            continue;
        const std::vector<std::string> c = split(line);
        if (c.size() != 5)
            throw ParameterError("trajectory CSV line " + std::to_string(lineNo) +
                                 ": expected 5 fields");
        const double t = to_real(c[0], lineNo);
        const double node = to_real(c[1], lineNo);
        if (node != static_cast<double>(expect))
            throw ParameterError("trajectory CSV line " + std::to_string(lineNo) +
                                 ": node index out of sequence (grid has " + std::to_string(n) +
                                 " nodes)");
        if (expect == 0) {
            cur = FlowState{};
            cur.t = t;
            cur.phi.increments.assign(n - 1, 0.0);
        } else if (t != cur.t) {
            throw ParameterError("trajectory CSV line " + std::to_string(lineNo) +
                                 ": time changes inside a snapshot");
        }
        if (expect == cur.phi.anchor())
            cur.phi.anchorValue = to_real(c[3], lineNo);
        if (expect + 1 < n)
            cur.phi.increments[expect] = to_real(c[4], lineNo);
        if (++expect == n) {
            cur.phidot = rhs_eval(cur.phi, problem);
            out.push_back(std::move(cur));
            expect = 0;
        }
    }
    if (expect != 0)
        throw ParameterError("trajectory CSV ends inside a snapshot");
    if (out.empty())
        throw ParameterError("trajectory CSV holds no snapshots");
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << content;
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace coneflow
