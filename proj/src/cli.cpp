#include "coneflow/cli.hpp"

#include "coneflow/config.hpp"
#include "coneflow/errors.hpp"
#include "coneflow/fixtures.hpp"
#include "coneflow/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef CONEFLOW_VERSION
#define CONEFLOW_VERSION "0.0.0"
#endif

namespace coneflow {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Bad command-line or input-file usage (exit code 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json record_json(const DiagnosticsRecord& r) {
    json o = json::object();
    const auto& names = record_field_names();
    const std::vector<double> v = record_values(r);
    for (std::size_t i = 0; i < v.size(); ++i)
        o[names[i]] = number(v[i]);
    return o;
}

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v)
        a.push_back(number(x));
    return a;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Window parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw UsageError("--window expects LO:HI, got '" + text + "'");
    try {
        std::size_t a = 0, b = 0;
        const std::string lo = text.substr(0, colon), hi = text.substr(colon + 1);
        Window w{std::stod(lo, &a), std::stod(hi, &b)};
        if (a != lo.size() || b != hi.size())
            throw std::invalid_argument("trailing");
        if (!(w.lo < w.hi))
            throw UsageError("--window needs LO < HI");
        return w;
    } catch (const std::logic_error&) {
        throw UsageError("--window expects LO:HI, got '" + text + "'");
    }
}

std::vector<double> parse_eps_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument("trailing");
        } catch (const std::logic_error&) {
            throw UsageError("--eps-list: '" + item + "' is not a number");
        }
    }
    if (out.empty())
        throw UsageError("--eps-list is empty");
    return out;
}

struct Common {
    std::string configPath;
    std::string presetName;
    std::string outDir = "out";
    bool seedless = false;

    Config load() const {
        if (!configPath.empty() && !presetName.empty())
            throw UsageError("--config and --preset are mutually exclusive");
        if (!presetName.empty())
            return preset(presetName);
        if (configPath.empty())
            throw UsageError("a config is required (--config PATH or --preset NAME)");
        if (!fs::exists(configPath))
            throw UsageError("config file not found: " + configPath);
        return parse_config(configPath);
    }

    // CONEFLOW_OUT takes precedence over --out
    std::string out() const {
        if (const char* env = std::getenv("CONEFLOW_OUT"); env && *env)
            return env;
        return outDir;
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.configPath, "config file");
    cmd->add_option("--preset", c.presetName, "built-in config (kahler-einstein, smooth-soliton, conical)");
    cmd->add_option("--out", c.outDir, "output directory (CONEFLOW_OUT overrides)");
    cmd->add_flag("--seedless", c.seedless, "assert that no randomness is used");
}

struct Manifest {
    json doc = json::object();
    std::string dir;

    Manifest(const std::string& command, const Config& cfg, const std::string& outDir, bool seedless)
        : dir(outDir) {
        doc["command"] = command;
        doc["configHash"] = config_hash(cfg);
        doc["toolVersion"] = tool_version();
        doc["startedAt"] = utc_now();
        // nothing in the library draws random numbers
        doc["seedless"] = seedless;
        doc["outputs"] = json::array();
        doc["runtimes"] = json::object();
    }

    void write(const std::string& rel, const std::string& content, const std::string& role) {
        write_file((fs::path(dir) / rel).string(), content);
        doc["outputs"].push_back({{"path", rel}, {"role", role}});
    }

    void finish() {
        doc["finishedAt"] = utc_now();
        doc["outputs"].push_back({{"path", "manifest.json"}, {"role", "manifest"}});
        write_file((fs::path(dir) / "manifest.json").string(), doc.dump(2) + "\n");
    }
};

std::string records_csv(const std::vector<DiagnosticsRecord>& r) {
    std::ostringstream os;
    write_records_csv(os, r);
    return os.str();
}

std::string records_jsonl(const std::vector<DiagnosticsRecord>& r) {
    std::ostringstream os;
    write_records_jsonl(os, r);
    return os.str();
}

std::string trajectory_csv(const RunResult& r, const FlowProblem& p) {
    std::ostringstream os;
    write_trajectory_csv(os, r.trajectory, p.bg.s);
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const Common& c, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const Config cfg = c.load();
    Manifest m("run", cfg, c.out(), c.seedless);
    m.write("config.cfg", emit_config(cfg), "config");
    const FlowProblem problem = FlowProblem::build(cfg.flow);
    const RunResult r = run(problem);
    m.write("trajectory.csv", trajectory_csv(r, problem), "trajectory");
    m.write("diagnostics.jsonl", records_jsonl(r.records), "diagnostics");
    m.write("diagnostics.csv", records_csv(r.records), "diagnostics");
    m.doc["steps"] = r.steps;
    m.doc["rejections"] = r.rejections;
    m.doc["runtimes"]["totalSeconds"] = seconds_since(t0);
    m.finish();
    out << "run: " << r.trajectory.size() << " snapshots, " << r.steps << " steps -> " << c.out()
        << "\n";
    return kExitOk;
}

int cmd_continuation(const Common& c, const std::string& window, const std::string& epsList,
                     std::optional<unsigned> threads, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Config cfg = c.load();
    if (!window.empty())
        cfg.continuation.settings.window = parse_window(window);
    if (!epsList.empty())
        cfg.continuation.epsList = parse_eps_list(epsList);
    if (threads) {
        if (*threads == 0)
            throw UsageError("--threads must be positive");
        cfg.continuation.settings.threads = *threads;
    }
    Manifest m("continuation", cfg, c.out(), c.seedless);
    m.write("config.cfg", emit_config(cfg), "config");
    const ContinuationReport rep =
        run_sequence(cfg.flow, cfg.continuation.epsList, cfg.continuation.settings);

    json perRun = json::array();
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        FlowConfig fc = cfg.flow;
        fc.epsilon = rep.epsList[i];
        const FlowProblem problem = FlowProblem::build(fc);
        const std::string dir = "runs/" + std::to_string(i) + "/";
        m.write(dir + "trajectory.csv", trajectory_csv(rep.runs[i], problem), "trajectory");
        m.write(dir + "diagnostics.jsonl", records_jsonl(rep.runs[i].records), "diagnostics");
        m.write(dir + "diagnostics.csv", records_csv(rep.runs[i].records), "diagnostics");
        perRun.push_back({{"epsilon", rep.epsList[i]}, {"seconds", rep.perEps[i].runtimeSeconds}});
    }
    m.doc["runtimes"]["perRun"] = perRun;

    json doc = json::parse(report_json(rep));
    if (rep.complete && rep.cauchySuccess) {
        const LimitExtract lim = extract_limit(rep, cfg.flow);
        std::ostringstream os;
        os << "s,lastIterate,extrapolated\n";
        for (std::size_t i = 0; i < lim.s.size(); ++i)
            os << format_real(lim.s[i]) << ',' << format_real(lim.lastIterate[i]) << ','
               << format_real(lim.extrapolated[i]) << '\n';
        m.write("limit.csv", os.str(), "limit");
        doc["limit"] = {{"contractionRatio", number(lim.contractionRatio)},
                        {"extrapolationShift", number(lim.extrapolationShift)},
                        {"holderAlpha", number(lim.holderAlpha)},
                        {"holderCertificate", number(lim.holderCertificate)},
                        {"uniformHolderBound", number(lim.uniformHolderBound)}};
    }
    m.write("report.json", doc.dump(2) + "\n", "report");
    m.doc["runtimes"]["totalSeconds"] = seconds_since(t0);
    m.finish();
    out << "continuation: " << rep.perEps.size() << "/" << cfg.continuation.epsList.size()
        << " runs, cauchy=" << (rep.cauchySuccess ? "yes" : "no")
        << ", last gap/sup=" << rep.finalGapRelative << " -> " << c.out() << "\n";
    if (!rep.complete)
        throw std::runtime_error("continuation incomplete: " + rep.failure);
    return kExitOk;
}

int cmd_diagnose(const Common& c, const std::string& trajectoryPath, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const Config cfg = c.load();
    if (!fs::exists(trajectoryPath))
        throw UsageError("trajectory file not found: " + trajectoryPath);
    const FlowProblem problem = FlowProblem::build(cfg.flow);
    std::istringstream in(read_file(trajectoryPath));
    const std::vector<FlowState> traj = read_trajectory_csv(in, problem);
    if (traj.empty())
        throw UsageError("trajectory file has no snapshots: " + trajectoryPath);
    const DiagnosticsContext ctx = problem.context();
    const std::vector<double> weak = weak_residual_prefixes(traj, ctx);
    std::vector<DiagnosticsRecord> records;
    for (std::size_t k = 0; k < traj.size(); ++k)
        records.push_back(compute_record(traj[k], ctx, weak[k]));
    Manifest m("diagnose", cfg, c.out(), c.seedless);
    m.doc["trajectory"] = trajectoryPath;
    m.write("diagnostics.jsonl", records_jsonl(records), "diagnostics");
    m.write("diagnostics.csv", records_csv(records), "diagnostics");
    m.doc["runtimes"]["totalSeconds"] = seconds_since(t0);
    m.finish();
    out << "diagnose: " << records.size() << " records -> " << c.out() << "\n";
    return kExitOk;
}

int cmd_fixtures(const std::string& outPath, const std::string& checkPath, std::ostream& out) {
    if (!checkPath.empty()) {
        if (!fs::exists(checkPath))
            throw UsageError("fixtures file not found: " + checkPath);
        const auto checks = check_fixtures(parse_fixtures(read_file(checkPath)));
        bool ok = true;
        for (const FixtureCheck& fc : checks) {
            out << (fc.pass ? "ok   " : "FAIL ") << fc.entry.key << " stored=" << format_real(fc.entry.value)
                << " actual=" << format_real(fc.actual) << " dev=" << fc.deviation << "\n";
            ok = ok && fc.pass;
        }
        return ok ? kExitOk : kExitIncomplete;
    }
    const std::string text = format_fixtures(generate_fixtures());
    if (outPath.empty() || outPath == "-")
        out << text;
    else
        write_file(outPath, text);
    return kExitOk;
}

void report_error(std::ostream& err, const std::string& type, const std::string& message,
                  json extra = json::object()) {
    extra["error"] = type;
    extra["message"] = message;
    err << extra.dump() << "\n";
}

} // namespace

std::string tool_version() { return CONEFLOW_VERSION; }

std::string report_json(const ContinuationReport& r) {
    json doc = json::object();
    doc["epsList"] = numbers(r.epsList);
    json per = json::array();
    for (const RunSummary& s : r.perEps)
        per.push_back({{"epsilon", s.epsilon},
                       {"final", record_json(s.final)},
                       {"maxima", record_json(s.maxima)},
                       {"steps", s.steps},
                       {"rejections", s.rejections}});
    doc["perEps"] = per;
    doc["timeSamples"] = numbers(r.timeSamples);
    doc["window"] = {number(r.window.lo), number(r.window.hi)};
    json pw = json::array();
    for (const auto& row : r.pairwiseC0)
        pw.push_back(numbers(row));
    doc["pairwiseC0"] = pw;
    doc["consecutiveGaps"] = numbers(consecutive_gaps(r));
    doc["uniformity"] = {{"supPhi", number(r.uniformity.supPhi)},
                         {"supPhidot", number(r.uniformity.supPhidot)},
                         {"traceEpsPhi", number(r.uniformity.traceEpsPhi)},
                         {"tracePhiEps", number(r.uniformity.tracePhiEps)},
                         {"holderSeminorm", number(r.uniformity.holderSeminorm)},
                         {"A", number(r.uniformity.A)}};
    doc["coneFitTrend"] = numbers(r.coneFitTrend);
    doc["cauchySuccess"] = r.cauchySuccess;
    doc["finalGapRelative"] = number(r.finalGapRelative);
    doc["complete"] = r.complete;
    doc["failure"] = r.failure;
    doc["limitS"] = numbers(r.limitS);
    doc["limitProfile"] = numbers(r.limitProfile);
    return doc.dump(2) + "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conical Kahler-Ricci flow laboratory on the rotationally symmetric sphere", "coneflow"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    Common runOpts, contOpts, diagOpts;
    CLI::App* run = app.add_subcommand("run", "integrate one regularized flow");
    add_common(run, runOpts);

    CLI::App* cont = app.add_subcommand("continuation", "run the eps -> 0 sequence");
    add_common(cont, contOpts);
    std::string window, epsList;
    std::optional<unsigned> threads;
    cont->add_option("--window", window, "comparison window LO:HI in s");
    cont->add_option("--eps-list", epsList, "comma-separated, strictly decreasing eps values");
    cont->add_option("--threads", threads, "worker threads for independent eps runs");

    CLI::App* diag = app.add_subcommand("diagnose", "recompute diagnostics for a stored trajectory");
    add_common(diag, diagOpts);
    std::string trajectoryPath;
    diag->add_option("--trajectory", trajectoryPath, "trajectory CSV written by run")->required();

    CLI::App* fix = app.add_subcommand("fixtures", "regenerate or check the reference values");
    std::string fixOut, fixCheck;
    bool fixSeedless = false;
    fix->add_option("--out", fixOut, "destination file (stdout when omitted)");
    fix->add_option("--check", fixCheck, "compare the library against a stored fixtures file");
    fix->add_flag("--seedless", fixSeedless, "assert that no randomness is used");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForVersion& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            report_error(err, "UsageError", e.what());
            return kExitUsage;
        }
        if (*run)
            return cmd_run(runOpts, out);
        if (*cont)
            return cmd_continuation(contOpts, window, epsList, threads, out);
        if (*diag)
            return cmd_diagnose(diagOpts, trajectoryPath, out);
        if (const char* env = std::getenv("CONEFLOW_OUT"); env && *env && fixOut.empty() && fixCheck.empty())
            fixOut = (fs::path(env) / "oracles.txt").string();
        return cmd_fixtures(fixOut, fixCheck, out);
    } catch (const ConfigError& e) {
        report_error(err, "ConfigError", e.what(), {{"line", e.line()}, {"key", e.key()}});
        return kExitUsage;
    } catch (const UsageError& e) {
        report_error(err, "UsageError", e.what());
        return kExitUsage;
    } catch (const ParameterError& e) {
        report_error(err, "ParameterError", e.what());
        return kExitUsage;
    } catch (const PositivityError& e) {
        report_error(err, "PositivityError", e.what(),
                     {{"node", e.node()}, {"s", number(e.s())}, {"density", number(e.density())}});
        return kExitRuntime;
    } catch (const ConvergenceError& e) {
        report_error(err, "ConvergenceError", e.what(), {{"achieved", number(e.achieved())}});
        return kExitRuntime;
    } catch (const std::exception& e) {
        const std::string what = e.what();
        const bool incomplete = what.rfind("continuation incomplete", 0) == 0;
        report_error(err, incomplete ? "Incomplete" : "RuntimeError", what);
        return incomplete ? kExitIncomplete : kExitRuntime;
    }
}

} // namespace coneflow
