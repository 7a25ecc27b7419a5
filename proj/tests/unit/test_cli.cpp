#include "coneflow/cli.hpp"
#include "coneflow/config.hpp"
#include "coneflow/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace coneflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("coneflow_test_" + name);
    fs::remove_all(p);
    return p;
}

int cli(std::vector<std::string> args, std::string* outText = nullptr, std::string* errText = nullptr) {
    args.insert(args.begin(), "coneflow");
    std::vector<const char*> argv;
    for (const std::string& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (outText)
        *outText = out.str();
    if (errText)
        *errText = err.str();
    return code;
}

ConfigError parse_error(const std::string& text) {
    try {
        parse_config_text(text, "t.cfg");
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected ConfigError");
    return ConfigError("", 0, "", "");
}

} // namespace

TEST_CASE("minimal smooth config is valid with defaults filled") {
    const Config c = parse_config_text("[cone]\nbeta = 1\n\n[vectorField]\nc = 0\n");
    CHECK(c.flow.cone.beta == 1.0);
    CHECK(c.flow.cone.gamma == 1.0);
    CHECK(c.flow.grid.n == 1537);
    CHECK(c.flow.vf.c == 0.0);
    CHECK(parse_config_text("") == Config{});
}

TEST_CASE("config errors are line and key precise") {
    ConfigError e = parse_error("[cone]\nbeta = 0.5\nlambda = 1\ntau0 = 1\ntauInf = 0.5\n");
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).find("degree constraint") != std::string::npos);

    e = parse_error("[cone]\nlambda = 3\nbeta = 0.5\ntau0 = 3\ntauInf = 3\n");
    CHECK(std::string(e.what()).find("γ<0") != std::string::npos);

    e = parse_error("# comment\n[grid]\nn = 100\nspacing = 2\n");
    CHECK(e.line() == 4);
    CHECK(e.key() == "spacing");
    CHECK(std::string(e.what()).rfind("t.cfg:4: key 'spacing'", 0) == 0);

    e = parse_error("[grid]\nn = 100\nn = 200\n");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("first set on line 2") != std::string::npos);

    e = parse_error("[grid]\nn = many\n");
    CHECK(e.key() == "n");
    e = parse_error("[flow]\n");
    CHECK(e.line() == 1);
    e = parse_error("[grid]\n[grid]\n");
    CHECK(e.line() == 2);
    e = parse_error("n = 3\n");
    CHECK(e.line() == 1);
    e = parse_error("[continuation]\nepsList = 0.1, 0.2\n");
    CHECK(e.line() == 1);
}

TEST_CASE("canonical emit round-trips and the hash tracks content") {
    for (const std::string& name : preset_names()) {
        const Config c = preset(name);
        const std::string text = emit_config(c);
        CHECK(parse_config_text(text) == c);
        CHECK(emit_config(parse_config_text(text)) == text);
        CHECK(config_hash(c) == config_hash(parse_config_text(text)));
        CHECK(config_hash(c).size() == 64);
    }
    Config a = preset("conical");
    Config b = a;
    b.flow.epsilon = std::nextafter(a.flow.epsilon, 1.0);
    CHECK(config_hash(a) != config_hash(b));
    CHECK(parse_config_text(emit_config(b)) == b);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("shipped config files equal the presets") {
    for (const std::string& name : preset_names())
        CHECK(parse_config(std::string(CONEFLOW_CONFIGS) + "/" + name + ".cfg") == preset(name));
}

TEST_CASE("diagnostics CSV round-trips bit for bit with a pinned header") {
    DiagnosticsRecord r;
    r.t = 0.1;
    r.supPhi = 1.0 / 3.0;
    r.calabiS = 1e-300;
    std::ostringstream os;
    write_records_csv(os, {r, r});
    const std::string text = os.str();
    CHECK(text.substr(0, text.find('\n')) ==
          "t,supPhi,supPhidot,traceEpsPhi,tracePhiEps,calabiS,rmMax,supXphi,coneExp0,coneExpInf,"
          "solitonResidual,weakResidual,holderSeminorm,calabiSWindow,rmMaxWindow");
    std::istringstream in(text);
    const std::vector<DiagnosticsRecord> back = read_records_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[1].supPhi == r.supPhi);
    CHECK(back[1].calabiS == r.calabiS);
    std::ostringstream js;
    r.rmMax = NAN;
    write_records_jsonl(js, {r});
    const auto doc = nlohmann::json::parse(js.str());
    CHECK(doc["rmMax"].is_null());
    CHECK(doc["supPhi"].get<double>() == r.supPhi);
}

TEST_CASE("trajectory CSV reproduces the potential exactly") {
    FlowConfig fc = preset("conical").flow;
    fc.grid = RadialGrid::make(-30.0, 30.0, 129);
    fc.tEnd = 0.1;
    const FlowProblem p = FlowProblem::build(fc);
    RunOptions o;
    o.diagnostics = false;
    const RunResult r = run(p, o);
    std::ostringstream os;
    write_trajectory_csv(os, r.trajectory, p.bg.s);
    std::istringstream in(os.str());
    const std::vector<FlowState> back = read_trajectory_csv(in, p);
    REQUIRE(back.size() == r.trajectory.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back[k].t == r.trajectory[k].t);
        CHECK(back[k].phi.anchorValue == r.trajectory[k].phi.anchorValue);
        CHECK(back[k].phi.increments == r.trajectory[k].phi.increments);
        CHECK(back[k].phidot == r.trajectory[k].phidot);
    }
}

TEST_CASE("cli run then diagnose reproduces the diagnostics byte for byte") {
    const fs::path dir = scratch("run");
    std::string out, err;
    REQUIRE(cli({"run", "--preset", "kahler-einstein", "--out", dir.string(), "--seedless"}, &out, &err) == 0);
    for (const char* f : {"trajectory.csv", "diagnostics.jsonl", "diagnostics.csv", "manifest.json", "config.cfg"})
        CHECK(fs::exists(dir / f));
    const auto manifest = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
    CHECK(manifest["configHash"] == config_hash(preset("kahler-einstein")));
    CHECK(manifest["toolVersion"] == tool_version());
    CHECK(manifest.contains("startedAt"));
    CHECK(manifest.contains("finishedAt"));
    CHECK(manifest["outputs"].size() == 5);

    // every record of the Kahler-Einstein run stays at the fixed point
    for (const auto& line : {read_file((dir / "diagnostics.jsonl").string())}) {
        std::istringstream in(line);
        std::string rec;
        while (std::getline(in, rec))
            CHECK(nlohmann::json::parse(rec)["supPhi"].get<double>() <= 1e-8);
    }

    const fs::path again = scratch("diagnose");
    REQUIRE(cli({"diagnose", "--config", (dir / "config.cfg").string(), "--trajectory",
                 (dir / "trajectory.csv").string(), "--out", again.string()}) == 0);
    CHECK(read_file((again / "diagnostics.jsonl").string()) == read_file((dir / "diagnostics.jsonl").string()));
    CHECK(read_file((again / "diagnostics.csv").string()) == read_file((dir / "diagnostics.csv").string()));
}

TEST_CASE("cli diagnose is byte-identical on a moving conical run") {
    const fs::path dir = scratch("conical");
    const fs::path cfgPath = dir / "in.cfg";
    Config c = preset("conical");
    c.flow.grid = RadialGrid::make(-30.0, 30.0, 257);
    c.flow.tEnd = 0.2;
    write_file(cfgPath.string(), emit_config(c));
    REQUIRE(cli({"run", "--config", cfgPath.string(), "--out", (dir / "run").string()}) == 0);
    REQUIRE(cli({"diagnose", "--config", cfgPath.string(), "--trajectory", (dir / "run" / "trajectory.csv").string(),
                 "--out", (dir / "diag").string()}) == 0);
    CHECK(read_file((dir / "diag" / "diagnostics.jsonl").string()) ==
          read_file((dir / "run" / "diagnostics.jsonl").string()));
}

TEST_CASE("cli continuation writes the report, per-run artifacts and the limit") {
    const fs::path dir = scratch("cont");
    Config c = preset("conical");
    c.flow.grid = RadialGrid::make(-30.0, 30.0, 257);
    c.flow.tEnd = 0.2;
    c.continuation.settings.cauchyThreshold = 0.5;
    write_file((dir / "in.cfg").string(), emit_config(c));
    std::string out;
    REQUIRE(cli({"continuation", "--config", (dir / "in.cfg").string(), "--out", dir.string(), "--eps-list",
                 "0.25,0.125,0.0625", "--window", "-8:8", "--threads", "2"},
                &out) == 0);
    const auto rep = nlohmann::json::parse(read_file((dir / "report.json").string()));
    CHECK(rep["epsList"].size() == 3);
    CHECK(rep["window"][0] == -8.0);
    CHECK(rep["uniformity"].contains("A"));
    CHECK_FALSE(rep.contains("runtimeSeconds"));
    for (int i = 0; i < 3; ++i)
        CHECK(fs::exists(dir / "runs" / std::to_string(i) / "diagnostics.jsonl"));
    if (rep["cauchySuccess"].get<bool>())
        CHECK(fs::exists(dir / "limit.csv"));
    const auto manifest = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
    CHECK(manifest["runtimes"]["perRun"].size() == 3);
    // the config hash covers the command-line overrides
    Config effective = c;
    effective.continuation.epsList = {0.25, 0.125, 0.0625};
    effective.continuation.settings.window = Window{-8.0, 8.0};
    effective.continuation.settings.threads = 2;
    CHECK(manifest["configHash"] == config_hash(effective));
}

TEST_CASE("cli errors: structured stderr and non-zero exit") {
    std::string out, err;
    const fs::path dir = scratch("bad");
    write_file((dir / "bad.cfg").string(), "[cone]\nlambda = 1\nbeta = 0.5\ntau0 = 1\ntauInf = 0.4\n");
    CHECK(cli({"run", "--config", (dir / "bad.cfg").string(), "--out", dir.string()}, &out, &err) == kExitUsage);
    auto e = nlohmann::json::parse(err);
    CHECK(e["error"] == "ConfigError");
    CHECK(e["line"] == 1);
    CHECK(e["message"].get<std::string>().find("degree constraint") != std::string::npos);

    CHECK(cli({"run", "--out", dir.string()}, &out, &err) == kExitUsage);
    CHECK(nlohmann::json::parse(err)["error"] == "UsageError");
    CHECK(cli({"continuation", "--preset", "conical", "--window", "3", "--out", dir.string()}, &out, &err) == kExitUsage);
    CHECK(cli({"continuation", "--preset", "conical", "--eps-list", "0.1,x", "--out", dir.string()}, &out, &err) ==
          kExitUsage);
    CHECK(cli({"frobnicate"}, &out, &err) == kExitUsage);
    CHECK(cli({"diagnose", "--preset", "conical", "--trajectory", (dir / "missing.csv").string()}, &out, &err) ==
          kExitUsage);
    CHECK(cli({"run", "--preset", "nonsense"}, &out, &err) == kExitUsage);
}

TEST_CASE("CONEFLOW_OUT overrides --out") {
    const fs::path env = scratch("env");
    const fs::path flag = scratch("flag");
    setenv("CONEFLOW_OUT", env.string().c_str(), 1);
    const int code = cli({"run", "--preset", "kahler-einstein", "--out", flag.string()});
    unsetenv("CONEFLOW_OUT");
    CHECK(code == 0);
    CHECK(fs::exists(env / "manifest.json"));
    CHECK_FALSE(fs::exists(flag));
}
