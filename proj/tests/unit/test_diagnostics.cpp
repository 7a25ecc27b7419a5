#include "coneflow/config.hpp"
#include "coneflow/diagnostics.hpp"
#include "coneflow/errors.hpp"
#include "coneflow/flow.hpp"
#include "coneflow/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace coneflow;

TEST_CASE("diagnostics record schema is pinned") {
    const std::vector<std::string> expected = {
        "t",        "supPhi",  "supPhidot", "traceEpsPhi",     "tracePhiEps",
        "calabiS",  "rmMax",   "supXphi",   "coneExp0",        "coneExpInf",
        "solitonResidual", "weakResidual", "holderSeminorm", "calabiSWindow", "rmMaxWindow"};
    CHECK(record_field_names() == expected);
    DiagnosticsRecord r;
    r.t = 0.5;
    r.rmMaxWindow = 7.0;
    const DiagnosticsRecord back = record_from_values(record_values(r));
    CHECK(back.t == 0.5);
    CHECK(back.rmMaxWindow == 7.0);
    CHECK(window_field_names().size() == window_values(WindowDiagnostics{}).size());
}

TEST_CASE("background state: unit density ratios, zero Calabi S, unit curvature") {
    const FlowProblem p = FlowProblem::build(preset("kahler-einstein").flow);
    const FlowState s = initial_state(p);
    const auto [a, b] = trace_ratios(s, p.regbg, p.bg.grid.spacing());
    CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(calabi_S(s, p.bg, p.regbg) <= 1e-20);
    CHECK(curvature_max(s, p.bg, p.regbg, Window{-10.0, 10.0}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(soliton_residual(s, p.regbg, p.bg, p.config.cone, p.config.vf, Window{-10.0, 10.0}) <= 1e-8);
}

TEST_CASE("cone exponent fit recovers exponential slopes") {
    const RadialGrid g = RadialGrid::make(-30.0, 30.0, 1537);
    const Profile s = g.nodes();
    Profile d(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
        d[i] = 3.0 * std::exp(0.37 * s[i]);
    CHECK(cone_exponent_fit(d, s, Window{-25.0, -20.0}) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("auto cone window moves toward the pole as eps shrinks") {
    FlowConfig fc = preset("conical").flow;
    double prev = INFINITY;
    for (int j : {4, 7, 10}) {
        fc.epsilon = std::ldexp(1.0, -j);
        const FlowProblem p = FlowProblem::build(fc);
        const Window w = auto_cone_window(p.regbg, p.bg, fc.cone, Pole::Zero, 2.0);
        CHECK(w.hi - w.lo == doctest::Approx(2.0));
        CHECK(w.lo >= fc.grid.sMin);
        CHECK(w.hi < 0.0);
        CHECK(w.lo < prev);
        prev = w.lo;
    }
}

TEST_CASE("Hoelder seminorm: zero on constants, homogeneous, matches d0^alpha") {
    const BackgroundGeometry bg = build_fubini_study(RadialGrid::make(-30.0, 30.0, 769));
    CHECK(holder_seminorm(Profile(bg.grid.n, 2.0), 0.4, bg) == 0.0);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N(0.0, 1.0);
    Profile v(bg.grid.n);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::sin(0.3 * bg.s[i]) + 0.01 * N(rng);
    Profile w = v;
    for (double& x : w)
        x *= -3.0;
    CHECK(holder_seminorm(w, 0.4, bg) == doctest::Approx(3.0 * holder_seminorm(v, 0.4, bg)).epsilon(1e-12));
    CHECK_THROWS_AS(holder_seminorm(v, 1.0, bg), ParameterError);
    // arc length of the whole meridian is pi (round sphere of area 4 pi)
    const Profile a = arc_length(bg);
    CHECK(a.back() - a.front() == doctest::Approx(M_PI).epsilon(1e-6));
    CHECK(a[500] - a[300] == doctest::Approx(oracle::arc_length(bg.s[300], bg.s[500])).epsilon(1e-5));
}

TEST_CASE("weak residual vanishes on a stationary trajectory and is positive on a moving one") {
    const FlowProblem ke = FlowProblem::build(preset("kahler-einstein").flow);
    RunOptions o;
    o.diagnostics = false;
    const RunResult r = run(ke, o);
    CHECK(weak_residual(r.trajectory, default_battery(ke.config.grid, 0.0, 1.0), ke.context()) <= 1e-8);

    FlowConfig fc = preset("conical").flow;
    fc.grid = RadialGrid::make(-30.0, 30.0, 385);
    fc.tEnd = 0.5;
    const FlowProblem p = FlowProblem::build(fc);
    const RunResult q = run(p, o);
    const std::vector<double> pre = weak_residual_prefixes(q.trajectory, p.context());
    CHECK(pre.size() == q.trajectory.size());
    CHECK(pre.front() == 0.0);
}

TEST_CASE("window diagnostics only look inside the window") {
    FlowConfig fc = preset("conical").flow;
    fc.grid = RadialGrid::make(-30.0, 30.0, 385);
    fc.tEnd = 0.2;
    const FlowProblem p = FlowProblem::build(fc);
    RunOptions o;
    o.diagnostics = false;
    const FlowState s = run(p, o).trajectory.back();
    const WindowDiagnostics wide = window_diagnostics(s, p.context(), Window{-20.0, 20.0});
    const WindowDiagnostics narrow = window_diagnostics(s, p.context(), Window{-5.0, 5.0});
    CHECK(narrow.supPhi <= wide.supPhi);
    CHECK(narrow.calabiS <= wide.calabiS);
    CHECK(narrow.traceEpsPhi <= wide.traceEpsPhi);
}
