// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include "coneflow/cli.hpp"
#include "coneflow/config.hpp"
#include "coneflow/continuation.hpp"
#include "coneflow/diagnostics.hpp"
#include "coneflow/fixtures.hpp"
#include "coneflow/flow.hpp"
#include "coneflow/io.hpp"
#include "coneflow/oracles.hpp"
#include "coneflow/regularization.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace coneflow;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<double> eps_sweep() {
    std::vector<double> e;
    for (int j = 2; j <= 10; ++j)
        e.push_back(std::ldexp(1.0, -j));
    return e;
}

// The default conical suite: eps = 2^-2 .. 2^-10, window [-10,10], t in [0,1].
const ContinuationReport& conical_report() {
    static std::optional<ContinuationReport> rep;
    if (!rep) {
        const Config cfg = preset("conical");
        rep = run_sequence(cfg.flow, eps_sweep(), cfg.continuation.settings);
    }
    return *rep;
}

Outcome c1_formula() {
    // 100-point lattice in (lambda, beta) with gamma >= 0
    int checked = 0, wrong = 0;
    for (int i = 1; i <= 10; ++i)
        for (int j = 1; j <= 10; ++j) {
            const double lambda = 0.2 * i;
            const double beta = 0.1 * j;
            if (1.0 - lambda * (1.0 - beta) < 0.0) {
                bool threw = false;
                try {
                    coneflow::gamma(lambda, beta);
                } catch (const ParameterError&) {
                    threw = true;
                }
                ++checked;
                wrong += threw ? 0 : 1;
                continue;
            }
            ++checked;
            if (coneflow::gamma(lambda, beta) != 1.0 - lambda * (1.0 - beta))
                ++wrong;
        }
    double worst = 0.0;
    for (double eps : {0.0, 0.01, 0.1, 0.25})
        for (double rho : {0.3, 0.5, 0.9, 1.0})
            for (double u : {0.05, 0.3, 0.5, 0.9}) {
                // step scaled with u: at eps = 0 the derivative is singular at u = 0
                const double quad = oracle::fd1([&](double x) { return oracle::chi(eps, rho, x); }, u,
                                                std::min(4e-3, 5e-3 * u));
                worst = std::max(worst, std::abs(chi_derivatives(eps, rho, u).first - quad));
            }
    return {wrong == 0 && checked == 100 && worst <= 1e-8,
            std::to_string(checked) + " lattice points, " + std::to_string(wrong) +
                " mismatches; max |chi' - quadrature difference| = " + fmt("%.2e", worst) +
                " (tol 1e-8)"};
}

Outcome c2_regularization() {
    const FlowConfig fc = preset("conical").flow;
    const BackgroundGeometry bg = build_background(fc.grid, fc.cone, fc.vf);
    bool ok = true;
    double chiMax = 0.0, chiMin = INFINITY;
    const double rho = std::min(fc.cone.rho0(), fc.cone.rhoInf());
    // chi increases in u and decreases in eps, so chi_rho(0, 1) = 1/rho^2 bounds the sweep
    const double C = 1.0 / (rho * rho);
    for (double eps : eps_sweep())
        for (int i = 0; i <= 100; ++i) {
            const double x = chi_eval(eps, rho, 0.01 * i);
            chiMax = std::max(chiMax, x);
            chiMin = std::min(chiMin, x);
        }
    ok = ok && chiMin >= 0.0 && chiMax < C;
    double nuStar = INFINITY;
    std::vector<double> supF;
    for (double eps : eps_sweep()) {
        const RegularizedBackground rb = build_regularized_background(eps, fc.k, fc.cone, bg, fc.psi);
        nuStar = std::min(nuStar, rb.nu);
        double m = 0.0;
        for (double f : rb.Feps)
            m = std::max(m, std::abs(f));
        supF.push_back(m);
    }
    ok = ok && nuStar > 0.0;
    // a single bound: the sampled values stay finite and their increments shrink,
    // which rules out the log(1/eps) growth of the individual terms
    bool shrinking = true;
    double CF = 0.0;
    for (std::size_t i = 0; i < supF.size(); ++i) {
        CF = std::max(CF, supF[i]);
        if (!std::isfinite(supF[i]))
            shrinking = false;
        if (i >= 2 && !(supF[i] - supF[i - 1] < supF[i - 1] - supF[i - 2]))
            shrinking = false;
    }
    ok = ok && shrinking;
    return {ok, "0 <= chi <= " + fmt("%.4f", chiMax) + " < C=" + fmt("%.4f", C) + "; nu* = " +
                    fmt("%.6f", nuStar) + "; sup|F_eps| <= " + fmt("%.4f", CF) +
                    (shrinking ? " with shrinking increments" : " with non-shrinking increments")};
}

Outcome c3_fixed_point() {
    Config cfg = preset("kahler-einstein");
    const auto t0 = std::chrono::steady_clock::now();
    const FlowProblem p = FlowProblem::build(cfg.flow);
    const RunResult r = run(p);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double supPhi = 0.0, resid = 0.0;
    for (const DiagnosticsRecord& d : r.records) {
        supPhi = std::max(supPhi, d.supPhi);
        resid = std::max(resid, d.solitonResidual);
    }
    const bool ok = cfg.flow.grid.n == 1025 && r.trajectory.back().t == 1.0 && supPhi <= 1e-8 &&
                    resid <= 1e-8 && secs <= 5.0;
    return {ok, "n=1025, t=1: max sup|phi| = " + fmt("%.2e", supPhi) + ", max soliton residual = " +
                    fmt("%.2e", resid) + ", runtime " + fmt("%.2f", secs) + " s (limit 5 s)"};
}

Outcome c4_max_principle() {
    const ContinuationReport& rep = conical_report();
    const double g = preset("conical").flow.cone.gamma;
    double worst = 0.0;
    for (const RunResult& r : rep.runs)
        for (const DiagnosticsRecord& d : r.records)
            worst = std::max(worst, d.supPhidot / (r.records.front().supPhidot * std::exp(g * d.t)));
    return {rep.complete && rep.runs.size() == 9 && worst <= 1.02,
            "max over 9 runs and all snapshots of sup|phidot(t)| / (sup|phidot(0)| e^{gamma t}) = " +
                fmt("%.6f", worst) + " (limit 1.02)"};
}

Outcome c5_laplacian() {
    const ContinuationReport& rep = conical_report();
    const double A = rep.uniformity.A;
    // the certificate must bound every snapshot of every run
    bool ok = rep.complete && std::isfinite(A) && A >= 1.0;
    for (const RunResult& r : rep.runs)
        for (const DiagnosticsRecord& d : r.records)
            ok = ok && d.traceEpsPhi <= A && d.tracePhiEps <= A && d.t <= 1.0;
    const nlohmann::json doc = nlohmann::json::parse(report_json(rep));
    const bool emitted = doc.at("uniformity").at("A").get<double>() == A;
    return {ok && emitted, "A = " + fmt("%.6f", A) +
                               " bounds both density ratios over eps = 2^-2..2^-10, t in [0,1]; " +
                               (emitted ? "present" : "missing") + " in the report JSON"};
}

Outcome c6_cauchy() {
    const ContinuationReport& rep = conical_report();
    const std::vector<double> g = consecutive_gaps(rep);
    if (g.size() < 6 || rep.perEps.size() < 7)
        return {false, "sweep incomplete: " + rep.failure};
    // g[0] is pairwiseC0(2,3); j = 2..7 covers g[0..5]
    bool monotone = g.size() >= 6;
    for (std::size_t i = 1; i < 6 && monotone; ++i)
        monotone = g[i] < g[i - 1];
    const double sup = rep.perEps[6].maxima.supPhi;
    const double rel = g[5] / sup;
    std::string gaps;
    for (std::size_t i = 0; i < 6; ++i)
        gaps += (i ? ", " : "") + fmt("%.2e", g[i]);
    return {monotone && rel < 1e-3, "gaps j=2..7: " + gaps + (monotone ? " (decreasing)" : " (NOT decreasing)") +
                                        "; gap(7,8)/sup|phi| = " + fmt("%.2e", rel) + " (limit 1e-3)"};
}

Outcome c7_cone_angle() {
    const ContinuationReport& rep = conical_report();
    const double rho0 = preset("conical").flow.cone.rho0();
    const double fit = rep.coneFitTrend.back();
    const double err = std::abs(fit - rho0) / rho0;
    return {err <= 0.05, "eps=2^-10: fitted exponent " + fmt("%.4f", fit) + " vs rho0 " + fmt("%.4f", rho0) +
                             ", relative error " + fmt("%.2f%%", 100.0 * err) + " (limit 5%)"};
}

Outcome c8_weak() {
    // smooth soliton: joint halving of (dt, spacing) from 1537 nodes, scheme order 1
    const FlowConfig base = preset("smooth-soliton").flow;
    std::vector<double> w;
    for (int l = 0; l < 4; ++l) {
        FlowConfig fc = base;
        fc.grid = RadialGrid::make(base.grid.sMin, base.grid.sMax, (base.grid.n - 1) * (std::size_t{1} << l) + 1);
        fc.dtInit = std::ldexp(base.dtInit, -l);
        fc.dtMax = std::ldexp(base.dtMax, -l);
        const FlowProblem p = FlowProblem::build(fc);
        RunOptions o;
        o.everyStep = true;
        o.diagnostics = false;
        const RunResult r = run(p, o);
        w.push_back(weak_residual(r.trajectory, default_battery(fc.grid, 0.0, fc.tEnd), p.context()));
    }
    double minOrder = INFINITY;
    std::string orders;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double q = std::log2(w[i] / w[i + 1]);
        minOrder = std::min(minOrder, q);
        orders += (i ? ", " : "") + fmt("%.3f", q);
    }
    // conical sweep against the point masses, tested with smooth functions on the sphere
    const Config cfg = preset("conical");
    std::vector<double> pm;
    for (double eps : eps_sweep()) {
        FlowConfig fc = cfg.flow;
        fc.epsilon = eps;
        const FlowProblem p = FlowProblem::build(fc);
        RunOptions o;
        o.everyStep = true;
        o.diagnostics = false;
        const RunResult r = run(p, o);
        std::vector<TestFunction> sphere;
        for (const TestFunction& f : default_battery(fc.grid, 0.0, fc.tEnd))
            if (f.kind == TestFunction::Kind::Sphere)
                sphere.push_back(f);
        pm.push_back(weak_residual(r.trajectory, sphere, p.context(), WeakForm::PointMass));
    }
    bool decreasing = true;
    std::string pms;
    for (std::size_t i = 0; i < pm.size(); ++i) {
        pms += (i ? ", " : "") + fmt("%.2e", pm[i]);
        if (i > 0 && !(pm[i] < pm[i - 1]))
            decreasing = false;
    }
    return {minOrder >= 0.9 && decreasing,
            "smooth orders " + orders + " (need >= 0.9); point-mass residuals " + pms +
                (decreasing ? " (decreasing)" : " (NOT decreasing)")};
}

Outcome c9_oracles() {
    const std::vector<FixtureEntry> stored = parse_fixtures(read_file(CONEFLOW_FIXTURES));
    const std::vector<FixtureCheck> checks = check_fixtures(stored);
    // every entry the generator knows must be present in the committed file
    const std::vector<FixtureEntry> fresh = generate_fixtures();
    std::size_t failed = 0, drift = 0;
    std::string first;
    for (const FixtureCheck& c : checks)
        if (!c.pass) {
            ++failed;
            if (first.empty())
                first = c.entry.key;
        }
    for (const FixtureEntry& f : fresh) {
        bool found = false;
        for (const FixtureEntry& e : stored)
            if (e.key == f.key) {
                found = true;
                const double allowed = e.relative ? e.tol * std::abs(e.value) : e.tol;
                if (std::abs(e.value - f.value) > allowed)
                    ++drift;
            }
        if (!found)
            ++drift;
    }
    return {failed == 0 && drift == 0 && stored.size() == fresh.size(),
            std::to_string(checks.size()) + " entries, " + std::to_string(failed) + " library mismatches, " +
                std::to_string(drift) + " drifted or missing" + (first.empty() ? "" : " (first: " + first + ")")};
}

std::vector<double> window_run(FlowConfig fc, double sMax, std::size_t n, Window w) {
    fc.grid = RadialGrid::make(-sMax, sMax, n);
    const FlowProblem p = FlowProblem::build(fc);
    RunOptions o;
    o.diagnostics = false;
    const RunResult r = run(p, o);
    return window_values(window_diagnostics(r.trajectory.back(), p.context(), w));
}

Outcome c10_grid() {
    const Window w{-10.0, 10.0};
    const std::size_t n = 3073;
    const auto& names = window_field_names();
    double worst = 0.0;
    std::string where;
    for (double eps : {0.25, 0.015625}) {
        FlowConfig fc = preset("conical").flow;
        fc.epsilon = eps;
        const std::vector<double> base = window_run(fc, 30.0, n, w);
        const std::vector<double> wide = window_run(fc, 60.0, 2 * n - 1, w);
        const std::vector<double> fine = window_run(fc, 30.0, 2 * n - 1, w);
        for (std::size_t i = 0; i < base.size(); ++i)
            for (double other : {wide[i], fine[i]}) {
                const double rel = std::abs(other - base[i]) / std::max(std::abs(base[i]), 1e-300);
                if (rel > worst) {
                    worst = rel;
                    where = names[i] + " at eps=" + fmt("%g", eps);
                }
            }
    }
    return {worst < 1e-4, "n=3073 on [-30,30], window [-10,10], t=1: max relative change " + fmt("%.2e", worst) +
                              " (" + where + "; limit 1e-4)"};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> all = {
        {"formula fidelity", c1_formula},
        {"regularization bounds", c2_regularization},
        {"fixed point", c3_fixed_point},
        {"maximum-principle shadow", c4_max_principle},
        {"uniform Laplacian shadow", c5_laplacian},
        {"eps-convergence", c6_cauchy},
        {"cone-angle recovery", c7_cone_angle},
        {"weak-form residual", c8_weak},
        {"oracle suite", c9_oracles},
        {"grid/truncation robustness", c10_grid},
    };
    int failures = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        Outcome o;
        try {
            o = all[i].fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("C%zu %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", all[i].name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, all.size());
    return failures == 0 ? 0 : 1;
}
