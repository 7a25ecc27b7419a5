#include "coneflow/config.hpp"
#include "coneflow/errors.hpp"
#include "coneflow/flow.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace coneflow;

namespace {

double sup_abs(const Profile& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

FlowConfig small_conical() {
    FlowConfig fc = preset("conical").flow;
    fc.grid = RadialGrid::make(-30.0, 30.0, 385);
    fc.tEnd = 0.2;
    return fc;
}

} // namespace

TEST_CASE("Potential stores increments and round-trips values") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0.0, 1.0);
    Profile v(101);
    for (double& x : v)
        x = N(rng);
    const Potential p = Potential::from_values(v);
    CHECK(p.size() == 101);
    CHECK(p.anchor() == 50);
    const Profile back = p.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-14));
    const Profile twice = p.axpy(1.0, p).values();
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(twice[i] == doctest::Approx(2.0 * v[i]).epsilon(1e-13));
    const Potential c = Potential::constant(11, 3.5);
    for (double x : c.values())
        CHECK(x == 3.5);
}

TEST_CASE("potential_derivatives are exact on quadratics away from the ends") {
    const std::size_t n = 201;
    const double h = 0.1;
    Profile v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = -10.0 + h * static_cast<double>(i);
        v[i] = 0.5 * s * s + 2.0 * s;
    }
    Profile second, first;
    potential_derivatives(Potential::from_values(v), h, second, first);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double s = -10.0 + h * static_cast<double>(i);
        CHECK(second[i] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(first[i] == doctest::Approx(s + 2.0).epsilon(1e-9));
    }
}

TEST_CASE("scheme names round-trip; config validation rejects bad steps") {
    for (Scheme s : {Scheme::ExplicitAdaptive, Scheme::SemiImplicitNewton})
        CHECK(scheme_from_name(scheme_name(s)) == s);
    CHECK_THROWS_AS(scheme_from_name("rk4"), ParameterError);
    FlowConfig fc = preset("conical").flow;
    fc.dtInit = 1.0;
    fc.dtMax = 0.1;
    CHECK_THROWS_AS(fc.validate(), ParameterError);
}

TEST_CASE("the two right-hand-side assemblies agree") {
    const FlowProblem p = FlowProblem::build(preset("conical").flow);
    const FlowState s0 = initial_state(p);
    const Profile a = rhs_eval(s0.phi, p);
    const Profile b = rhs_eval_feps(s0.phi, p.regbg, p.bg, p.config.cone, p.config.vf);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-11).scale(1.0));
}

TEST_CASE("Kahler-Einstein data is a fixed point of the flow") {
    const RunResult r = run(preset("kahler-einstein").flow);
    CHECK(r.trajectory.back().t == 1.0);
    for (const FlowState& s : r.trajectory) {
        CHECK(sup_abs(s.phi.values()) <= 1e-8);
        CHECK(sup_abs(s.phidot) <= 1e-8);
    }
}

TEST_CASE("conical flow: snapshots, positivity and the exponential phidot bound") {
    const FlowConfig fc = small_conical();
    const FlowProblem p = FlowProblem::build(fc);
    RunOptions o;
    o.extraTimes = {0.123};
    const RunResult r = run(p, o);
    bool sawExtra = false;
    for (const FlowState& s : r.trajectory)
        sawExtra = sawExtra || std::abs(s.t - 0.123) < 1e-12;
    CHECK(sawExtra);
    CHECK(r.trajectory.back().t == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(r.records.size() == r.trajectory.size());
    const double d0 = r.records.front().supPhidot;
    for (const DiagnosticsRecord& d : r.records) {
        CHECK(d.supPhidot <= d0 * std::exp(fc.cone.gamma * d.t) * 1.02);
        CHECK(d.traceEpsPhi > 0.0);
        CHECK(d.tracePhiEps > 0.0);
    }
    // the stored phidot is the right-hand side of the stored potential
    const FlowState& last = r.trajectory.back();
    const Profile rhs = rhs_eval(last.phi, p);
    for (std::size_t i = 0; i < rhs.size(); ++i)
        CHECK(last.phidot[i] == rhs[i]);
}

TEST_CASE("halving dtMax changes the implicit solution at first order") {
    FlowConfig a = small_conical();
    a.tEnd = 0.1;
    a.dtInit = a.dtMax = 0.005;
    FlowConfig b = a;
    b.dtInit = b.dtMax = 0.0025;
    FlowConfig c = a;
    c.dtInit = c.dtMax = 0.00125;
    RunOptions o;
    o.diagnostics = false;
    const Profile x = run(a, o).trajectory.back().phi.values();
    const Profile y = run(b, o).trajectory.back().phi.values();
    const Profile z = run(c, o).trajectory.back().phi.values();
    double dxy = 0.0, dyz = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dxy = std::max(dxy, std::abs(x[i] - y[i]));
        dyz = std::max(dyz, std::abs(y[i] - z[i]));
    }
    const double ratio = dxy / dyz;
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
}

TEST_CASE("stationary solve reaches a zero of the right-hand side") {
    const FlowProblem p = FlowProblem::build(small_conical());
    const StationaryResult st = stationary_solve(p);
    CHECK(sup_abs(rhs_eval(st.phi, p)) <= 1e-9);
    const StationaryResult z = stationary_solve(preset("kahler-einstein").flow);
    CHECK(sup_abs(z.phi.values()) <= 1e-8);
}

TEST_CASE("no soliton for a strong vector field on the smooth sphere") {
    FlowConfig fc = preset("smooth-soliton").flow;
    fc.grid = RadialGrid::make(-30.0, 30.0, 385);
    fc.vf.c = 0.5;
    fc.k = 0.0;
    CHECK_THROWS_AS(stationary_solve(fc), ConvergenceError);
}
