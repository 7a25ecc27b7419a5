#include "coneflow/diagnostics.hpp"

#include "coneflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace coneflow {

namespace {

// An empty window (lo >= hi) selects every node.
bool inside(double s, Window w) {
    return w.lo >= w.hi || (s >= w.lo && s <= w.hi);
}

double trapezoid(const Profile& f, double h) {
    double sum = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i)
        sum += f[i];
    return sum * h;
}

// centered first and second differences, interior nodes only
double d1(const Profile& f, std::size_t i, double h) {
    return (f[i + 1] - f[i - 1]) / (2.0 * h);
}
double d2(const Profile& f, std::size_t i, double h) {
    return (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
}

// fullDensity / u0pp, formed without subtracting nearly equal numbers
Profile density_ratio(const Potential& phi, const RegularizedBackground& regbg,
                      const BackgroundGeometry& bg) {
    Profile pp, p;
    potential_derivatives(phi, bg.grid.spacing(), pp, p);
    Profile r(pp.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = (regbg.omegaEpsDensity[i] + pp[i]) / bg.u0pp[i];
    return r;
}

} // namespace

const std::vector<std::string>& record_field_names() {
    static const std::vector<std::string> names = {
        "t",           "supPhi",     "supPhidot",       "traceEpsPhi",  "tracePhiEps",
        "calabiS",     "rmMax",      "supXphi",         "coneExp0",     "coneExpInf",
        "solitonResidual", "weakResidual", "holderSeminorm", "calabiSWindow", "rmMaxWindow"};
    return names;
}

std::vector<double> record_values(const DiagnosticsRecord& r) {
    return {r.t,       r.supPhi,   r.supPhidot, r.traceEpsPhi,     r.tracePhiEps,
            r.calabiS, r.rmMax,    r.supXphi,   r.coneExp0,        r.coneExpInf,
            r.solitonResidual, r.weakResidual, r.holderSeminorm, r.calabiSWindow, r.rmMaxWindow};
}

DiagnosticsRecord record_from_values(const std::vector<double>& v) {
    if (v.size() != record_field_names().size())
        throw ParameterError("diagnostics record has wrong field count");
    DiagnosticsRecord r;
    double* fields[] = {&r.t,       &r.supPhi,   &r.supPhidot, &r.traceEpsPhi,     &r.tracePhiEps,
                        &r.calabiS, &r.rmMax,    &r.supXphi,   &r.coneExp0,        &r.coneExpInf,
                        &r.solitonResidual, &r.weakResidual, &r.holderSeminorm,
                        &r.calabiSWindow, &r.rmMaxWindow};
    for (std::size_t i = 0; i < v.size(); ++i)
        *fields[i] = v[i];
    return r;
}

Window DiagnosticsContext::interior() const {
    return {bg->grid.sMin + settings.margin, bg->grid.sMax - settings.margin};
}

double DiagnosticsContext::holder_alpha() const {
    if (settings.holderAlpha > 0.0)
        return settings.holderAlpha;
    return 0.5 * std::min(1.0, 2.0 * std::min(cone.rho0(), cone.rhoInf()));
}

Profile full_density(const Potential& phi, const RegularizedBackground& regbg, double h) {
    Profile pp, p;
    potential_derivatives(phi, h, pp, p);
    for (std::size_t i = 0; i < pp.size(); ++i)
        pp[i] += regbg.omegaEpsDensity[i];
    return pp;
}

std::pair<double, double> trace_ratios(const FlowState& state, const RegularizedBackground& regbg,
                                       double h) {
    const Profile fd = full_density(state.phi, regbg, h);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        const double r = fd[i] / regbg.omegaEpsDensity[i];
        a = std::max(a, r);
        b = std::max(b, 1.0 / r);
    }
    return {a, b};
}

std::pair<double, double> trace_ratios(const FlowState& state, const RegularizedBackground& regbg,
                                       const BackgroundGeometry& bg, Window w) {
    const Profile fd = full_density(state.phi, regbg, bg.grid.spacing());
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        if (!inside(bg.s[i], w))
            continue;
        const double r = fd[i] / regbg.omegaEpsDensity[i];
        a = std::max(a, r);
        b = std::max(b, 1.0 / r);
    }
    return {a, b};
}

double calabi_S(const FlowState& state, const BackgroundGeometry& bg,
                const RegularizedBackground& regbg, Window w) {
    // n = 1: S = g^{-3} |g' - (g0'/g0) g|^2 = u0pp^2 ((g/u0pp)')^2 / g^3
    const double h = bg.grid.spacing();
    const Profile r = density_ratio(state.phi, regbg, bg);
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (!inside(bg.s[i], w))
            continue;
        const double g = r[i] * bg.u0pp[i];
        const double dr = d1(r, i, h) * bg.u0pp[i];
        sup = std::max(sup, dr * dr / (g * g * g));
    }
    return sup;
}

double curvature_max(const FlowState& state, const BackgroundGeometry& bg,
                     const RegularizedBackground& regbg, Window w) {
    // -(log g)'' = -(log(g/u0pp))'' + ric0
    const double h = bg.grid.spacing();
    const Profile r = density_ratio(state.phi, regbg, bg);
    Profile lr(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        lr[i] = std::log(r[i]);
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (!inside(bg.s[i], w))
            continue;
        const double g = r[i] * bg.u0pp[i];
        sup = std::max(sup, std::abs(-d2(lr, i, h) + bg.ric0[i]) / g);
    }
    return sup;
}

double cone_exponent_fit(const Profile& density, const Profile& s, Window w) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < w.lo || s[i] > w.hi)
            continue;
        const double y = std::log(density[i]);
        sx += s[i];
        sy += y;
        sxx += s[i] * s[i];
        sxy += s[i] * y;
        ++count;
    }
    if (count < 4)
        throw ParameterError("cone fit window holds fewer than 4 nodes");
    const double nn = static_cast<double>(count);
    return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

double cone_exponent_fit(const FlowState& state, const RegularizedBackground& regbg,
                         const BackgroundGeometry& bg, Window w) {
    return cone_exponent_fit(full_density(state.phi, regbg, bg.grid.spacing()), bg.s, w);
}

Window auto_cone_window(const RegularizedBackground& regbg, const BackgroundGeometry& bg,
                        const ConeData& cone, Pole pole, double width) {
    const RadialGrid& g = bg.grid;
    const bool zero = pole == Pole::Zero;
    const double rho = zero ? cone.rho0() : cone.rhoInf();
    const double half = 0.5 * width;
    // candidate centres: the half line on the side of the pole, one unit
    // away from the truncation and from s = 0
    const double lo = zero ? g.sMin + 1.0 + half : 2.0 + half;
    const double hi = zero ? -2.0 - half : g.sMax - 1.0 - half;
    if (!(lo < hi))
        throw ParameterError("grid too short for a cone fit window");
    const double deep = zero ? lo : hi;
    if (regbg.k == 0.0 || rho >= 1.0)
        return {deep - half, deep + half};
    const double eps2 = regbg.epsilon * regbg.epsilon;
    const Profile& h = zero ? bg.h0 : bg.hInf;
    const Profile& hp = zero ? bg.h0p : bg.hInfp;
    const Profile& hpp = zero ? bg.h0pp : bg.hInfpp;
    // contamination of the conical slope: eps^2 relative to |s_i|^2, and the
    // reference density relative to the limiting conical term k * chi''
    double best = std::numeric_limits<double>::infinity();
    double centre = deep;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double s = bg.s[i];
        if (s < lo || s > hi)
            continue;
        const double u = std::exp(h[i]);
        const double conical = std::pow(u, rho) * (hp[i] * hp[i] + hpp[i] / rho);
        if (!(conical > 0.0))
            continue;
        const double m = std::max(eps2 / u, bg.u0pp[i] / (regbg.k * conical));
        if (m < best) {
            best = m;
            centre = s;
        }
    }
    return {centre - half, centre + half};
}

double soliton_residual(const FlowState& state, const RegularizedBackground& regbg,
                        const BackgroundGeometry& bg, const ConeData& cone,
                        const VectorFieldData& vf, Window w) {
    const double h = bg.grid.spacing();
    const Profile r = density_ratio(state.phi, regbg, bg);
    Profile lr(r.size()), cg(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        lr[i] = std::log(r[i]);
        cg[i] = vf.c * r[i] * bg.u0pp[i];
    }
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (!inside(bg.s[i], w))
            continue;
        const double g = r[i] * bg.u0pp[i];
        const double ric = -d2(lr, i, h) + bg.ric0[i];
        const double res = ric - cone.gamma * g - (1.0 - cone.beta) * regbg.etaEpsDensity[i] -
                           d1(cg, i, h);
        sup = std::max(sup, std::abs(res));
    }
    return sup;
}

double phidot_curvature_max(const FlowState& state, const BackgroundGeometry& bg, Window w) {
    const double h = bg.grid.spacing();
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < state.phidot.size(); ++i) {
        if (!inside(bg.s[i], w))
            continue;
        sup = std::max(sup, std::abs(d2(state.phidot, i, h)));
    }
    return sup;
}

void test_function_profile(const TestFunction& f, const BackgroundGeometry& bg, Profile& z,
                           Profile& zp, Profile& zpp) {
    const std::size_t n = bg.grid.n;
    z.assign(n, 0.0);
    zp.assign(n, 0.0);
    zpp.assign(n, 0.0);
    if (f.kind == TestFunction::Kind::InteriorBump) {
        if (!(f.a > bg.grid.sMin && f.b < bg.grid.sMax && f.a < f.b))
            throw ParameterError("test function support must lie inside the open grid interval");
        const double scale = 2.0 / (f.b - f.a);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = (2.0 * bg.s[i] - f.a - f.b) / (f.b - f.a);
            if (std::abs(x) >= 1.0)
                continue;
            const double q = 1.0 - x * x;
            const double e = std::exp(-1.0 / q);
            const double g1 = -2.0 * x / (q * q);
            const double g2 = -2.0 / (q * q) - 8.0 * x * x / (q * q * q);
            z[i] = e;
            zp[i] = e * g1 * scale;
            zpp[i] = e * (g1 * g1 + g2) * scale * scale;
        }
        return;
    }
    // smooth function on the sphere: polynomial in the momentum coordinate
    const int k = f.degree;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = bg.u0p[i] - 1.0;
        const double p0 = std::pow(y, k);
        const double p1 = k >= 1 ? k * std::pow(y, k - 1) : 0.0;
        const double p2 = k >= 2 ? k * (k - 1) * std::pow(y, k - 2) : 0.0;
        z[i] = p0;
        zp[i] = p1 * bg.u0pp[i];
        zpp[i] = p2 * bg.u0pp[i] * bg.u0pp[i] + p1 * bg.u0ppp[i];
    }
}

double test_function_time(const TestFunction& f, double t, double& dt) {
    dt = 0.0;
    if (t <= f.t0 || t >= f.t1)
        return 0.0;
    const double w = M_PI / (f.t1 - f.t0);
    const double x = w * (t - f.t0);
    dt = w * std::sin(2.0 * x);
    return std::sin(x) * std::sin(x);
}

std::vector<TestFunction> default_battery(const RadialGrid& grid, double t0, double t1) {
    std::vector<TestFunction> out;
    auto bump = [&](double a, double b) {
        TestFunction f;
        f.kind = TestFunction::Kind::InteriorBump;
        f.a = std::max(a, grid.sMin + 1.0);
        f.b = std::min(b, grid.sMax - 1.0);
        f.t0 = t0;
        f.t1 = t1;
        if (f.a < f.b)
            out.push_back(f);
    };
    bump(-12.0, -2.0);
    bump(-4.0, 4.0);
    bump(2.0, 12.0);
    for (int k = 0; k <= 3; ++k) {
        TestFunction f;
        f.kind = TestFunction::Kind::Sphere;
        f.degree = k;
        f.t0 = t0;
        f.t1 = t1;
        out.push_back(f);
    }
    return out;
}

namespace {

// Time-independent spatial pairings of one test function with each snapshot:
// a[k] = int g zeta ds, b[k] = int (Q zeta'' - c g zeta') ds, plus the source
// pairing shared by all snapshots.
struct Pairings {
    std::vector<double> a, b;
    double source = 0.0;
};

std::vector<Pairings> spatial_pairings(const std::vector<FlowState>& trajectory,
                                       const std::vector<TestFunction>& battery,
                                       const DiagnosticsContext& ctx, WeakForm form) {
    const BackgroundGeometry& bg = *ctx.bg;
    const RegularizedBackground& rb = *ctx.regbg;
    const ConeData& cone = ctx.cone;
    const double h = bg.grid.spacing();
    const std::size_t n = bg.grid.n;
    const std::size_t m = trajectory.size();

    std::vector<Profile> g(m), q(m);
    for (std::size_t k = 0; k < m; ++k) {
        const Profile r = density_ratio(trajectory[k].phi, rb, bg);
        const Profile phi = trajectory[k].phi.values();
        g[k].resize(n);
        q[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[k][i] = r[i] * bg.u0pp[i];
            q[k][i] = std::log(r[i]) + bg.F0[i] + cone.gamma * (rb.k * rb.chi[i] + phi[i]);
        }
    }

    std::vector<Pairings> out;
    Profile z, zp, zpp, integrand(n);
    for (const TestFunction& f : battery) {
        test_function_profile(f, bg, z, zp, zpp);
        Pairings p;
        // (1-beta)(eta or [D]) - lambda (1-beta) omega_0
        if (form == WeakForm::Regularized) {
            for (std::size_t i = 0; i < n; ++i)
                integrand[i] = (rb.etaEpsDensity[i] - cone.lambda * bg.u0pp[i]) * z[i];
            p.source = (1.0 - cone.beta) * trapezoid(integrand, h);
        } else {
            for (std::size_t i = 0; i < n; ++i)
                integrand[i] = -cone.lambda * bg.u0pp[i] * z[i];
            // Poincare-Lelong: each pole carries mass 2 pi tau_i (the common
            // factor 2 pi is applied by the caller)
            p.source = (1.0 - cone.beta) *
                       (trapezoid(integrand, h) + cone.tau0 * z.front() + cone.tauInf * z.back());
        }
        p.a.resize(m);
        p.b.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t i = 0; i < n; ++i)
                integrand[i] = g[k][i] * z[i];
            p.a[k] = trapezoid(integrand, h);
            for (std::size_t i = 0; i < n; ++i)
                integrand[i] = q[k][i] * zpp[i] - ctx.vf.c * g[k][i] * zp[i];
            p.b[k] = trapezoid(integrand, h);
        }
        out.push_back(std::move(p));
    }
    return out;
}

// trapezoid rule in t over snapshots [0, last] with the time factor of f
double time_sum(const std::vector<FlowState>& trajectory, const Pairings& p,
                const TestFunction& f, std::size_t last) {
    double total = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        double w = 0.0;
        if (k > 0)
            w += 0.5 * (trajectory[k].t - trajectory[k - 1].t);
        if (k < last)
            w += 0.5 * (trajectory[k + 1].t - trajectory[k].t);
        double dT = 0.0;
        const double T = test_function_time(f, trajectory[k].t, dT);
        total += w * (p.a[k] * dT + T * (p.b[k] + p.source));
    }
    return 2.0 * M_PI * std::abs(total);
}

} // namespace

double weak_residual(const std::vector<FlowState>& trajectory,
                     const std::vector<TestFunction>& battery, const DiagnosticsContext& ctx,
                     WeakForm form) {
    if (trajectory.size() < 2)
        throw ParameterError("weak residual needs at least two snapshots");
    const std::vector<Pairings> pairs = spatial_pairings(trajectory, battery, ctx, form);
    double worst = 0.0;
    for (std::size_t f = 0; f < battery.size(); ++f)
        worst = std::max(worst, time_sum(trajectory, pairs[f], battery[f], trajectory.size() - 1));
    return worst;
}

std::vector<double> weak_residual_prefixes(const std::vector<FlowState>& trajectory,
                                           const DiagnosticsContext& ctx, WeakForm form) {
    std::vector<double> out(trajectory.size(), 0.0);
    if (trajectory.size() < 2)
        return out;
    std::vector<TestFunction> battery = default_battery(ctx.bg->grid, trajectory.front().t,
                                                        trajectory.back().t);
    const std::vector<Pairings> pairs = spatial_pairings(trajectory, battery, ctx, form);
    for (std::size_t k = 1; k < trajectory.size(); ++k) {
        double worst = 0.0;
        for (std::size_t f = 0; f < battery.size(); ++f) {
            battery[f].t0 = trajectory.front().t;
            battery[f].t1 = trajectory[k].t;
            worst = std::max(worst, time_sum(trajectory, pairs[f], battery[f], k));
        }
        out[k] = worst;
    }
    return out;
}

Profile arc_length(const BackgroundGeometry& bg) {
    // Riemannian length element of omega_0 = u0pp ds^dtheta is sqrt(u0pp/2) ds
    const std::size_t n = bg.grid.n;
    const double h = bg.grid.spacing();
    Profile a(n, 0.0);
    double prev = std::sqrt(0.5 * bg.u0pp[0]);
    for (std::size_t i = 1; i < n; ++i) {
        const double cur = std::sqrt(0.5 * bg.u0pp[i]);
        a[i] = a[i - 1] + 0.5 * h * (prev + cur);
        prev = cur;
    }
    return a;
}

double holder_seminorm(const Profile& phi, double alpha, const BackgroundGeometry& bg, Window w) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("Holder exponent must lie in (0,1)");
    const Profile a = arc_length(bg);
    const std::size_t n = phi.size();
    double sup = 0.0;
    // pairs at power-of-two offsets from every node
    for (std::size_t i = 0; i < n; ++i) {
        if (!inside(bg.s[i], w))
            continue;
        for (std::size_t off = 1; i + off < n; off *= 2) {
            const std::size_t j = i + off;
            if (!inside(bg.s[j], w))
                break;
            const double d = a[j] - a[i];
            if (!(d > 0.0))
                continue;
            sup = std::max(sup, std::abs(phi[j] - phi[i]) / std::pow(d, alpha));
        }
    }
    return sup;
}

std::pair<double, double> sup_bounds(const FlowState& state) {
    double a = 0.0, b = 0.0;
    for (double v : state.phi.values())
        a = std::max(a, std::abs(v));
    for (double v : state.phidot)
        b = std::max(b, std::abs(v));
    return {a, b};
}

double x_phi_sup(const FlowState& state, const VectorFieldData& vf,
                 const RegularizedBackground& regbg, double h) {
    if (vf.c == 0.0)
        return 0.0;
    Profile pp, p;
    potential_derivatives(state.phi, h, pp, p);
    double sup = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        sup = std::max(sup, std::abs(vf.c * (regbg.k * regbg.chip[i] + p[i])));
    return sup;
}

const std::vector<std::string>& window_field_names() {
    static const std::vector<std::string> names{"supPhi",  "supPhidot", "traceEpsPhi",
                                                "tracePhiEps", "calabiS", "rmMax",
                                                "supXphi", "holderSeminorm"};
    return names;
}

std::vector<double> window_values(const WindowDiagnostics& d) {
    return {d.supPhi, d.supPhidot, d.traceEpsPhi, d.tracePhiEps,
            d.calabiS, d.rmMax,    d.supXphi,     d.holderSeminorm};
}

WindowDiagnostics window_diagnostics(const FlowState& state, const DiagnosticsContext& ctx,
                                     Window w) {
    const BackgroundGeometry& bg = *ctx.bg;
    const RegularizedBackground& rb = *ctx.regbg;
    const double h = bg.grid.spacing();
    const Profile v = state.phi.values();
    Profile pp, p;
    potential_derivatives(state.phi, h, pp, p);
    WindowDiagnostics d;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!inside(bg.s[i], w))
            continue;
        d.supPhi = std::max(d.supPhi, std::abs(v[i]));
        d.supPhidot = std::max(d.supPhidot, std::abs(state.phidot[i]));
        d.supXphi = std::max(d.supXphi, std::abs(ctx.vf.c * (rb.k * rb.chip[i] + p[i])));
    }
    std::tie(d.traceEpsPhi, d.tracePhiEps) = trace_ratios(state, rb, bg, w);
    d.calabiS = calabi_S(state, bg, rb, w);
    d.rmMax = curvature_max(state, bg, rb, w);
    d.holderSeminorm = holder_seminorm(v, ctx.holder_alpha(), bg, w);
    return d;
}

DiagnosticsRecord compute_record(const FlowState& state, const DiagnosticsContext& ctx,
                                 double weakResidual) {
    const BackgroundGeometry& bg = *ctx.bg;
    const RegularizedBackground& rb = *ctx.regbg;
    const double h = bg.grid.spacing();
    const Window inner = ctx.interior();
    DiagnosticsRecord r;
    r.t = state.t;
    std::tie(r.supPhi, r.supPhidot) = sup_bounds(state);
    std::tie(r.traceEpsPhi, r.tracePhiEps) = trace_ratios(state, rb, h);
    r.calabiS = calabi_S(state, bg, rb);
    r.rmMax = curvature_max(state, bg, rb);
    r.supXphi = x_phi_sup(state, ctx.vf, rb, h);
    const double width = ctx.settings.coneWindowWidth;
    r.coneExp0 = cone_exponent_fit(state, rb, bg, auto_cone_window(rb, bg, ctx.cone, Pole::Zero, width));
    r.coneExpInf =
        -cone_exponent_fit(state, rb, bg, auto_cone_window(rb, bg, ctx.cone, Pole::Infinity, width));
    r.solitonResidual = soliton_residual(state, rb, bg, ctx.cone, ctx.vf, inner);
    r.weakResidual = weakResidual;
    r.holderSeminorm = holder_seminorm(state.phi.values(), ctx.holder_alpha(), bg);
    r.calabiSWindow = calabi_S(state, bg, rb, inner);
    r.rmMaxWindow = curvature_max(state, bg, rb, inner);
    return r;
}

} // namespace coneflow
