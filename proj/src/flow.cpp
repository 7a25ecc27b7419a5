#include "coneflow/flow.hpp"

#include "coneflow/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coneflow {

namespace {

double max_abs(const Profile& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

// Right-hand side with the phi-independent part supplied by the caller. When
// inverseDensity is non-null it receives 1/fullDensity for the Jacobian.
// Returns false if fullDensity < floor * omegaEps somewhere (floor > 0), and
// throws PositivityError for non-positive density when floor == 0.
bool evaluate(const Potential& phi, const Profile& base, const RegularizedBackground& rb,
              const BackgroundGeometry& bg, double gamma, double c, double floor, Profile& rhs,
              Profile* inverseDensity) {
    const std::size_t n = phi.size();
    Profile pp, p;
    potential_derivatives(phi, bg.grid.spacing(), pp, p);
    const Profile v = phi.values();
    rhs.resize(n);
    if (inverseDensity)
        inverseDensity->resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double fd = rb.omegaEpsDensity[j] + pp[j];
        if (!(fd > floor * rb.omegaEpsDensity[j])) {
            if (floor > 0.0)
                return false;
            throw PositivityError(j, bg.s[j], fd);
        }
        rhs[j] = std::log(fd / bg.u0pp[j]) + base[j] + gamma * v[j] + c * p[j];
        if (inverseDensity)
            (*inverseDensity)[j] = 1.0 / fd;
    }
    return true;
}

Profile static_part(const RegularizedBackground& rb, const BackgroundGeometry& bg,
                    const ConeData& cone, const VectorFieldData& vf) {
    Profile base(bg.grid.n);
    for (std::size_t j = 0; j < base.size(); ++j)
        base[j] = bg.F0[j] + cone.gamma * rb.k * rb.chi[j] + rb.twist[j] + bg.thetaX[j] +
                  vf.c * rb.k * rb.chip[j];
    return base;
}

// rate of change of a potential whose nodal derivative is r
Potential as_rate(const Profile& r) {
    Potential p;
    p.increments.resize(r.size() - 1);
    for (std::size_t j = 0; j + 1 < r.size(); ++j)
        p.increments[j] = r[j + 1] - r[j];
    p.anchorValue = r[p.anchor()];
    return p;
}

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

// Solves alpha (phi - old) - RHS(phi) = 0 (alpha = 0: stationary problem) by
// damped Newton. The tridiagonal linearization is differenced between
// neighbouring nodes so the unknowns are the increment corrections; the anchor
// correction follows from the anchor row. This keeps full relative accuracy of
// the increments where the metric density is tiny.
NewtonOutcome newton(const FlowProblem& P, const Potential& old, double alpha, Potential& phi,
                     int maxIter, double tol) {
    const BackgroundGeometry& bg = P.bg;
    const RegularizedBackground& rb = P.regbg;
    const double gamma = P.config.cone.gamma;
    const double c = P.config.vf.c;
    const double floor = P.config.tolerances.positivityFloor;
    const std::size_t n = phi.size();
    const std::size_t m = phi.anchor();
    const double h = bg.grid.spacing();
    const double e = std::expm1(h);
    const double scale = alpha > 0.0 ? 1.0 / alpha : 1.0;
    const bool gauge = std::abs(alpha - gamma) < 1e-14;

    Profile rhs, w, R(n);
    auto residual = [&](const Potential& x, Profile& rhsOut, Profile* wOut, Profile& Rout) -> bool {
        if (!evaluate(x, P.base, rb, bg, gamma, c, floor, rhsOut, wOut))
            return false;
        if (alpha > 0.0) {
            const Profile d = x.axpy(-1.0, old).values();
            for (std::size_t j = 0; j < n; ++j)
                Rout[j] = alpha * d[j] - rhsOut[j];
        } else {
            for (std::size_t j = 0; j < n; ++j)
                Rout[j] = -rhsOut[j];
        }
        return true;
    };

    NewtonOutcome out;
    if (!residual(phi, rhs, &w, R)) {
        out.residual = INFINITY;
        return out;
    }
    out.residual = max_abs(R) * scale;

    // One extra step after the value-level tolerance is met: the increments near
    // the poles carry curvature information far below that tolerance.
    bool polished = false;
    Profile L(n), U(n), dl(n), dd(n), du(n), b(n);
    for (int it = 0; it < maxIter; ++it) {
        if (out.residual <= tol) {
            out.converged = true;
            if (polished)
                return out;
            polished = true;
        }
        out.iterations = it + 1;
        // row j of the Jacobian of RHS in terms of increments: L_j d_{j-1} + U_j d_j
        L[0] = 0.0;
        U[0] = (w[0] + c) / e;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            L[j] = -w[j] / (h * h) + c / (2.0 * h);
            U[j] = w[j] / (h * h) + c / (2.0 * h);
        }
        L[n - 1] = (-w[n - 1] + c) / e;
        U[n - 1] = 0.0;

        const std::size_t nn = n - 1;
        for (std::size_t j = 0; j < nn; ++j) {
            dd[j] = (alpha - gamma) - L[j + 1] + U[j];
            if (j + 1 < nn)
                du[j] = -U[j + 1];
            if (j >= 1)
                dl[j - 1] = L[j];
            double dR = -(rhs[j + 1] - rhs[j]);
            if (alpha > 0.0)
                dR += alpha * (phi.increments[j] - old.increments[j]);
            b[j] = -dR;
        }
        const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(nn), 1,
                                              dl.data(), dd.data(), du.data(), b.data(),
                                              static_cast<lapack_int>(nn));
        if (info != 0)
            return out;
        Potential delta;
        delta.increments.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(nn));
        delta.anchorValue =
            gauge ? 0.0
                  : (-R[m] + L[m] * delta.increments[m - 1] + U[m] * delta.increments[m]) /
                        (alpha - gamma);

        double theta = 1.0;
        bool accepted = false;
        Profile rhsTrial, wTrial, Rtrial(n);
        for (int ls = 0; ls < 40; ++ls, theta *= 0.5) {
            Potential trial = phi.axpy(theta, delta);
            if (!residual(trial, rhsTrial, &wTrial, Rtrial))
                continue;
            const double norm = max_abs(Rtrial) * scale;
            if (norm <= (1.0 - 1e-4 * theta) * out.residual || norm <= tol) {
                phi = std::move(trial);
                rhs.swap(rhsTrial);
                w.swap(wTrial);
                R.swap(Rtrial);
                out.residual = norm;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            return out;
    }
    out.converged = out.residual <= tol;
    return out;
}

bool admissible(const Potential& phi, const FlowProblem& P) {
    Profile rhs;
    return evaluate(phi, P.base, P.regbg, P.bg, P.config.cone.gamma, P.config.vf.c,
                    P.config.tolerances.positivityFloor, rhs, nullptr);
}

FlowState step_implicit(const FlowState& state, const FlowProblem& P, double dt) {
    FlowState next = state;
    int rejections = 0;
    while (true) {
        if (dt < 1e-12) {
            std::ostringstream os;
            os << "time step underflow at t=" << state.t;
            throw ConvergenceError(os.str(), dt);
        }
        Potential guess = state.phi.axpy(dt, as_rate(state.phidot));
        if (!admissible(guess, P))
            guess = state.phi;
        const NewtonOutcome res = newton(P, state.phi, 1.0 / dt, guess,
                                         P.config.tolerances.newtonMaxIter,
                                         P.config.tolerances.newton);
        if (res.converged) {
            next.phi = std::move(guess);
            next.phidot = rhs_eval(next.phi, P);
            next.t = state.t + dt;
            next.stepStats.dt = dt;
            next.stepStats.dtNext = std::min(P.config.dtMax, 2.0 * dt);
            next.stepStats.newtonIterations = res.iterations;
            next.stepStats.residualNorm = res.residual;
            next.stepStats.rejections = rejections;
            next.stepStats.converged = true;
            return next;
        }
        dt *= 0.5;
        ++rejections;
    }
}

FlowState step_explicit(const FlowState& state, const FlowProblem& P, double dt) {
    const double tol = P.config.tolerances.localError;
    const double floor = P.config.tolerances.positivityFloor;
    const double gamma = P.config.cone.gamma;
    const double c = P.config.vf.c;
    auto f = [&](const Potential& x, Profile& out) {
        return evaluate(x, P.base, P.regbg, P.bg, gamma, c, floor, out, nullptr);
    };
    int rejections = 0;
    // Bogacki-Shampine 3(2)
    while (true) {
        if (dt < 1e-12) {
            std::ostringstream os;
            os << "time step underflow at t=" << state.t;
            throw ConvergenceError(os.str(), dt);
        }
        const Potential k1 = as_rate(state.phidot);
        Profile r2, r3, r4;
        bool ok = f(state.phi.axpy(0.5 * dt, k1), r2);
        Potential k2, k3, k4, y;
        if (ok) {
            k2 = as_rate(r2);
            ok = f(state.phi.axpy(0.75 * dt, k2), r3);
        }
        if (ok) {
            k3 = as_rate(r3);
            y = state.phi.axpy(2.0 / 9.0 * dt, k1).axpy(1.0 / 3.0 * dt, k2).axpy(4.0 / 9.0 * dt, k3);
            ok = f(y, r4);
        }
        if (!ok) {
            dt *= 0.25;
            ++rejections;
            continue;
        }
        k4 = as_rate(r4);
        Potential err = k1;
        err.anchorValue *= -5.0 / 72.0 * dt;
        for (double& x : err.increments)
            x *= -5.0 / 72.0 * dt;
        err = err.axpy(dt / 12.0, k2).axpy(dt / 9.0, k3).axpy(-dt / 8.0, k4);
        const double norm = max_abs(err.values()) / tol;
        const double factor = std::clamp(0.9 * std::pow(std::max(norm, 1e-10), -1.0 / 3.0), 0.2, 5.0);
        if (norm <= 1.0) {
            FlowState next = state;
            next.phi = std::move(y);
            next.phidot = std::move(r4);
            next.t = state.t + dt;
            next.stepStats.dt = dt;
            next.stepStats.dtNext = std::min(P.config.dtMax, dt * factor);
            next.stepStats.newtonIterations = 0;
            next.stepStats.residualNorm = norm * tol;
            next.stepStats.rejections = rejections;
            next.stepStats.converged = true;
            return next;
        }
        dt *= factor;
        ++rejections;
    }
}

} // namespace

std::string scheme_name(Scheme s) {
    return s == Scheme::ExplicitAdaptive ? "explicit-adaptive" : "semi-implicit-newton";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "explicit-adaptive")
        return Scheme::ExplicitAdaptive;
    if (name == "semi-implicit-newton")
        return Scheme::SemiImplicitNewton;
    throw ParameterError("unknown scheme '" + name +
                         "' (expected explicit-adaptive or semi-implicit-newton)");
}

void FlowConfig::validate() const {
    cone.validate();
    grid.validate();
    if (!(epsilon > 0.0))
        throw ParameterError("epsilon must be positive");
    if (!(k >= 0.0))
        throw ParameterError("k must be nonnegative");
    if (!(dtInit > 0.0) || !(dtMax > 0.0) || dtInit > dtMax)
        throw ParameterError("time steps must satisfy 0 < dtInit <= dtMax");
    if (!(tEnd >= 0.0))
        throw ParameterError("tEnd must be nonnegative");
    if (cone.gamma * dtMax >= 0.5)
        throw ParameterError("dtMax must satisfy gamma*dtMax < 1/2 for the implicit step");
    if (!(tolerances.positivityFloor > 0.0 && tolerances.positivityFloor < 1.0))
        throw ParameterError("positivity floor must lie in (0,1)");
    if (!(tolerances.newton > 0.0) || tolerances.newtonMaxIter < 1)
        throw ParameterError("Newton tolerance and iteration budget must be positive");
    if (!(tolerances.outputCadence > 0.0))
        throw ParameterError("output cadence must be positive");
    if (!(tolerances.localError > 0.0) || !(tolerances.stationary > 0.0))
        throw ParameterError("error tolerances must be positive");
    if (!(diagnostics.margin >= 0.0) || 2.0 * diagnostics.margin >= grid.sMax - grid.sMin)
        throw ParameterError("diagnostic margin leaves an empty interior window");
    if (!(diagnostics.holderAlpha < 1.0))
        throw ParameterError("Holder exponent must be below 1");
    if (!(diagnostics.coneWindowWidth > 0.0))
        throw ParameterError("cone window width must be positive");
}

FlowProblem FlowProblem::build(const FlowConfig& config) {
    config.validate();
    FlowProblem p;
    p.config = config;
    p.bg = build_background(config.grid, config.cone, config.vf);
    p.regbg = build_regularized_background(config.epsilon, config.k, config.cone, p.bg, config.psi);
    p.base = static_part(p.regbg, p.bg, config.cone, config.vf);
    return p;
}

DiagnosticsContext FlowProblem::context() const {
    DiagnosticsContext ctx;
    ctx.bg = &bg;
    ctx.regbg = &regbg;
    ctx.cone = config.cone;
    ctx.vf = config.vf;
    ctx.settings = config.diagnostics;
    return ctx;
}

Profile rhs_eval(const Potential& phi, const RegularizedBackground& regbg,
                 const BackgroundGeometry& bg, const ConeData& cone, const VectorFieldData& vf) {
    Profile rhs;
    evaluate(phi, static_part(regbg, bg, cone, vf), regbg, bg, cone.gamma, vf.c, 0.0, rhs, nullptr);
    return rhs;
}

Profile rhs_eval(const Potential& phi, const FlowProblem& problem) {
    Profile rhs;
    evaluate(phi, problem.base, problem.regbg, problem.bg, problem.config.cone.gamma,
             problem.config.vf.c, 0.0, rhs, nullptr);
    return rhs;
}

Profile rhs_eval_feps(const Potential& phi, const RegularizedBackground& rb,
                      const BackgroundGeometry& bg, const ConeData& cone,
                      const VectorFieldData& vf) {
    Profile pp, p;
    potential_derivatives(phi, bg.grid.spacing(), pp, p);
    const Profile v = phi.values();
    Profile rhs(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double fd = rb.omegaEpsDensity[j] + pp[j];
        if (!(fd > 0.0))
            throw PositivityError(j, bg.s[j], fd);
        rhs[j] = std::log(fd / rb.omegaEpsDensity[j]) + rb.Feps[j] +
                 cone.gamma * (rb.k * rb.chi[j] + v[j]) + bg.thetaX[j] +
                 vf.c * (rb.k * rb.chip[j] + p[j]);
    }
    return rhs;
}

FlowState initial_state(const FlowProblem& problem) {
    FlowState s;
    s.phi = Potential::constant(problem.config.grid.n, problem.config.cEps0);
    s.phidot = rhs_eval(s.phi, problem);
    s.t = 0.0;
    return s;
}

FlowState step(const FlowState& state, const FlowProblem& problem, double dt) {
    if (problem.config.scheme == Scheme::ExplicitAdaptive)
        return step_explicit(state, problem, dt);
    return step_implicit(state, problem, dt);
}

RunResult run(const FlowConfig& config, const RunOptions& options) {
    return run(FlowProblem::build(config), options);
}

RunResult run(const FlowProblem& problem, const RunOptions& options) {
    const FlowConfig& cfg = problem.config;
    const double tEnd = cfg.tEnd;
    const double tiny = 1e-12 * std::max(1.0, tEnd);
    std::vector<double> times;
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * cfg.tolerances.outputCadence;
        if (t >= tEnd - tiny)
            break;
        times.push_back(t);
    }
    times.push_back(tEnd);
    for (double t : options.extraTimes)
        if (t >= 0.0 && t <= tEnd)
            times.push_back(t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [tiny](double a, double b) { return std::abs(a - b) <= tiny; }),
                times.end());

    RunResult result;
    FlowState state = initial_state(problem);
    result.trajectory.push_back(state);
    std::size_t nextSnap = 1;
    double dtPlan = cfg.dtInit;
    while (nextSnap < times.size()) {
        const double target = times[nextSnap];
        const double dt = std::min(dtPlan, target - state.t);
        FlowState next;
        try {
            next = step(state, problem, dt);
        } catch (const ConvergenceError& e) {
            std::ostringstream os;
            os << e.what() << " [flow time " << state.t << "]";
            throw ConvergenceError(os.str(), e.achieved());
        }
        ++result.steps;
        result.rejections += static_cast<std::size_t>(next.stepStats.rejections);
        const bool clipped = dt < dtPlan;
        if (cfg.scheme == Scheme::SemiImplicitNewton) {
            if (next.stepStats.rejections > 0)
                dtPlan = next.stepStats.dt;
            else if (!clipped)
                dtPlan = std::min(cfg.dtMax, 2.0 * dtPlan);
        } else {
            dtPlan = next.stepStats.dtNext;
        }
        state = std::move(next);
        const bool reached = std::abs(state.t - target) <= tiny;
        if (reached) {
            state.t = target;
            ++nextSnap;
        }
        if (reached || options.everyStep)
            result.trajectory.push_back(state);
    }

    if (options.diagnostics) {
        const DiagnosticsContext ctx = problem.context();
        const std::vector<double> weak = weak_residual_prefixes(result.trajectory, ctx);
        for (std::size_t k = 0; k < result.trajectory.size(); ++k)
            result.records.push_back(compute_record(result.trajectory[k], ctx, weak[k]));
    }
    return result;
}

StationaryResult stationary_solve(const FlowConfig& config) {
    return stationary_solve(FlowProblem::build(config));
}

StationaryResult stationary_solve(const FlowProblem& problem) {
    const FlowConfig& cfg = problem.config;
    if (cfg.cone.gamma <= 0.0)
        throw ParameterError("stationary solve needs gamma > 0 (constants are undetermined at gamma = 0)");
    const double tol = cfg.tolerances.stationary;
    StationaryResult out;
    FlowState state = initial_state(problem);
    double dtPlan = cfg.dtInit;
    while (state.t < cfg.tEnd && max_abs(state.phidot) >= tol) {
        const double dt = std::min(dtPlan, cfg.tEnd - state.t);
        state = step(state, problem, dt);
        dtPlan = cfg.scheme == Scheme::SemiImplicitNewton ? std::min(cfg.dtMax, 2.0 * dtPlan)
                                                          : state.stepStats.dtNext;
    }
    out.flowTime = state.t;
    Potential phi = state.phi;
    NewtonOutcome res = newton(problem, phi, 0.0, phi, 200, tol);
    if (!res.converged) {
        // pseudo-transient continuation: implicit steps with growing pseudo
        // time; the steps stay clear of dtau = 1/gamma where the constant mode
        // makes the linearization singular
        phi = state.phi;
        for (double dtau = 0.25 / cfg.cone.gamma; dtau < 1e8; dtau *= 4.0) {
            if (std::abs(dtau * cfg.cone.gamma - 1.0) < 0.5)
                continue;
            Potential next = phi;
            const NewtonOutcome r = newton(problem, phi, 1.0 / dtau, next, 200, 1e-3 * tol);
            if (!r.converged)
                break;
            phi = std::move(next);
        }
        res = newton(problem, phi, 0.0, phi, 200, tol);
    }
    if (!res.converged)
        throw ConvergenceError("stationary solve did not converge", res.residual);
    out.phi = std::move(phi);
    out.residual = res.residual;
    out.newtonIterations = res.iterations;
    return out;
}

} // namespace coneflow
