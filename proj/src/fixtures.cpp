#include "coneflow/fixtures.hpp"

#include "coneflow/config.hpp"
#include "coneflow/continuation.hpp"
#include "coneflow/diagnostics.hpp"
#include "coneflow/errors.hpp"
#include "coneflow/flow.hpp"
#include "coneflow/io.hpp"
#include "coneflow/oracles.hpp"
#include "coneflow/regularization.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

namespace coneflow {

namespace {

namespace orc = coneflow::oracle;

constexpr double kSMax = 30.0;

RadialGrid default_grid() { return RadialGrid::make(-kSMax, kSMax, 1537); }

std::size_t mid(const RadialGrid& g) { return g.n / 2; }

FlowConfig conical() { return preset("conical").flow; }

// Flow studies shared by several entries. Each is computed at most once per
// generate/check call.
struct Studies {
    std::optional<ContinuationReport> sweep;
    std::optional<LimitExtract> limit;
    std::optional<std::vector<double>> pointMass;
    std::optional<std::vector<double>> smoothWeak;
    std::optional<FlowProblem> stationaryProblem;
    std::optional<StationaryResult> stationary;

    const ContinuationReport& conical_sweep() {
        if (!sweep) {
            const Config cfg = preset("conical");
            sweep = run_sequence(cfg.flow, cfg.continuation.epsList, cfg.continuation.settings);
        }
        return *sweep;
    }

    const LimitExtract& conical_limit() {
        if (!limit)
            limit = extract_limit(conical_sweep(), conical());
        return *limit;
    }

    // sphere-battery residual against the point-mass right-hand side, per eps
    const std::vector<double>& point_mass() {
        if (!pointMass) {
            pointMass.emplace();
            const Config cfg = preset("conical");
            for (double eps : cfg.continuation.epsList) {
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
                pointMass->push_back(
                    weak_residual(r.trajectory, sphere, p.context(), WeakForm::PointMass));
            }
        }
        return *pointMass;
    }

    // regularized weak residual of the smooth soliton run under joint (dt, h) halving
    const std::vector<double>& smooth_weak() {
        if (!smoothWeak) {
            smoothWeak.emplace();
            const FlowConfig base = preset("smooth-soliton").flow;
            for (int l = 0; l < 4; ++l) {
                FlowConfig fc = base;
                fc.grid = RadialGrid::make(base.grid.sMin, base.grid.sMax,
                                           (base.grid.n - 1) * (std::size_t{1} << l) + 1);
                fc.dtInit = std::ldexp(base.dtInit, -l);
                fc.dtMax = std::ldexp(base.dtMax, -l);
                const FlowProblem p = FlowProblem::build(fc);
                RunOptions o;
                o.everyStep = true;
                o.diagnostics = false;
                const RunResult r = run(p, o);
                smoothWeak->push_back(weak_residual(
                    r.trajectory, default_battery(fc.grid, 0.0, fc.tEnd), p.context()));
            }
        }
        return *smoothWeak;
    }

    const StationaryResult& conical_stationary() {
        if (!stationary) {
            stationaryProblem = FlowProblem::build(conical());
            stationary = stationary_solve(*stationaryProblem);
        }
        return *stationary;
    }
};

double sup_window_gap(const Profile& a, const RadialGrid& ga, const Profile& b,
                      const RadialGrid& gb, Window w) {
    // b lives on a grid refining a by an integer factor with the same sMin
    const std::size_t f = (gb.n - 1) / (ga.n - 1);
    double d = 0.0;
    for (std::size_t i = 0; i < ga.n; ++i) {
        const double s = ga.node(i);
        if (s >= w.lo && s <= w.hi)
            d = std::max(d, std::abs(a[i] - b[i * f]));
    }
    return d;
}

StationaryResult stationary_on(FlowConfig fc) {
    return stationary_solve(FlowProblem::build(fc));
}

FlowState state_at(const FlowProblem& p, double t) {
    RunOptions o;
    o.diagnostics = false;
    o.extraTimes = {t};
    const RunResult r = run(p, o);
    for (const FlowState& s : r.trajectory)
        if (std::abs(s.t - t) < 1e-12)
            return s;
    throw ParameterError("snapshot missing");
}

// conical data with angle beta = 1/2 for the regularization entries
ConeData half_cone() { return ConeData::make(1.0, 0.5, 1.0, 1.0); }

double chi_gap(double eps, const BackgroundGeometry& bg, bool useOracle) {
    const double rho = 0.5;
    double d = 0.0;
    Profile a, b;
    if (!useOracle) {
        a = chi_profiles(eps, rho, bg.h0, bg.h0p, bg.h0pp).chi;
        b = chi_profiles(0.5 * eps, rho, bg.h0, bg.h0p, bg.h0pp).chi;
    }
    for (std::size_t i = 0; i < bg.grid.n; i += 16) {
        const double s = bg.s[i];
        if (s < -10.0 || s > 10.0)
            continue;
        if (useOracle) {
            const double u = orc::sigmoid(s);
            d = std::max(d, std::abs(orc::chi(eps, rho, u) - orc::chi(0.5 * eps, rho, u)));
        } else {
            d = std::max(d, std::abs(a[i] - b[i]));
        }
    }
    return d;
}

struct Entry {
    const char* key;
    double tol;
    bool relative;
    const char* provenance;
    std::function<double(Studies&)> oracle;
    std::function<double(Studies&)> library;
};

std::vector<Entry> entries() {
    std::vector<Entry> v;

    v.push_back({"fs.u0p_span", 1e-15, false, "closed form 2 tanh(sMax/2)",
                 [](Studies&) { return 2.0 * std::tanh(0.5 * kSMax); },
                 [](Studies&) {
                     const BackgroundGeometry bg = build_fubini_study(default_grid());
                     return bg.u0p.back() - bg.u0p.front();
                 }});
    v.push_back({"fs.F0", 1e-15, false,
                 "F0 constant; normalization over the truncated chart gives log tanh(sMax/2)",
                 [](Studies&) { return std::log1p(-2.0 / (std::exp(kSMax) + 1.0)); },
                 [](Studies&) {
                     const BackgroundGeometry bg = build_fubini_study(default_grid());
                     return bg.F0[mid(bg.grid)];
                 }});
    v.push_back({"fs.gauss_curvature", 1e-8, false,
                 "Richardson difference of closed-form log u0'' at s=1.3 divided by u0''",
                 [](Studies&) { return -orc::fd2(orc::log_u0pp, 1.3, 1e-2) / orc::u0pp(1.3); },
                 [](Studies&) {
                     const FlowConfig fc = preset("kahler-einstein").flow;
                     const FlowProblem p = FlowProblem::build(fc);
                     return curvature_max(initial_state(p), p.bg, p.regbg, Window{-10.0, 10.0});
                 }});
    v.push_back({"divisor.curvature_sum_s0", 1e-8, false,
                 "Richardson difference of tau0 log sigmoid(s) + tauInf log sigmoid(-s) at s=0",
                 [](Studies&) {
                     return orc::fd2([](double s) { return orc::log_sigmoid(s) + orc::log_sigmoid(-s); },
                                     0.0, 1e-2);
                 },
                 [](Studies&) {
                     const BackgroundGeometry bg = build_background(default_grid(), half_cone(), {});
                     const std::size_t m = mid(bg.grid);
                     return bg.h0pp[m] + bg.hInfpp[m];
                 }});
    v.push_back({"theta.kappa_c1", 1e-9, false, "Simpson quadrature of e^{c x} over the momentum interval",
                 [](Studies&) { return orc::theta_kappa(1.0); },
                 [](Studies&) {
                     const BackgroundGeometry bg =
                         build_background(default_grid(), half_cone(), VectorFieldData{1.0});
                     const std::size_t m = mid(bg.grid);
                     return bg.thetaX[m] - bg.u0p[m];
                 }});
    v.push_back({"logsD.value_s0_c1", 1e-10, false, "difference quotients of the divisor potentials at s=0",
                 [](Studies&) {
                     return orc::fd1(orc::log_sigmoid, 0.0, 1e-2) +
                            orc::fd1([](double s) { return orc::log_sigmoid(-s); }, 0.0, 1e-2);
                 },
                 [](Studies&) {
                     const BackgroundGeometry bg =
                         build_background(default_grid(), half_cone(), VectorFieldData{1.0});
                     const std::size_t m = mid(bg.grid);
                     return bg.h0p[m] + bg.hInfp[m];
                 }});
    v.push_back({"logsD.sup_c1", 1e-10, false,
                 "difference quotients at both truncation ends; the sup sits at the ends",
                 [](Studies&) {
                     auto X = [](double s) {
                         return orc::fd1(orc::log_sigmoid, s, 1e-2) +
                                orc::fd1([](double x) { return orc::log_sigmoid(-x); }, s, 1e-2);
                     };
                     return std::max(std::abs(X(-kSMax)), std::abs(X(kSMax)));
                 },
                 [](Studies&) {
                     const BackgroundGeometry bg =
                         build_background(default_grid(), half_cone(), VectorFieldData{1.0});
                     return check_X_logsD_bound(VectorFieldData{1.0}, half_cone(), bg);
                 }});
    v.push_back({"chi.eps0_rho0.5_u1", 1e-12, false, "Simpson quadrature after r = u t^(1/rho); equals 1/rho^2",
                 [](Studies&) { return orc::chi(0.0, 0.5, 1.0); },
                 [](Studies&) { return chi_eval(0.0, 0.5, 1.0); }});
    v.push_back({"chi.value_eps0.1_rho0.6_u0.5", 1e-11, false, "adaptive Simpson quadrature",
                 [](Studies&) { return orc::chi(0.1, 0.6, 0.5); },
                 [](Studies&) { return chi_eval(0.1, 0.6, 0.5); }});
    v.push_back({"chi.first_eps0.1_rho0.6_u0.5", 1e-9, false,
                 "Richardson difference of the quadrature values",
                 [](Studies&) {
                     return orc::fd1([](double u) { return orc::chi(0.1, 0.6, u); }, 0.5, 4e-3);
                 },
                 [](Studies&) { return chi_derivatives(0.1, 0.6, 0.5).first; }});
    v.push_back({"chi.second_eps0.1_rho0.6_u0.5", 1e-8, false,
                 "Richardson second difference of the quadrature values",
                 [](Studies&) {
                     return orc::fd2([](double u) { return orc::chi(0.1, 0.6, u); }, 0.5, 4e-3);
                 },
                 [](Studies&) { return chi_derivatives(0.1, 0.6, 0.5).second; }});
    v.push_back({"chi.halving_gap_eps2^-2", 1e-9, true,
                 "sup over [-10,10] of chi_eps - chi_eps/2 for |s_0|^2, rho=1/2, quadrature values",
                 [](Studies&) {
                     return chi_gap(0.25, build_background(default_grid(), half_cone(), {}), true);
                 },
                 [](Studies&) {
                     return chi_gap(0.25, build_background(default_grid(), half_cone(), {}), false);
                 }});
    v.push_back({"chi.halving_gap_eps2^-7", 1e-9, true,
                 "sup over [-10,10] of chi_eps - chi_eps/2 for |s_0|^2, rho=1/2, quadrature values",
                 [](Studies&) {
                     return chi_gap(std::ldexp(1.0, -7), build_background(default_grid(), half_cone(), {}),
                                    true);
                 },
                 [](Studies&) {
                     return chi_gap(std::ldexp(1.0, -7), build_background(default_grid(), half_cone(), {}),
                                    false);
                 }});
    v.push_back({"select_k.beta0.5_target0.5", 2e-4, false,
                 "nu is affine in k; slope from differenced closed-form chi_u at every node, eps in {1/4, 0}",
                 [](Studies&) {
                     return orc::k_for_nu(0.5, 0.5, 0.5, default_grid().nodes(), {0.25, 0.0});
                 },
                 [](Studies&) {
                     const BackgroundGeometry bg = build_background(default_grid(), half_cone(), {});
                     return select_k(half_cone(), bg, 0.5);
                 }});
    for (int j : {2, 10}) {
        const double eps = std::ldexp(1.0, -j);
        v.push_back({j == 2 ? "psi.sup_eps2^-2" : "psi.sup_eps2^-10", 1e-9, true,
                     "sum of the two terms is largest at s=0 where |s_i|^2 = 1/2; quadrature value",
                     [eps](Studies&) { return 2.0 * orc::chi(eps, 0.5, 0.5); },
                     [eps](Studies&) {
                         const BackgroundGeometry bg = build_background(default_grid(), half_cone(), {});
                         return build_psi_aux(eps, 0.5, 1.0, half_cone(), bg).sup;
                     }});
    }
    v.push_back({"psi.max_coeff_eps0.25", 1e-6, true,
                 "min of u0''/(-Psi'') over the nodes, Psi'' from differenced closed-form chi_u",
                 [](Studies&) {
                     double best = INFINITY;
                     for (double s : default_grid().nodes()) {
                         const double pss = orc::chi_ss(0.25, 0.5, s, 1) + orc::chi_ss(0.25, 0.5, s, -1);
                         if (pss < 0.0)
                             best = std::min(best, orc::u0pp(s) / -pss);
                     }
                     return best;
                 },
                 [](Studies&) {
                     const BackgroundGeometry bg = build_background(default_grid(), half_cone(), {});
                     return build_psi_aux(0.25, 0.5, 1.0, half_cone(), bg).maxAdmissibleCoeff;
                 }});
    for (double s0 : {-5.0, 0.0, 5.0}) {
        static const char* names[] = {"rhs.phi0_conical_s-5", "rhs.phi0_conical_s0", "rhs.phi0_conical_s5"};
        const int idx = s0 < 0 ? 0 : (s0 == 0 ? 1 : 2);
        v.push_back({names[idx], 1e-8, false,
                     "term by term: quadrature chi, differenced chi', closed-form twist, theta and F0",
                     [s0](Studies&) {
                         const FlowConfig fc = conical();
                         const double eps = fc.epsilon, k = fc.k, c = fc.vf.c;
                         const ConeData& cone = fc.cone;
                         auto chiSum = [&](double s) {
                             return orc::chi(eps, cone.rho0(), orc::sigmoid(s)) +
                                    orc::chi(eps, cone.rhoInf(), orc::sigmoid(-s));
                         };
                         const double chipp = orc::chi_ss(eps, cone.rho0(), s0, 1) +
                                              orc::chi_ss(eps, cone.rhoInf(), s0, -1);
                         const double omega = orc::u0pp(s0) + k * chipp;
                         const double twist =
                             (1.0 - cone.beta) * (cone.tau0 * std::log(eps * eps + orc::sigmoid(s0)) +
                                                  cone.tauInf * std::log(eps * eps + orc::sigmoid(-s0)));
                         const double theta = c * orc::u0p(s0) + orc::theta_kappa(c);
                         const double F0 = std::log1p(-2.0 / (std::exp(kSMax) + 1.0));
                         return std::log(omega / orc::u0pp(s0)) + F0 + cone.gamma * (k * chiSum(s0) + fc.cEps0) +
                                twist + theta + c * k * orc::fd1(chiSum, s0, 1e-2);
                     },
                     [s0](Studies&) {
                         const FlowProblem p = FlowProblem::build(conical());
                         const Profile r = rhs_eval(initial_state(p).phi, p);
                         return r[p.bg.grid.nearest(s0)];
                     }});
    }
    v.push_back({"flow.scheme_gap_t0.02", 1e-6, true,
                 "sup |phi_newton - phi_explicit| at t=0.02, dtMax=1e-3, grid [-10,10] x 401 "
                 "(cross-scheme comparison, frozen)",
                 [](Studies&) {
                     // the explicit pair is stability limited by 1/density near the
                     // truncation ends, so this comparison uses a short grid
                     FlowConfig a = conical();
                     a.grid = RadialGrid::make(-10.0, 10.0, 401);
                     a.tEnd = 0.02;
                     a.dtMax = 1e-3;
                     FlowConfig b = a;
                     b.scheme = Scheme::ExplicitAdaptive;
                     b.dtInit = 1e-6;
                     b.tolerances.localError = 1e-9;
                     RunOptions o;
                     o.diagnostics = false;
                     const Profile x = run(a, o).trajectory.back().phi.values();
                     const Profile y = run(b, o).trajectory.back().phi.values();
                     double d = 0.0;
                     for (std::size_t i = 0; i < x.size(); ++i)
                         d = std::max(d, std::abs(x[i] - y[i]));
                     return d;
                 },
                 nullptr});
    v.push_back({"flow.max_principle_ratio", 1e-9, true,
                 "max over the conical sweep of sup|phidot(t)| / (sup|phidot(0)| e^{gamma t}) (frozen sweep)",
                 [](Studies& st) {
                     const ContinuationReport& rep = st.conical_sweep();
                     const double g = conical().cone.gamma;
                     double worst = 0.0;
                     for (const RunResult& r : rep.runs)
                         for (const DiagnosticsRecord& d : r.records)
                             worst = std::max(worst, d.supPhidot / (r.records.front().supPhidot * std::exp(g * d.t)));
                     return worst;
                 },
                 nullptr});
    v.push_back({"stationary.sup_rhs", 1e-9, false, "sup |RHS| of the conical stationary profile, eps=1/4",
                 [](Studies& st) {
                     const StationaryResult& r = st.conical_stationary();
                     double m = 0.0;
                     for (double x : rhs_eval(r.phi, *st.stationaryProblem))
                         m = std::max(m, std::abs(x));
                     return m;
                 },
                 nullptr});
    v.push_back({"stationary.refine_gap", 1e-6, true,
                 "sup over [-10,10] of the change of the stationary profile under spacing halving (frozen)",
                 [](Studies& st) {
                     FlowConfig fine = conical();
                     fine.grid = RadialGrid::make(-kSMax, kSMax, 2 * fine.grid.n - 1);
                     const Profile a = st.conical_stationary().phi.values();
                     const Profile b = stationary_on(fine).phi.values();
                     return sup_window_gap(a, conical().grid, b, fine.grid, Window{-10.0, 10.0});
                 },
                 nullptr});
    v.push_back({"stationary.warmstart_gap", 1e-9, false,
                 "stationary profile is independent of the flow warm start (Newton from phi=cEps0)",
                 [](Studies&) { return 0.0; },
                 [](Studies& st) {
                     FlowConfig b = conical();
                     b.tEnd = 0.0;
                     const Profile x = st.conical_stationary().phi.values();
                     const Profile y = stationary_on(b).phi.values();
                     double d = 0.0;
                     for (std::size_t i = 0; i < x.size(); ++i)
                         d = std::max(d, std::abs(x[i] - y[i]));
                     return d;
                 }});
    v.push_back({"stationary.scheme_gap", 1e-6, false,
                 "explicit-path and Newton-path stationary profiles, grid [-10,10] x 401",
                 [](Studies&) { return 0.0; },
                 [](Studies&) {
                     // explicit warm-up kept short: its step is limited by 1/density
                     FlowConfig a = conical();
                     a.grid = RadialGrid::make(-10.0, 10.0, 401);
                     FlowConfig b = a;
                     b.scheme = Scheme::ExplicitAdaptive;
                     b.dtInit = 1e-6;
                     b.tEnd = 0.02;
                     const Profile x = stationary_on(a).phi.values();
                     const Profile y = stationary_on(b).phi.values();
                     double d = 0.0;
                     for (std::size_t i = 0; i < x.size(); ++i)
                         d = std::max(d, std::abs(x[i] - y[i]));
                     return d;
                 }});
    v.push_back({"stationary.soliton_residual_n12289", 1e-6, false,
                 "soliton residual on [-10,10] of the stationary profile on a 12289-node grid",
                 [](Studies&) {
                     FlowConfig fc = conical();
                     fc.grid = RadialGrid::make(-kSMax, kSMax, 12289);
                     const FlowProblem p = FlowProblem::build(fc);
                     FlowState s;
                     s.phi = stationary_solve(p).phi;
                     s.phidot = rhs_eval(s.phi, p);
                     return soliton_residual(s, p.regbg, p.bg, fc.cone, fc.vf, Window{-10.0, 10.0});
                 },
                 nullptr});
    v.push_back({"soliton.identity_t0.5", 2e-3, true,
                 "max |phidot''| over the interior window at t=1/2, conical eps=1/4 (identity check)",
                 [](Studies&) {
                     const FlowProblem p = FlowProblem::build(conical());
                     const FlowState s = state_at(p, 0.5);
                     return phidot_curvature_max(s, p.bg, p.context().interior());
                 },
                 [](Studies&) {
                     const FlowProblem p = FlowProblem::build(conical());
                     const FlowState s = state_at(p, 0.5);
                     return soliton_residual(s, p.regbg, p.bg, p.config.cone, p.config.vf,
                                             p.context().interior());
                 }});
    v.push_back({"calabi.scaling_ratio", 1e-12, false, "S is homogeneous of degree -1 in the metric",
                 [](Studies&) { return 0.5; },
                 [](Studies&) {
                     const FlowProblem p = FlowProblem::build(conical());
                     const FlowState s = state_at(p, 0.5);
                     RegularizedBackground twice = p.regbg;
                     for (double& x : twice.omegaEpsDensity)
                         x *= 2.0;
                     FlowState s2 = s;
                     s2.phi = s.phi.axpy(1.0, s.phi);
                     const Window w{-10.0, 10.0};
                     return calabi_S(s2, p.bg, twice, w) / calabi_S(s, p.bg, p.regbg, w);
                 }});
    for (int field : {0, 1}) {
        v.push_back({field == 0 ? "calabi.refine_rel" : "curvature.refine_rel", 1e-6, true,
                     "relative change on [-10,10] at t=1 under spacing halving, conical eps=1/4 (frozen)",
                     [field](Studies&) {
                         const Window w{-10.0, 10.0};
                         double vals[2];
                         for (int l = 0; l < 2; ++l) {
                             FlowConfig fc = conical();
                             fc.grid = RadialGrid::make(-kSMax, kSMax, (fc.grid.n - 1) * (l + 1) + 1);
                             const FlowProblem p = FlowProblem::build(fc);
                             const FlowState st = state_at(p, 1.0);
                             vals[l] = field == 0 ? calabi_S(st, p.bg, p.regbg, w)
                                                  : curvature_max(st, p.bg, p.regbg, w);
                         }
                         return std::abs(vals[1] - vals[0]) / vals[0];
                     },
                     nullptr});
    }
    v.push_back({"cone.smooth_slope", 1e-12, false,
                 "least-squares slope of closed-form log u0'' over the nodes in [-28,-26]",
                 [](Studies&) {
                     std::vector<double> x, y;
                     for (double s : default_grid().nodes())
                         if (s >= -28.0 && s <= -26.0) {
                             x.push_back(s);
                             y.push_back(orc::log_u0pp(s));
                         }
                     return orc::lsq_slope(x, y);
                 },
                 [](Studies&) {
                     const BackgroundGeometry bg = build_fubini_study(default_grid());
                     return cone_exponent_fit(bg.u0pp, bg.s, Window{-28.0, -26.0});
                 }});
    v.push_back({"cone.fit_finest", 1e-9, true, "coneExp0 at the finest eps of the conical sweep (frozen sweep)",
                 [](Studies& st) { return st.conical_sweep().coneFitTrend.back(); }, nullptr});
    v.push_back({"weak.smooth_order", 1e-6, true,
                 "min observed order of the weak residual over three (dt, h) halvings, smooth soliton (frozen)",
                 [](Studies& st) {
                     const std::vector<double>& w = st.smooth_weak();
                     double order = INFINITY;
                     for (std::size_t i = 0; i + 1 < w.size(); ++i)
                         order = std::min(order, std::log2(w[i] / w[i + 1]));
                     return order;
                 },
                 nullptr});
    v.push_back({"weak.point_mass_finest", 1e-6, true,
                 "sphere-battery residual against the point masses at the finest eps (frozen sweep)",
                 [](Studies& st) { return st.point_mass().back(); }, nullptr});
    v.push_back({"holder.synthetic", 1e-4, false,
                 "phi = d0(., 0)^alpha with d0 from adaptive Simpson arc length; ratio sup is 1",
                 [](Studies&) { return 1.0; },
                 [](Studies&) {
                     const BackgroundGeometry bg = build_fubini_study(default_grid());
                     const double alpha = 0.45;
                     Profile phi(bg.grid.n);
                     const std::size_t m = mid(bg.grid);
                     double acc = 0.0;
                     for (std::size_t i = m + 1; i < bg.grid.n; ++i) {
                         acc += orc::arc_length(bg.s[i - 1], bg.s[i]);
                         phi[i] = std::pow(acc, alpha);
                     }
                     acc = 0.0;
                     for (std::size_t i = m; i-- > 0;) {
                         acc += orc::arc_length(bg.s[i], bg.s[i + 1]);
                         phi[i] = std::pow(acc, alpha);
                     }
                     return holder_seminorm(phi, alpha, bg);
                 }});
    v.push_back({"continuation.uniform_A", 1e-9, true, "trace bound over the conical sweep (frozen sweep)",
                 [](Studies& st) { return st.conical_sweep().uniformity.A; }, nullptr});
    v.push_back({"continuation.uniform_holder", 1e-9, true,
                 "max Hoelder seminorm over the conical sweep (frozen sweep)",
                 [](Studies& st) { return st.conical_sweep().uniformity.holderSeminorm; }, nullptr});
    v.push_back({"continuation.uniform_supPhi", 1e-9, true, "max sup|phi| over the conical sweep (frozen sweep)",
                 [](Studies& st) { return st.conical_sweep().uniformity.supPhi; }, nullptr});
    v.push_back({"continuation.uniform_supPhidot", 1e-9, true,
                 "max sup|phidot| over the conical sweep (frozen sweep)",
                 [](Studies& st) { return st.conical_sweep().uniformity.supPhidot; }, nullptr});
    v.push_back({"continuation.uniform_supXphi", 1e-9, true,
                 "max sup|X(phi)| over the conical sweep (frozen sweep)",
                 [](Studies& st) {
                     double m = 0.0;
                     for (const RunSummary& r : st.conical_sweep().perEps)
                         m = std::max(m, r.maxima.supXphi);
                     return m;
                 },
                 nullptr});
    v.push_back({"continuation.uniform_rm_window", 1e-9, true,
                 "max curvature on [-10,10] over all snapshots of the conical sweep (frozen sweep)",
                 [](Studies& st) {
                     const ContinuationReport& rep = st.conical_sweep();
                     double m = 0.0;
                     for (std::size_t i = 0; i < rep.runs.size(); ++i) {
                         FlowConfig fc = conical();
                         fc.epsilon = rep.epsList[i];
                         const FlowProblem p = FlowProblem::build(fc);
                         for (const FlowState& s : rep.runs[i].trajectory)
                             m = std::max(m, curvature_max(s, p.bg, p.regbg, Window{-10.0, 10.0}));
                     }
                     return m;
                 },
                 nullptr});
    v.push_back({"continuation.gaps_decreasing_j2_8", 0.0, false,
                 "1 when pairwiseC0(j, j+1) on [-10,10] decreases for j = 2..8",
                 [](Studies&) { return 1.0; },
                 [](Studies& st) {
                     const std::vector<double> g = consecutive_gaps(st.conical_sweep());
                     if (g.size() < 7)
                         return 0.0;
                     for (std::size_t i = 1; i < 7; ++i)
                         if (!(g[i] < g[i - 1]))
                             return 0.0;
                     return 1.0;
                 }});
    v.push_back({"continuation.gap_j7_relative", 1e-6, true,
                 "pairwiseC0(2^-7, 2^-8) / sup|phi| on [-10,10] x {0, 1/2, 1} (frozen sweep)",
                 [](Studies& st) {
                     const ContinuationReport& r = st.conical_sweep();
                     return r.pairwiseC0[5][6] / r.perEps[6].maxima.supPhi;
                 },
                 nullptr});
    v.push_back({"continuation.certificate_ratio", 1e-6, true,
                 "Hoelder seminorm of the extracted limit over the uniform sweep bound (frozen sweep)",
                 [](Studies& st) {
                     const LimitExtract& l = st.conical_limit();
                     return l.holderCertificate / l.uniformHolderBound;
                 },
                 nullptr});
    v.push_back({"continuation.extrapolation_over_gap", 1e-6, true,
                 "extrapolated minus last-iterate limit over the last Cauchy gap (frozen sweep)",
                 [](Studies& st) {
                     const LimitExtract& l = st.conical_limit();
                     return l.extrapolationShift / consecutive_gaps(st.conical_sweep()).back();
                 },
                 nullptr});
    v.push_back({"config.roundtrip", 0.0, false, "parse(emit(c)) == c for every preset",
                 [](Studies&) { return 1.0; },
                 [](Studies&) {
                     for (const std::string& name : preset_names()) {
                         const Config c = preset(name);
                         if (!(parse_config_text(emit_config(c)) == c))
                             return 0.0;
                     }
                     return 1.0;
                 }});
    return v;
}

} // namespace

std::vector<FixtureEntry> generate_fixtures() {
    Studies st;
    std::vector<FixtureEntry> out;
    for (const Entry& s : entries())
        out.push_back({s.key, s.oracle(st), s.tol, s.relative, s.provenance});
    return out;
}

std::vector<FixtureCheck> check_fixtures(const std::vector<FixtureEntry>& stored) {
    Studies st;
    const std::vector<Entry> all = entries();
    std::vector<FixtureCheck> out;
    for (const FixtureEntry& e : stored) {
        FixtureCheck c;
        c.entry = e;
        const Entry* def = nullptr;
        for (const Entry& s : all)
            if (e.key == s.key)
                def = &s;
        if (!def) {
            c.actual = NAN;
            c.deviation = INFINITY;
            out.push_back(c);
            continue;
        }
        // frozen study values are recomputed by the same library path
        c.actual = def->library ? def->library(st) : def->oracle(st);
        c.deviation = std::abs(c.actual - e.value);
        const double allowed = e.relative ? e.tol * std::abs(e.value) : e.tol;
        c.pass = std::isfinite(c.actual) && c.deviation <= allowed;
        out.push_back(c);
    }
    return out;
}

std::string format_fixtures(const std::vector<FixtureEntry>& entries) {
    std::ostringstream os;
    os << "# Reference values for the fixture check. Regenerate with `coneflow fixtures`.\n"
       << "# key = value  # tol=abs|rel:<tolerance>; <how the value was obtained>\n";
    for (const FixtureEntry& e : entries)
        os << e.key << " = " << format_real(e.value) << "  # tol=" << (e.relative ? "rel:" : "abs:")
           << format_real(e.tol) << "; " << e.provenance << "\n";
    return os.str();
}

std::vector<FixtureEntry> parse_fixtures(const std::string& text) {
    std::vector<FixtureEntry> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    auto fail = [&](const std::string& what) {
        throw ParameterError("fixtures line " + std::to_string(lineNo) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find(" = ");
        const auto hash = line.find("  # tol=");
        if (eq == std::string::npos || hash == std::string::npos || hash < eq)
            fail("expected 'key = value  # tol=...'");
        FixtureEntry e;
        e.key = line.substr(0, eq);
        const std::string value = line.substr(eq + 3, hash - eq - 3);
        std::string meta = line.substr(hash + 8);
        const auto semi = meta.find("; ");
        if (semi == std::string::npos)
            fail("missing provenance");
        e.provenance = meta.substr(semi + 2);
        std::string tol = meta.substr(0, semi);
        if (tol.rfind("rel:", 0) == 0)
            e.relative = true;
        else if (tol.rfind("abs:", 0) != 0)
            fail("tolerance must start with abs: or rel:");
        try {
            std::size_t used = 0;
            e.value = std::stod(value, &used);
            if (used != value.size())
                fail("trailing characters after value");
            e.tol = std::stod(tol.substr(4), &used);
        } catch (const std::logic_error&) {
            fail("not a number");
        }
        out.push_back(e);
    }
    return out;
}

} // namespace coneflow
