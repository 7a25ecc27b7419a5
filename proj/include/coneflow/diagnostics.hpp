#pragma once

#include "coneflow/geometry.hpp"
#include "coneflow/regularization.hpp"
#include "coneflow/state.hpp"

#include <string>
#include <utility>
#include <vector>

namespace coneflow {

struct DiagnosticsRecord {
    double t = 0.0;
    double supPhi = 0.0;
    double supPhidot = 0.0;
    double traceEpsPhi = 0.0;
    double tracePhiEps = 0.0;
    double calabiS = 0.0;
    double rmMax = 0.0;
    double supXphi = 0.0;
    double coneExp0 = 0.0;
    double coneExpInf = 0.0;
    double solitonResidual = 0.0;
    double weakResidual = 0.0;
    double holderSeminorm = 0.0;
    // windowed variants, appended after the original schema
    double calabiSWindow = 0.0;
    double rmMaxWindow = 0.0;
};

// Ordered field names, shared by the CSV header and the JSON-lines writer.
const std::vector<std::string>& record_field_names();
std::vector<double> record_values(const DiagnosticsRecord& r);
DiagnosticsRecord record_from_values(const std::vector<double>& v);

struct Window {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const Window&) const = default;
};

struct DiagnosticSettings {
    // interior window [sMin + margin, sMax - margin]
    double margin = 5.0;
    // <= 0 selects min(1, 2 rho_min) / 2
    double holderAlpha = 0.0;
    double coneWindowWidth = 2.0;

    bool operator==(const DiagnosticSettings&) const = default;
};

struct DiagnosticsContext {
    const BackgroundGeometry* bg = nullptr;
    const RegularizedBackground* regbg = nullptr;
    ConeData cone;
    VectorFieldData vf;
    DiagnosticSettings settings;

    Window interior() const;
    double holder_alpha() const;
};

// nodewise metric density omega_eps + phi''
Profile full_density(const Potential& phi, const RegularizedBackground& regbg, double h);

std::pair<double, double> trace_ratios(const FlowState& state, const RegularizedBackground& regbg,
                                       double h);
std::pair<double, double> trace_ratios(const FlowState& state, const RegularizedBackground& regbg,
                                       const BackgroundGeometry& bg, Window w);

// Max of Calabi's S over interior nodes inside w (whole grid if w is empty).
double calabi_S(const FlowState& state, const BackgroundGeometry& bg,
                const RegularizedBackground& regbg, Window w = {});
double curvature_max(const FlowState& state, const BackgroundGeometry& bg,
                     const RegularizedBackground& regbg, Window w = {});

// Least-squares slope of log(fullDensity) against s over the nodes inside w.
double cone_exponent_fit(const FlowState& state, const RegularizedBackground& regbg,
                         const BackgroundGeometry& bg, Window w);
double cone_exponent_fit(const Profile& density, const Profile& s, Window w);

enum class Pole { Zero, Infinity };
// Window of the given width where the conical term of omega_eps dominates both
// the smooth reference density and the eps-smoothing (conical asymptotic regime).
Window auto_cone_window(const RegularizedBackground& regbg, const BackgroundGeometry& bg,
                        const ConeData& cone, Pole pole, double width);

double soliton_residual(const FlowState& state, const RegularizedBackground& regbg,
                        const BackgroundGeometry& bg, const ConeData& cone,
                        const VectorFieldData& vf, Window w);
// max |phidot''| over w by centered differences
double phidot_curvature_max(const FlowState& state, const BackgroundGeometry& bg, Window w);

struct TestFunction {
    enum class Kind { InteriorBump, Sphere };
    Kind kind = Kind::InteriorBump;
    // InteriorBump: support [a, b] in s. Sphere: monomial (u0' - 1)^degree.
    double a = 0.0;
    double b = 0.0;
    int degree = 0;
    // time factor sin^2 on [t0, t1]
    double t0 = 0.0;
    double t1 = 1.0;
};

// zeta and its first two s-derivatives at every grid node
void test_function_profile(const TestFunction& f, const BackgroundGeometry& bg, Profile& z,
                           Profile& zp, Profile& zpp);
double test_function_time(const TestFunction& f, double t, double& dt);

std::vector<TestFunction> default_battery(const RadialGrid& grid, double t0, double t1);

enum class WeakForm { Regularized, PointMass };

// Battery max of the distributional residual of the metric flow along the
// trajectory: trapezoid rule in t, trapezoid rule in s.
double weak_residual(const std::vector<FlowState>& trajectory,
                     const std::vector<TestFunction>& battery, const DiagnosticsContext& ctx,
                     WeakForm form = WeakForm::Regularized);

// Residual of every trajectory prefix [t_0, t_k] against the default battery
// with time factors supported on that prefix; entry 0 is 0.
std::vector<double> weak_residual_prefixes(const std::vector<FlowState>& trajectory,
                                           const DiagnosticsContext& ctx,
                                           WeakForm form = WeakForm::Regularized);

// omega_0 arc length from sMin to each node
Profile arc_length(const BackgroundGeometry& bg);
double holder_seminorm(const Profile& phi, double alpha, const BackgroundGeometry& bg,
                       Window w = {});

std::pair<double, double> sup_bounds(const FlowState& state);
double x_phi_sup(const FlowState& state, const VectorFieldData& vf,
                 const RegularizedBackground& regbg, double h);

// Diagnostics that are bounded on compact sets away from the poles, restricted
// to the nodes inside w. Used for grid and truncation comparisons.
struct WindowDiagnostics {
    double supPhi = 0.0;
    double supPhidot = 0.0;
    double traceEpsPhi = 0.0;
    double tracePhiEps = 0.0;
    double calabiS = 0.0;
    double rmMax = 0.0;
    double supXphi = 0.0;
    double holderSeminorm = 0.0;
};

const std::vector<std::string>& window_field_names();
std::vector<double> window_values(const WindowDiagnostics& d);
WindowDiagnostics window_diagnostics(const FlowState& state, const DiagnosticsContext& ctx,
                                     Window w);

DiagnosticsRecord compute_record(const FlowState& state, const DiagnosticsContext& ctx,
                                 double weakResidual);

} // namespace coneflow
