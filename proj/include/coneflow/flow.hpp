#pragma once

#include "coneflow/diagnostics.hpp"
#include "coneflow/geometry.hpp"
#include "coneflow/regularization.hpp"
#include "coneflow/state.hpp"

#include <string>
#include <vector>

namespace coneflow {

enum class Scheme { ExplicitAdaptive, SemiImplicitNewton };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct Tolerances {
    // Newton stops when the step residual, measured in units of phi, drops below this
    double newton = 1e-12;
    int newtonMaxIter = 40;
    // accepted states keep fullDensity >= positivityFloor * omegaEpsDensity
    double positivityFloor = 1e-8;
    // snapshot spacing in flow time
    double outputCadence = 0.05;
    // absolute local error target of the explicit pair
    double localError = 1e-7;
    // stationary solve target for sup |RHS|
    double stationary = 1e-10;

    bool operator==(const Tolerances&) const = default;
};

struct FlowConfig {
    ConeData cone;
    VectorFieldData vf;
    double epsilon = 0.25;
    double k = 0.1;
    RadialGrid grid;
    Scheme scheme = Scheme::SemiImplicitNewton;
    double dtInit = 1e-3;
    double dtMax = 1e-2;
    double tEnd = 1.0;
    Tolerances tolerances;
    double cEps0 = 0.0;
    PsiSettings psi;
    DiagnosticSettings diagnostics;

    void validate() const;

    bool operator==(const FlowConfig&) const = default;
};

// Background data shared by every evaluation of one flow.
struct FlowProblem {
    FlowConfig config;
    BackgroundGeometry bg;
    RegularizedBackground regbg;
    // phi-independent part of the right-hand side:
    // F0 + gamma k chi + twist + theta_X + c k chi'
    Profile base;

    static FlowProblem build(const FlowConfig& config);
    DiagnosticsContext context() const;
};

// log(fullDensity/u0pp) + F0 + gamma(k chi + phi) + sum (1-beta) tau_i log(eps^2+|s_i|^2)
//   + theta_X + c (k chi' + phi')
Profile rhs_eval(const Potential& phi, const RegularizedBackground& regbg,
                 const BackgroundGeometry& bg, const ConeData& cone, const VectorFieldData& vf);
Profile rhs_eval(const Potential& phi, const FlowProblem& problem);
// Same right-hand side assembled through F_eps:
// log(fullDensity/omegaEps) + F_eps + gamma(k chi + phi) + theta_X + c (k chi' + phi')
Profile rhs_eval_feps(const Potential& phi, const RegularizedBackground& regbg,
                      const BackgroundGeometry& bg, const ConeData& cone,
                      const VectorFieldData& vf);

FlowState initial_state(const FlowProblem& problem);

// Advances by at most dt. Returns the accepted state; stepStats records the
// step actually taken, rejections, and the suggested next step.
FlowState step(const FlowState& state, const FlowProblem& problem, double dt);

struct RunResult {
    std::vector<FlowState> trajectory;
    std::vector<DiagnosticsRecord> records;
    std::size_t steps = 0;
    std::size_t rejections = 0;
};

struct RunOptions {
    // additional snapshot times besides the cadence grid
    std::vector<double> extraTimes;
    // store every accepted step instead of the cadence snapshots
    bool everyStep = false;
    bool diagnostics = true;
};

RunResult run(const FlowConfig& config, const RunOptions& options = {});
RunResult run(const FlowProblem& problem, const RunOptions& options = {});

struct StationaryResult {
    Potential phi;
    double residual = 0.0;
    int newtonIterations = 0;
    double flowTime = 0.0;
};

StationaryResult stationary_solve(const FlowConfig& config);
StationaryResult stationary_solve(const FlowProblem& problem);

} // namespace coneflow
