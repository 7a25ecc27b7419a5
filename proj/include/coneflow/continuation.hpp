#pragma once

#include "coneflow/diagnostics.hpp"
#include "coneflow/flow.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace coneflow {

struct ContinuationSettings {
    Window window{-10.0, 10.0};
    // empty selects {0, tEnd/2, tEnd}
    std::vector<double> timeSamples;
    // Cauchy success needs the last consecutive gap below threshold * sup|phi|
    double cauchyThreshold = 1e-3;
    unsigned threads = 1;
    // keep every run's snapshots and records in the report
    bool keepRuns = true;

    bool operator==(const ContinuationSettings&) const = default;
};

struct RunSummary {
    double epsilon = 0.0;
    DiagnosticsRecord final;
    // fieldwise max over all snapshots of the run
    DiagnosticsRecord maxima;
    double runtimeSeconds = 0.0;
    std::size_t steps = 0;
    std::size_t rejections = 0;
};

struct Uniformity {
    double supPhi = 0.0;
    double supPhidot = 0.0;
    double traceEpsPhi = 0.0;
    double tracePhiEps = 0.0;
    double holderSeminorm = 0.0;
    // smallest A with 1/A <= fullDensity/omegaEps <= A over the sweep
    double A = 0.0;
};

struct ContinuationReport {
    std::vector<double> epsList;
    std::vector<RunSummary> perEps;
    std::vector<double> timeSamples;
    Window window;
    // sup over window x timeSamples of |phi_i - phi_j|
    std::vector<std::vector<double>> pairwiseC0;
    Uniformity uniformity;
    Profile limitS;
    Profile limitProfile;
    std::vector<double> coneFitTrend;
    bool cauchySuccess = false;
    // relative size of the last consecutive gap
    double finalGapRelative = 0.0;
    bool complete = true;
    std::string failure;
    // only filled when keepRuns is set
    std::vector<RunResult> runs;
};

ContinuationReport run_sequence(const FlowConfig& base, const std::vector<double>& epsList,
                                const ContinuationSettings& settings = {});

// Consecutive gaps pairwiseC0(i, i+1).
std::vector<double> consecutive_gaps(const ContinuationReport& report);

struct LimitExtract {
    Profile s;
    Profile lastIterate;
    // geometric extrapolation in eps from the last two consecutive gaps
    Profile extrapolated;
    double contractionRatio = 0.0;
    // sup over the window of |extrapolated - lastIterate|
    double extrapolationShift = 0.0;
    double holderAlpha = 0.0;
    double holderCertificate = 0.0;
    double uniformHolderBound = 0.0;
};

LimitExtract extract_limit(const ContinuationReport& report, const FlowConfig& base);

} // namespace coneflow
