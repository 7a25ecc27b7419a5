#include "coneflow/continuation.hpp"

#include "coneflow/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace coneflow {

namespace {

struct Job {
    bool done = false;
    std::string error;
    RunResult result;
    double runtime = 0.0;
    // phi values at the time samples, window nodes only
    std::vector<Profile> samples;
};

DiagnosticsRecord fieldwise_max(const std::vector<DiagnosticsRecord>& records) {
    std::vector<double> m = record_values(records.front());
    for (const DiagnosticsRecord& r : records) {
        const std::vector<double> v = record_values(r);
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = std::max(m[i], v[i]);
    }
    return record_from_values(m);
}

void execute(const FlowConfig& base, double eps, const ContinuationSettings& settings,
             const std::vector<double>& times, Job& job) {
    const auto start = std::chrono::steady_clock::now();
    FlowConfig cfg = base;
    cfg.epsilon = eps;
    const FlowProblem problem = FlowProblem::build(cfg);
    RunOptions options;
    options.extraTimes = times;
    job.result = run(problem, options);
    const double tiny = 1e-12 * std::max(1.0, cfg.tEnd);
    for (double t : times) {
        const auto it = std::find_if(job.result.trajectory.begin(), job.result.trajectory.end(),
                                     [&](const FlowState& s) { return std::abs(s.t - t) <= tiny; });
        if (it == job.result.trajectory.end())
            throw ParameterError("time sample outside [0, tEnd]");
        const Profile v = it->phi.values();
        Profile w;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (problem.bg.s[i] >= settings.window.lo && problem.bg.s[i] <= settings.window.hi)
                w.push_back(v[i]);
        job.samples.push_back(std::move(w));
    }
    job.runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

ContinuationReport run_sequence(const FlowConfig& base, const std::vector<double>& epsList,
                                const ContinuationSettings& settings) {
    base.validate();
    if (epsList.empty())
        throw ParameterError("eps list is empty");
    for (std::size_t i = 0; i < epsList.size(); ++i) {
        if (!(epsList[i] > 0.0))
            throw ParameterError("eps list entries must be positive");
        if (i > 0 && !(epsList[i] < epsList[i - 1]))
            throw ParameterError("eps list must be strictly decreasing");
    }
    const Window win = settings.window;
    if (!(win.lo < win.hi) || win.lo <= base.grid.sMin || win.hi >= base.grid.sMax)
        throw ParameterError("continuation window must lie strictly inside the grid");
    std::vector<double> times = settings.timeSamples;
    if (times.empty())
        times = {0.0, 0.5 * base.tEnd, base.tEnd};
    for (double t : times)
        if (t < 0.0 || t > base.tEnd)
            throw ParameterError("time samples must lie in [0, tEnd]");

    const std::size_t m = epsList.size();
    std::vector<Job> jobs(m);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= m || stop.load())
                return;
            try {
                execute(base, epsList[i], settings, times, jobs[i]);
                jobs[i].done = true;
            } catch (const std::exception& e) {
                jobs[i].error = e.what();
                stop.store(true);
            }
        }
    };
    const unsigned nThreads =
        std::max(1u, std::min<unsigned>(settings.threads, static_cast<unsigned>(m)));
    if (nThreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nThreads; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    ContinuationReport report;
    report.timeSamples = times;
    report.window = win;
    // keep the completed prefix; stop at the first failed or skipped run
    std::size_t ok = 0;
    while (ok < m && jobs[ok].done)
        ++ok;
    if (ok < m) {
        report.complete = false;
        std::ostringstream os;
        os << "run " << ok << " (eps=" << epsList[ok] << ") ";
        for (std::size_t i = ok; i < m; ++i)
            if (!jobs[i].error.empty()) {
                os.str("");
                os << "run " << i << " (eps=" << epsList[i] << ") failed: " << jobs[i].error;
                break;
            }
        report.failure = os.str();
    }

    for (std::size_t i = 0; i < ok; ++i) {
        const Job& job = jobs[i];
        RunSummary sum;
        sum.epsilon = epsList[i];
        sum.final = job.result.records.back();
        sum.maxima = fieldwise_max(job.result.records);
        sum.runtimeSeconds = job.runtime;
        sum.steps = job.result.steps;
        sum.rejections = job.result.rejections;
        report.epsList.push_back(epsList[i]);
        report.perEps.push_back(sum);
        report.coneFitTrend.push_back(sum.final.coneExp0);
    }

    report.pairwiseC0.assign(ok, std::vector<double>(ok, 0.0));
    for (std::size_t i = 0; i < ok; ++i)
        for (std::size_t j = i + 1; j < ok; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                const Profile& a = jobs[i].samples[k];
                const Profile& b = jobs[j].samples[k];
                for (std::size_t q = 0; q < a.size(); ++q)
                    d = std::max(d, std::abs(a[q] - b[q]));
            }
            report.pairwiseC0[i][j] = d;
            report.pairwiseC0[j][i] = d;
        }

    if (ok > 0) {
        Uniformity& u = report.uniformity;
        for (const RunSummary& s : report.perEps) {
            u.supPhi = std::max(u.supPhi, s.maxima.supPhi);
            u.supPhidot = std::max(u.supPhidot, s.maxima.supPhidot);
            u.traceEpsPhi = std::max(u.traceEpsPhi, s.maxima.traceEpsPhi);
            u.tracePhiEps = std::max(u.tracePhiEps, s.maxima.tracePhiEps);
            u.holderSeminorm = std::max(u.holderSeminorm, s.maxima.holderSeminorm);
        }
        u.A = std::max(u.traceEpsPhi, u.tracePhiEps);

        const RunResult& finest = jobs[ok - 1].result;
        report.limitProfile = finest.trajectory.back().phi.values();
        report.limitS = base.grid.nodes();
    }

    if (report.complete) {
        const std::vector<double> gaps = consecutive_gaps(report);
        const double sup = report.perEps.back().maxima.supPhi;
        // gaps at roundoff level count as converged regardless of ordering
        const double noise = 1e-12 * std::max(1.0, sup);
        bool monotone = true;
        for (std::size_t i = 1; i < gaps.size(); ++i)
            if (!(gaps[i] < gaps[i - 1]) && gaps[i] > noise)
                monotone = false;
        report.finalGapRelative = gaps.empty() ? 0.0 : gaps.back() / std::max(sup, 1e-300);
        report.cauchySuccess =
            monotone && (gaps.empty() || gaps.back() <= std::max(settings.cauchyThreshold * sup, noise));
    }

    if (settings.keepRuns)
        for (std::size_t i = 0; i < ok; ++i)
            report.runs.push_back(std::move(jobs[i].result));
    return report;
}

std::vector<double> consecutive_gaps(const ContinuationReport& report) {
    std::vector<double> g;
    for (std::size_t i = 0; i + 1 < report.pairwiseC0.size(); ++i)
        g.push_back(report.pairwiseC0[i][i + 1]);
    return g;
}

LimitExtract extract_limit(const ContinuationReport& report, const FlowConfig& base) {
    if (!report.complete || !report.cauchySuccess)
        throw ConvergenceError("limit extraction refused: the eps sweep is not Cauchy",
                               report.finalGapRelative);
    if (report.runs.size() != report.perEps.size())
        throw ParameterError("limit extraction needs the per-run trajectories (keepRuns)");
    LimitExtract out;
    out.s = report.limitS;
    out.lastIterate = report.limitProfile;
    out.extrapolated = out.lastIterate;
    const std::vector<double> gaps = consecutive_gaps(report);
    const std::size_t m = report.runs.size();
    if (gaps.size() >= 2 && gaps[gaps.size() - 2] > 0.0) {
        // phi_eps - phi_lim shrinking by a fixed ratio r per eps step gives
        // phi_lim = phi_N + (phi_N - phi_{N-1}) r / (1 - r)
        const double r = gaps.back() / gaps[gaps.size() - 2];
        out.contractionRatio = r;
        if (r < 1.0) {
            const Profile prev = report.runs[m - 2].trajectory.back().phi.values();
            for (std::size_t i = 0; i < out.extrapolated.size(); ++i)
                out.extrapolated[i] += (out.lastIterate[i] - prev[i]) * r / (1.0 - r);
        }
    }
    for (std::size_t i = 0; i < out.s.size(); ++i)
        if (out.s[i] >= report.window.lo && out.s[i] <= report.window.hi)
            out.extrapolationShift =
                std::max(out.extrapolationShift, std::abs(out.extrapolated[i] - out.lastIterate[i]));

    FlowConfig cfg = base;
    cfg.epsilon = report.epsList.back();
    const FlowProblem problem = FlowProblem::build(cfg);
    const DiagnosticsContext ctx = problem.context();
    out.holderAlpha = ctx.holder_alpha();
    out.holderCertificate = holder_seminorm(out.extrapolated, out.holderAlpha, problem.bg);
    out.uniformHolderBound = report.uniformity.holderSeminorm;
    return out;
}

} // namespace coneflow
