#include "coneflow/regularization.hpp"

#include "coneflow/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coneflow {

namespace {

void check_rho(double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw ParameterError("chi: rho must lie in (0,1]");
}

// (eps^2+u)^rho - eps^(2 rho), without cancellation for u << eps^2
double numerator(double eps2, double rho, double u) {
    if (eps2 == 0.0)
        return std::pow(u, rho);
    return std::pow(eps2, rho) * std::expm1(rho * std::log1p(u / eps2));
}

// f(x) = ((1+x)^rho - 1)/(rho x) and f'(x), series for small x
void scaled_first(double rho, double x, double& f, double& fp) {
    if (x < 0.25) {
        // (1+x)^rho = sum_n C(rho,n) x^n, C(rho,n) carried in c
        double c = rho;
        f = 1.0;
        fp = 0.0;
        double xPow = 1.0; // x^(n-2)
        for (int n = 2; n < 80; ++n) {
            c *= (rho - (n - 1)) / n;
            const double term = c / rho * xPow;
            f += term * x;
            fp += term * (n - 1);
            if (std::abs(term) < 1e-18 * std::abs(fp) + 1e-300)
                break;
            xPow *= x;
        }
        return;
    }
    const double em = std::expm1(rho * std::log1p(x));
    f = em / (rho * x);
    fp = (std::pow(1.0 + x, rho - 1.0) * x - em / rho) / (x * x);
}

} // namespace

double chi_eval(double epsilon, double rho, double u) {
    check_rho(rho);
    if (!(epsilon >= 0.0))
        throw ParameterError("chi: epsilon must be nonnegative");
    if (!(u >= 0.0))
        throw ParameterError("chi: u must be nonnegative");
    if (u == 0.0)
        return 0.0;
    if (epsilon == 0.0)
        return std::pow(u, rho) / (rho * rho);
    const double eps2 = epsilon * epsilon;
    // r = eps^2 (e^v - 1) removes the r = 0 singularity:
    // chi = eps^(2 rho)/rho * int_0^V (e^{rho v} - 1)/(1 - e^{-v}) dv
    const double V = std::log1p(u / eps2);
    auto integrand = [rho](double v) {
        if (v == 0.0)
            return rho;
        return std::expm1(rho * v) / -std::expm1(-v);
    };
    // integrate over the unit interval so the error estimate scales with V
    auto scaled = [&](double t) { return integrand(V * t); };
    double err = 0.0;
    const double val = V * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                               scaled, 0.0, 1.0, 20, 1e-13, &err);
    err *= V;
    if (!(err <= 1e-10 * std::abs(val)))
        throw ConvergenceError("chi quadrature failed", err / std::abs(val));
    return std::pow(eps2, rho) / rho * val;
}

ChiDerivatives chi_derivatives(double epsilon, double rho, double u) {
    check_rho(rho);
    if (!(u > 0.0))
        throw ParameterError("chi_derivatives: u must be positive");
    ChiDerivatives d;
    if (epsilon == 0.0) {
        d.first = std::pow(u, rho - 1.0) / rho;
        d.second = (rho - 1.0) * std::pow(u, rho - 2.0) / rho;
        return d;
    }
    const double eps2 = epsilon * epsilon;
    double f = 0.0, fp = 0.0;
    scaled_first(rho, u / eps2, f, fp);
    d.first = std::pow(eps2, rho - 1.0) * f;
    d.second = std::pow(eps2, rho - 2.0) * fp;
    return d;
}

ChiProfiles chi_profiles(double epsilon, double rho, const Profile& h, const Profile& hp,
                         const Profile& hpp, bool withValues) {
    check_rho(rho);
    const double eps2 = epsilon * epsilon;
    const std::size_t n = h.size();
    ChiProfiles out;
    out.chi.assign(n, 0.0);
    out.chip.resize(n);
    out.chipp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = std::exp(h[i]);
        // g = u * dchi/du, and d/du(g) = (eps^2+u)^(rho-1)
        const double g = numerator(eps2, rho, u) / rho;
        const double logBase = eps2 == 0.0 ? h[i] : std::log(eps2 + u);
        const double ug = std::exp(h[i] + (rho - 1.0) * logBase);
        if (withValues)
            out.chi[i] = chi_eval(epsilon, rho, u);
        out.chip[i] = g * hp[i];
        out.chipp[i] = ug * hp[i] * hp[i] + g * hpp[i];
    }
    return out;
}

PsiAux build_psi_aux(double epsilon, double rho, double Ctilde, const ConeData& cone,
                     const BackgroundGeometry& bg) {
    check_rho(rho);
    if (!(Ctilde >= 0.0))
        throw ParameterError("psi: Ctilde must be nonnegative");
    cone.validate();
    const std::size_t n = bg.grid.n;
    PsiAux out;
    out.psi.assign(n, 0.0);
    out.maxAdmissibleCoeff = std::numeric_limits<double>::infinity();
    if (Ctilde == 0.0)
        return out;
    const ChiProfiles a = chi_profiles(epsilon, rho, bg.h0, bg.h0p, bg.h0pp);
    const ChiProfiles b = chi_profiles(epsilon, rho, bg.hInf, bg.hInfp, bg.hInfpp);
    for (std::size_t i = 0; i < n; ++i) {
        out.psi[i] = Ctilde * (a.chi[i] + b.chi[i]);
        out.sup = std::max(out.sup, std::abs(out.psi[i]));
        const double pp = Ctilde * (a.chipp[i] + b.chipp[i]);
        if (pp < 0.0)
            out.maxAdmissibleCoeff = std::min(out.maxAdmissibleCoeff, bg.u0pp[i] / -pp);
    }
    return out;
}

RegularizedBackground build_regularized_background(double epsilon, double k, const ConeData& cone,
                                                   const BackgroundGeometry& bg,
                                                   const PsiSettings& psi) {
    cone.validate();
    if (!(epsilon >= 0.0))
        throw ParameterError("epsilon must be nonnegative");
    if (!(k >= 0.0))
        throw ParameterError("k must be nonnegative");
    const std::size_t n = bg.grid.n;
    RegularizedBackground r;
    r.epsilon = epsilon;
    r.k = k;
    r.rhoList = {cone.rho0(), cone.rhoInf()};
    const ChiProfiles a = chi_profiles(epsilon, r.rhoList[0], bg.h0, bg.h0p, bg.h0pp);
    const ChiProfiles b = chi_profiles(epsilon, r.rhoList[1], bg.hInf, bg.hInfp, bg.hInfpp);
    const double eps2 = epsilon * epsilon;
    const double w0 = (1.0 - cone.beta) * cone.tau0;
    const double wInf = (1.0 - cone.beta) * cone.tauInf;
    r.chi.resize(n);
    r.chip.resize(n);
    r.chipp.resize(n);
    r.omegaEpsDensity.resize(n);
    r.etaEpsDensity.resize(n);
    r.Feps.resize(n);
    r.twist.resize(n);
    r.nu = std::numeric_limits<double>::infinity();
    auto logDerivs = [eps2](double h, double hp, double hpp) {
        // second s-derivative of log(eps^2 + e^h)
        const double u = std::exp(h);
        const double den = eps2 + u;
        return u * hpp / den + u * eps2 * hp * hp / (den * den);
    };
    for (std::size_t i = 0; i < n; ++i) {
        r.chi[i] = a.chi[i] + b.chi[i];
        r.chip[i] = a.chip[i] + b.chip[i];
        r.chipp[i] = a.chipp[i] + b.chipp[i];
        const double ratio = 1.0 + k * r.chipp[i] / bg.u0pp[i];
        r.omegaEpsDensity[i] = bg.u0pp[i] * ratio;
        if (!(r.omegaEpsDensity[i] > 0.0))
            throw PositivityError(i, bg.s[i], r.omegaEpsDensity[i]);
        r.nu = std::min(r.nu, ratio);
        r.etaEpsDensity[i] = cone.lambda * bg.u0pp[i] +
                             cone.tau0 * logDerivs(bg.h0[i], bg.h0p[i], bg.h0pp[i]) +
                             cone.tauInf * logDerivs(bg.hInf[i], bg.hInfp[i], bg.hInfpp[i]);
        const double l0 = eps2 == 0.0 ? bg.h0[i] : std::log(eps2 + std::exp(bg.h0[i]));
        const double lInf = eps2 == 0.0 ? bg.hInf[i] : std::log(eps2 + std::exp(bg.hInf[i]));
        r.twist[i] = w0 * l0 + wInf * lInf;
        r.Feps[i] = bg.F0[i] + std::log(ratio) + r.twist[i];
    }
    const double rhoPsi = psi.rho > 0.0 ? psi.rho : std::min(r.rhoList[0], r.rhoList[1]);
    PsiAux aux = build_psi_aux(epsilon, rhoPsi, psi.Ctilde, cone, bg);
    r.psiAux = std::move(aux.psi);
    r.psiSup = aux.sup;
    r.psiMaxCoeff = aux.maxAdmissibleCoeff;
    return r;
}

double nu_for(double epsilon, double k, const ConeData& cone, const BackgroundGeometry& bg) {
    const ChiProfiles a = chi_profiles(epsilon, cone.rho0(), bg.h0, bg.h0p, bg.h0pp, false);
    const ChiProfiles b = chi_profiles(epsilon, cone.rhoInf(), bg.hInf, bg.hInfp, bg.hInfpp, false);
    double nu = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bg.grid.n; ++i)
        nu = std::min(nu, 1.0 + k * (a.chipp[i] + b.chipp[i]) / bg.u0pp[i]);
    return nu;
}

double select_k(const ConeData& cone, const BackgroundGeometry& bg, double targetNu,
                double epsMax) {
    if (targetNu >= 1.0)
        throw ParameterError("select_k: target_nu must be below 1; only k = 0 attains nu = 1, "
                             "choose a target in (0,1)");
    if (!(targetNu > 0.0))
        throw ParameterError("select_k: target_nu must be positive");
    // chi'' does not depend on k, so precompute the two ratio profiles
    Profile m0(bg.grid.n), m1(bg.grid.n);
    for (double eps : {epsMax, 0.0}) {
        const ChiProfiles a = chi_profiles(eps, cone.rho0(), bg.h0, bg.h0p, bg.h0pp, false);
        const ChiProfiles b = chi_profiles(eps, cone.rhoInf(), bg.hInf, bg.hInfp, bg.hInfpp, false);
        Profile& m = eps == 0.0 ? m1 : m0;
        for (std::size_t i = 0; i < bg.grid.n; ++i)
            m[i] = (a.chipp[i] + b.chipp[i]) / bg.u0pp[i];
    }
    auto nu = [&](double k) {
        double v = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < bg.grid.n; ++i)
            v = std::min({v, 1.0 + k * m0[i], 1.0 + k * m1[i]});
        return v;
    };
    double lo = 1e-8;
    if (nu(lo) < targetNu) {
        std::ostringstream os;
        os << "select_k: even k = 1e-8 gives nu = " << nu(lo) << " < " << targetNu;
        throw ParameterError(os.str());
    }
    const double kCap = 1e4;
    double hi = 1.0;
    while (nu(hi) >= targetNu) {
        if (hi >= kCap)
            return kCap;
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (nu(mid) >= targetNu)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace coneflow
