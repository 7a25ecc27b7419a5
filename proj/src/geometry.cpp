#include "coneflow/geometry.hpp"

#include "coneflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coneflow {

namespace {

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// logistic function 1/(1+e^{-s})
double sigmoid(double s) {
    return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

// Composite trapezoid on the grid with stride `stride` (nodes 0, stride, ...).
// Requires (n-1) divisible by stride.
double trapezoid(const Profile& f, double h, std::size_t stride) {
    const std::size_t n = f.size();
    double sum = 0.5 * (f[0] + f[n - 1]);
    for (std::size_t i = stride; i + 1 < n; i += stride)
        sum += f[i];
    return sum * h * static_cast<double>(stride);
}

// Trapezoid with one Richardson step against the doubled spacing. Throws when
// the two levels disagree, which happens only on grids too coarse to resolve
// the unit-scale features of the integrand.
double refined_integral(const Profile& f, double h, const char* what) {
    const double fine = trapezoid(f, h, 1);
    if ((f.size() - 1) % 2 != 0)
        return fine;
    const double coarse = trapezoid(f, h, 2);
    const double scale = std::max(std::abs(fine), 1e-300);
    const double gap = std::abs(fine - coarse) / scale;
    if (gap > 1e-6)
        throw ConvergenceError(std::string(what) + ": quadrature not converged, grid too coarse", gap);
    return fine + (fine - coarse) / 3.0;
}

} // namespace

double gamma(double lambda, double beta) {
    if (!(lambda > 0.0))
        throw ParameterError("lambda must be positive");
    if (!(beta > 0.0 && beta <= 1.0))
        throw ParameterError("beta must lie in (0,1]");
    const double g = 1.0 - lambda * (1.0 - beta);
    if (g < 0.0) {
        std::ostringstream os;
        os << "γ<0: 1 - lambda*(1-beta) = " << g << " for lambda=" << lambda << ", beta=" << beta;
        throw ParameterError(os.str());
    }
    return g;
}

ConeData ConeData::make(double lambda, double beta, double tau0, double tauInf) {
    ConeData cone;
    cone.lambda = lambda;
    cone.beta = beta;
    cone.tau0 = tau0;
    cone.tauInf = tauInf;
    cone.gamma = coneflow::gamma(lambda, beta);
    cone.validate();
    return cone;
}

void ConeData::validate() const {
    const double g = coneflow::gamma(lambda, beta);
    if (g != gamma)
        throw ParameterError("gamma field inconsistent with 1 - lambda*(1-beta)");
    if (!(tau0 > 0.0) || !(tauInf > 0.0))
        throw ParameterError("divisor weights tau0, tauInf must be positive");
    if (std::abs(tau0 + tauInf - 2.0 * lambda) > 1e-12 * std::max(1.0, lambda)) {
        std::ostringstream os;
        os << "degree constraint violated: tau0 + tauInf = " << tau0 + tauInf
           << " but 2*lambda = " << 2.0 * lambda;
        throw ParameterError(os.str());
    }
    for (double r : {rho0(), rhoInf()}) {
        if (!(r > 0.0 && r <= 1.0)) {
            std::ostringstream os;
            os << "cone exponent 1-(1-beta)*tau = " << r << " outside (0,1]";
            throw ParameterError(os.str());
        }
    }
}

RadialGrid RadialGrid::make(double sMin, double sMax, std::size_t n) {
    RadialGrid g;
    g.sMin = sMin;
    g.sMax = sMax;
    g.n = n;
    g.validate();
    return g;
}

void RadialGrid::validate() const {
    if (!(sMin < 0.0 && 0.0 < sMax))
        throw ParameterError("grid must satisfy sMin < 0 < sMax");
    if (n < 3)
        throw ParameterError("grid needs at least 3 nodes");
}

double RadialGrid::node(std::size_t i) const {
    if (i + 1 == n)
        return sMax;
    return sMin + static_cast<double>(i) * spacing();
}

Profile RadialGrid::nodes() const {
    Profile s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = node(i);
    return s;
}

std::size_t RadialGrid::nearest(double s) const {
    const double x = std::round((s - sMin) / spacing());
    if (x <= 0.0)
        return 0;
    return std::min(static_cast<std::size_t>(x), n - 1);
}

BackgroundGeometry build_fubini_study(const RadialGrid& grid) {
    grid.validate();
    BackgroundGeometry bg;
    bg.grid = grid;
    bg.s = grid.nodes();
    const std::size_t n = grid.n;
    bg.u0.resize(n);
    bg.u0p.resize(n);
    bg.u0pp.resize(n);
    bg.u0ppp.resize(n);
    bg.ric0.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = bg.s[i];
        const double p = sigmoid(s);
        const double q = sigmoid(-s);
        bg.u0[i] = 2.0 * softplus(s);
        bg.u0p[i] = 2.0 * p;
        bg.u0pp[i] = 2.0 * p * q;
        bg.u0ppp[i] = -bg.u0pp[i] * std::tanh(0.5 * s);
        // -(log u0pp)'' = -(d/ds)(-tanh(s/2)) = p*q*2
        bg.ric0[i] = 2.0 * p * q;
    }
    // class 2*pi*c_1: the momentum u0' runs over (0, 2)
    bg.totalArea = 4.0 * M_PI;

    // F0'' = u0pp + (log u0pp)''. For this profile u0' + (log u0pp)' = 2p - tanh(s/2) = 1,
    // so with F0' bounded at both ends F0 is constant. Summing the two terms in
    // floating point leaves ~1e-16 noise that dominates log(fD/u0pp) where u0pp
    // is tiny, so use the exact value and only fix the normalization.
    bg.F0.assign(n, 0.0);
    const double h = grid.spacing();
    Profile w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = std::exp(-bg.F0[i]) * bg.u0pp[i];
    const double area = 2.0 * M_PI * refined_integral(w, h, "F0 normalization");
    const double shift = std::log(area / bg.totalArea);
    for (double& f : bg.F0)
        f += shift;
    return bg;
}

DivisorPotentials divisor_potentials(const ConeData& cone, const RadialGrid& grid) {
    cone.validate();
    grid.validate();
    const std::size_t n = grid.n;
    DivisorPotentials d;
    d.h0.resize(n);
    d.h0p.resize(n);
    d.h0pp.resize(n);
    d.hInf.resize(n);
    d.hInfp.resize(n);
    d.hInfpp.resize(n);
    // |s_0|^2 = |z|^2/(1+|z|^2), |s_inf|^2 = 1/(1+|z|^2), each with curvature
    // omega_0/2, so the weighted sum has curvature lambda*omega_0.
    for (std::size_t i = 0; i < n; ++i) {
        const double s = grid.node(i);
        const double p = sigmoid(s);
        const double q = sigmoid(-s);
        d.h0[i] = -softplus(-s);
        d.h0p[i] = q;
        d.h0pp[i] = -p * q;
        d.hInf[i] = -softplus(s);
        d.hInfp[i] = -p;
        d.hInfpp[i] = -p * q;
    }
    const double k0 = -*std::max_element(d.h0.begin(), d.h0.end());
    const double kInf = -*std::max_element(d.hInf.begin(), d.hInf.end());
    for (std::size_t i = 0; i < n; ++i) {
        d.h0[i] += k0;
        d.hInf[i] += kInf;
    }
    return d;
}

Profile theta_potential(const VectorFieldData& vf, const BackgroundGeometry& bg) {
    const std::size_t n = bg.grid.n;
    Profile theta(n, 0.0);
    if (vf.c == 0.0)
        return theta;
    Profile w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = std::exp(vf.c * bg.u0p[i]) * bg.u0pp[i];
    const double area = 2.0 * M_PI * refined_integral(w, bg.grid.spacing(), "theta_X normalization");
    const double kappa = std::log(bg.totalArea / area);
    for (std::size_t i = 0; i < n; ++i)
        theta[i] = vf.c * bg.u0p[i] + kappa;
    return theta;
}

double check_X_logsD_bound(const VectorFieldData& vf, const ConeData& cone,
                           const BackgroundGeometry& bg) {
    double sup = 0.0;
    for (std::size_t i = 0; i < bg.grid.n; ++i)
        sup = std::max(sup, std::abs(vf.c * (cone.tau0 * bg.h0p[i] + cone.tauInf * bg.hInfp[i])));
    return sup;
}

BackgroundGeometry build_background(const RadialGrid& grid, const ConeData& cone,
                                    const VectorFieldData& vf) {
    BackgroundGeometry bg = build_fubini_study(grid);
    DivisorPotentials d = divisor_potentials(cone, grid);
    bg.h0 = std::move(d.h0);
    bg.h0p = std::move(d.h0p);
    bg.h0pp = std::move(d.h0pp);
    bg.hInf = std::move(d.hInf);
    bg.hInfp = std::move(d.hInfp);
    bg.hInfpp = std::move(d.hInfpp);
    bg.thetaX = theta_potential(vf, bg);
    return bg;
}

double area_integral(const BackgroundGeometry& bg, const Profile& f) {
    Profile w(bg.grid.n);
    for (std::size_t i = 0; i < bg.grid.n; ++i)
        w[i] = f[i] * bg.u0pp[i];
    return 2.0 * M_PI * trapezoid(w, bg.grid.spacing(), 1);
}

} // namespace coneflow
