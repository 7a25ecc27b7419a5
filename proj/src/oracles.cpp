#include "coneflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coneflow::oracle {

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2)
        ++panels;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

namespace {

double adaptive(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol)
        return left + right + diff / 15.0;
    return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    // start from 16 panels so narrow features are not skipped
    double total = 0.0;
    const int pieces = 16;
    for (int i = 0; i < pieces; ++i) {
        const double x0 = a + (b - a) * i / pieces;
        const double x1 = a + (b - a) * (i + 1) / pieces;
        const double f0 = f(x0), f1 = f(x1), fm = f(0.5 * (x0 + x1));
        const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += adaptive(f, x0, x1, f0, fm, f1, whole, tol / pieces, 40);
    }
    return total;
}

double fd1(const std::function<double(double)>& f, double x, double h) {
    auto d = [&](double k) { return (f(x + k) - f(x - k)) / (2.0 * k); };
    return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

double fd2(const std::function<double(double)>& f, double x, double h) {
    const double fx = f(x);
    auto d = [&](double k) { return (f(x + k) - 2.0 * fx + f(x - k)) / (k * k); };
    return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

double sigmoid(double s) {
    return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

double log_sigmoid(double s) {
    return s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
}

double u0p(double s) { return 2.0 * sigmoid(s); }

double u0pp(double s) { return 2.0 * sigmoid(s) * sigmoid(-s); }

double log_u0pp(double s) { return std::log(2.0) + log_sigmoid(s) + log_sigmoid(-s); }

double chi(double eps, double rho, double u) {
    if (u <= 0.0)
        return 0.0;
    const double e2 = eps * eps;
    // with r = u t^(1/rho) the measure dr/r becomes dt/(rho t)
    auto g = [&](double t) {
        if (t <= 0.0)
            return eps == 0.0 ? std::pow(u, rho) / rho : (rho == 1.0 ? u / rho : 0.0);
        const double r = u * std::pow(t, 1.0 / rho);
        const double num = eps == 0.0 ? std::pow(r, rho)
                                      : std::pow(e2, rho) * std::expm1(rho * std::log1p(r / e2));
        return num / (rho * t);
    };
    const double scale = std::pow(e2 + u, rho) / (rho * rho);
    return adaptive_simpson(g, 0.0, 1.0, 1e-15 * scale) / rho;
}

double chi_u(double eps, double rho, double u) {
    const double e2 = eps * eps;
    if (eps == 0.0)
        return std::pow(u, rho - 1.0) / rho;
    return std::pow(e2, rho) * std::expm1(rho * std::log1p(u / e2)) / (rho * u);
}

double chi_uu(double eps, double rho, double u) {
    return fd1([&](double x) { return chi_u(eps, rho, x); }, u, 1e-3 * u);
}

double chi_ss(double eps, double rho, double s, int sign) {
    // h = log sigmoid(sign s): h' = sign sigmoid(-sign s), h'' = -sigmoid(s) sigmoid(-s)
    const double u = sigmoid(sign * s);
    const double hp = sign * sigmoid(-sign * s);
    const double hpp = -sigmoid(s) * sigmoid(-s);
    const double us = u * hp;
    const double uss = u * (hpp + hp * hp);
    return chi_uu(eps, rho, u) * us * us + chi_u(eps, rho, u) * uss;
}

double theta_kappa(double c) {
    // with x = u0' in (0, 2): 4 pi = 2 pi e^kappa int_0^2 e^{c x} dx
    const double I = simpson([c](double x) { return std::exp(c * x); }, 0.0, 2.0, 2000);
    return std::log(2.0 / I);
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double arc_length(double a, double b) {
    return adaptive_simpson([](double s) { return std::sqrt(0.5 * u0pp(s)); }, a, b, 1e-13);
}

double nu(double k, double rho0, double rhoInf, const std::vector<double>& nodes,
          const std::vector<double>& eps) {
    double v = std::numeric_limits<double>::infinity();
    for (double e : eps)
        for (double s : nodes)
            v = std::min(v, 1.0 + k * (chi_ss(e, rho0, s, 1) + chi_ss(e, rhoInf, s, -1)) / u0pp(s));
    return v;
}

double k_for_nu(double target, double rho0, double rhoInf, const std::vector<double>& nodes,
                const std::vector<double>& eps) {
    const double slope = nu(1.0, rho0, rhoInf, nodes, eps) - 1.0;
    if (!(slope < 0.0))
        throw std::domain_error("nu does not decrease with k");
    return (target - 1.0) / slope;
}

} // namespace coneflow::oracle
