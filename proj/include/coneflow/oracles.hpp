#pragma once

#include <functional>
#include <vector>

// Reference computations used to derive fixture values. They rely on closed
// forms, composite or adaptive Simpson quadrature and Richardson-extrapolated
// finite differences, and share no code with the solver paths they check.
namespace coneflow::oracle {

double simpson(const std::function<double(double)>& f, double a, double b, int panels);
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

// Richardson-extrapolated centered differences.
double fd1(const std::function<double(double)>& f, double x, double h);
double fd2(const std::function<double(double)>& f, double x, double h);

double sigmoid(double s);
double log_sigmoid(double s);
// Fubini-Study data in the s-chart
double u0p(double s);
double u0pp(double s);
double log_u0pp(double s);

// (1/rho) int_0^u ((eps^2+r)^rho - eps^(2 rho)) / r dr via r = u t^(1/rho)
double chi(double eps, double rho, double u);
// first u-derivative in closed form
double chi_u(double eps, double rho, double u);
// second u-derivative by differencing chi_u
double chi_uu(double eps, double rho, double u);
// d^2/ds^2 chi(eps^2 + e^{h(s)}) for h = log sigmoid(sign * s)
double chi_ss(double eps, double rho, double s, int sign);

// theta_X = c u0' + kappa with int e^theta omega_0 = 4 pi
double theta_kappa(double c);

// least-squares slope
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y);

// omega_0 arc length between s = a and s = b
double arc_length(double a, double b);

// min over nodes and eps of 1 + k (chi_ss for both poles) / u0pp
double nu(double k, double rho0, double rhoInf, const std::vector<double>& nodes,
          const std::vector<double>& eps);

// nu is affine in k, so the coefficient reaching a target is explicit
double k_for_nu(double target, double rho0, double rhoInf, const std::vector<double>& nodes,
                const std::vector<double>& eps);

} // namespace coneflow::oracle
