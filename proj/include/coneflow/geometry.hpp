#pragma once

#include <cstddef>
#include <vector>

namespace coneflow {

using Profile = std::vector<double>;

double gamma(double lambda, double beta);

struct ConeData {
    double lambda = 1.0;
    double beta = 1.0;
    double tau0 = 1.0;
    double tauInf = 1.0;
    double gamma = 1.0;

    // Validates the invariants and fills gamma.
    static ConeData make(double lambda, double beta, double tau0, double tauInf);

    double rho0() const { return 1.0 - (1.0 - beta) * tau0; }
    double rhoInf() const { return 1.0 - (1.0 - beta) * tauInf; }
    void validate() const;

    bool operator==(const ConeData&) const = default;
};

struct VectorFieldData {
    double c = 0.0;

    bool operator==(const VectorFieldData&) const = default;
};

struct RadialGrid {
    double sMin = -30.0;
    double sMax = 30.0;
    std::size_t n = 1537;

    static RadialGrid make(double sMin, double sMax, std::size_t n);

    double spacing() const { return (sMax - sMin) / static_cast<double>(n - 1); }
    double node(std::size_t i) const;
    Profile nodes() const;
    // Index of the node closest to s, clamped to the grid.
    std::size_t nearest(double s) const;
    void validate() const;

    bool operator==(const RadialGrid&) const = default;
};

// Divisor data: log|s_i|^2 for the sections vanishing at z=0 and z=infinity
// together with their analytic s-derivatives.
struct DivisorPotentials {
    Profile h0, h0p, h0pp;
    Profile hInf, hInfp, hInfpp;
};

struct BackgroundGeometry {
    RadialGrid grid;
    Profile s;
    Profile u0, u0p, u0pp, u0ppp;
    // Ricci form density of omega_0 in the s-chart, -(log u0pp)''.
    Profile ric0;
    Profile h0, h0p, h0pp;
    Profile hInf, hInfp, hInfpp;
    Profile thetaX;
    Profile F0;
    double totalArea = 0.0;
};

BackgroundGeometry build_fubini_study(const RadialGrid& grid);
DivisorPotentials divisor_potentials(const ConeData& cone, const RadialGrid& grid);
Profile theta_potential(const VectorFieldData& vf, const BackgroundGeometry& bg);
double check_X_logsD_bound(const VectorFieldData& vf, const ConeData& cone,
                           const BackgroundGeometry& bg);

// Full background: Fubini-Study fields, divisor potentials and theta_X.
BackgroundGeometry build_background(const RadialGrid& grid, const ConeData& cone,
                                    const VectorFieldData& vf);

// 2*pi times the trapezoid integral of f*u0pp over the grid.
double area_integral(const BackgroundGeometry& bg, const Profile& f);

} // namespace coneflow
