#pragma once

#include "coneflow/geometry.hpp"

#include <array>

namespace coneflow {

// chi_rho(eps^2 + u) = (1/rho) * int_0^u ((eps^2+r)^rho - eps^(2 rho)) / r dr.
// eps = 0 is accepted and gives the limit u^rho / rho^2.
double chi_eval(double epsilon, double rho, double u);

struct ChiDerivatives {
    double first = 0.0;
    double second = 0.0;
};

// Derivatives with respect to u.
ChiDerivatives chi_derivatives(double epsilon, double rho, double u);

// chi_rho(eps^2 + e^h) and its first two s-derivatives along a profile h(s).
struct ChiProfiles {
    Profile chi, chip, chipp;
};

ChiProfiles chi_profiles(double epsilon, double rho, const Profile& h, const Profile& hp,
                         const Profile& hpp, bool withValues = true);

struct PsiSettings {
    // rho <= 0 selects the smallest cone exponent
    double rho = 0.0;
    double Ctilde = 1.0;

    bool operator==(const PsiSettings&) const = default;
};

struct PsiAux {
    Profile psi;
    double sup = 0.0;
    // largest c' with u0pp + c' * psi'' >= 0 on the grid (infinite if psi'' >= 0)
    double maxAdmissibleCoeff = 0.0;
};

PsiAux build_psi_aux(double epsilon, double rho, double Ctilde, const ConeData& cone,
                     const BackgroundGeometry& bg);

struct RegularizedBackground {
    double epsilon = 0.0;
    double k = 0.0;
    std::array<double, 2> rhoList{1.0, 1.0};
    Profile chi, chip, chipp;
    Profile omegaEpsDensity;
    Profile etaEpsDensity;
    Profile Feps;
    Profile psiAux;
    // sum_i (1-beta) tau_i log(eps^2 + |s_i|^2)
    Profile twist;
    double nu = 0.0;
    double psiSup = 0.0;
    double psiMaxCoeff = 0.0;
};

RegularizedBackground build_regularized_background(double epsilon, double k, const ConeData& cone,
                                                   const BackgroundGeometry& bg,
                                                   const PsiSettings& psi = {});

// min over grid of omega_eps / omega_0 for coefficient k
double nu_for(double epsilon, double k, const ConeData& cone, const BackgroundGeometry& bg);

double select_k(const ConeData& cone, const BackgroundGeometry& bg, double targetNu,
                double epsMax = 0.25);

} // namespace coneflow
