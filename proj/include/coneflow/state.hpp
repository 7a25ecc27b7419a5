#pragma once

#include "coneflow/geometry.hpp"

#include <cstddef>

namespace coneflow {

// A nodal potential stored as its value at the middle node plus the increments
// phi[j+1] - phi[j]. Near the poles the increments are many orders of magnitude
// below the values, and second differences formed from stored values would
// lose every significant digit there.
struct Potential {
    double anchorValue = 0.0;
    Profile increments;

    static Potential constant(std::size_t n, double value);
    static Potential from_values(const Profile& values);

    std::size_t size() const { return increments.size() + 1; }
    std::size_t anchor() const { return increments.size() / 2; }
    Profile values() const;

    // this + a * other
    Potential axpy(double a, const Potential& other) const;
};

// Second and first s-derivatives of a potential on a uniform grid. Interior
// nodes use centered differences; the two end nodes assume the pole
// asymptotics phi = a + b e^{-|s|}.
void potential_derivatives(const Potential& phi, double h, Profile& second, Profile& first);

struct StepStats {
    double dt = 0.0;
    double dtNext = 0.0;
    int newtonIterations = 0;
    double residualNorm = 0.0;
    int rejections = 0;
    bool converged = true;
};

struct FlowState {
    Potential phi;
    Profile phidot;
    double t = 0.0;
    StepStats stepStats;
};

} // namespace coneflow
