#include "coneflow/state.hpp"

#include "coneflow/errors.hpp"

#include <cmath>

namespace coneflow {

Potential Potential::constant(std::size_t n, double value) {
    if (n < 2)
        throw ParameterError("potential needs at least two nodes");
    Potential p;
    p.anchorValue = value;
    p.increments.assign(n - 1, 0.0);
    return p;
}

Potential Potential::from_values(const Profile& values) {
    if (values.size() < 2)
        throw ParameterError("potential needs at least two nodes");
    Potential p;
    p.increments.resize(values.size() - 1);
    for (std::size_t j = 0; j + 1 < values.size(); ++j)
        p.increments[j] = values[j + 1] - values[j];
    p.anchorValue = values[p.anchor()];
    return p;
}

Profile Potential::values() const {
    const std::size_t n = size();
    const std::size_t m = anchor();
    Profile v(n);
    v[m] = anchorValue;
    for (std::size_t j = m; j + 1 < n; ++j)
        v[j + 1] = v[j] + increments[j];
    for (std::size_t j = m; j > 0; --j)
        v[j - 1] = v[j] - increments[j - 1];
    return v;
}

Potential Potential::axpy(double a, const Potential& other) const {
    Potential p;
    p.anchorValue = anchorValue + a * other.anchorValue;
    p.increments.resize(increments.size());
    for (std::size_t j = 0; j < increments.size(); ++j)
        p.increments[j] = increments[j] + a * other.increments[j];
    return p;
}

void potential_derivatives(const Potential& phi, double h, Profile& second, Profile& first) {
    const std::size_t n = phi.size();
    const Profile& d = phi.increments;
    second.resize(n);
    first.resize(n);
    const double e = std::expm1(h);
    const double h2 = h * h;
    second[0] = d[0] / e;
    first[0] = second[0];
    for (std::size_t j = 1; j + 1 < n; ++j) {
        second[j] = (d[j] - d[j - 1]) / h2;
        first[j] = (d[j] + d[j - 1]) / (2.0 * h);
    }
    second[n - 1] = -d[n - 2] / e;
    first[n - 1] = d[n - 2] / e;
}

} // namespace coneflow
