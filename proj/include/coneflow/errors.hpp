#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coneflow {

// Raised when input data violates a stated invariant.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when the metric density fails to stay positive.
class PositivityError : public std::runtime_error {
public:
    PositivityError(std::size_t node, double s, double density)
        : std::runtime_error("metric density not positive at node " + std::to_string(node) +
                             " (s=" + std::to_string(s) + ", density=" + std::to_string(density) + ")"),
          node_(node), s_(s), density_(density) {}

    std::size_t node() const { return node_; }
    double s() const { return s_; }
    double density() const { return density_; }

private:
    std::size_t node_;
    double s_;
    double density_;
};

// Raised by iterative procedures (quadrature, Newton, step control).
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}

    double achieved() const { return achieved_; }

private:
    double achieved_;
};

} // namespace coneflow
