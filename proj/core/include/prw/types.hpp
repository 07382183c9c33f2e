#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace prw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Thrown when an input violates a documented precondition (bad file, bad
// shape, weights off the simplex, ...).
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a computation leaves the representable range (e.g. the plan
// parameterization overflows because eta is too small for the data scale).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace prw
