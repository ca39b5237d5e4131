#pragma once

#include <stdexcept>
#include <string>

namespace myoctl {

/// Thrown when a caller violates a documented precondition (e.g. activation
/// outside [0, 1], non-positive timestep).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PlantConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A single inversion frame has no usable solution (degenerate denominators
/// in the bound or control recovery formulas).
class InfeasibleFrame : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace myoctl
