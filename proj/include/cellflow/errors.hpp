#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cellflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Geometry / meshing
struct ClearanceViolation : Error { using Error::Error; };
struct MeshFailure : Error { using Error::Error; };
struct OrientationFailure : Error { using Error::Error; };
struct PairingIncomplete : Error { using Error::Error; };

// Assembly / solvers
struct NonpositiveViscosity : Error { using Error::Error; };

struct SolverBreakdown : Error {
    std::vector<double> residual_history;
    SolverBreakdown(const std::string& msg, std::vector<double> history = {})
        : Error(msg), residual_history(std::move(history)) {}
};

/// One record per nonlinear iteration of the fixed-point loop.
struct PicardStep {
    int iteration = 0;
    double rel_increment = 0.0;
    double linear_residual = 0.0;
    double omega = 1.0;
};

struct NoConvergence : Error {
    std::vector<PicardStep> history;
    NoConvergence(const std::string& msg, std::vector<PicardStep> h)
        : Error(msg), history(std::move(h)) {}
};

struct RootBracketFailure : Error { using Error::Error; };

// Configuration / CLI
struct ConfigError : Error { using Error::Error; };

} // namespace cellflow
