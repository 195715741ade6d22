#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tracker/trajectory.hpp"

namespace tracker {

/// Violated precondition or type invariant (dimension mismatch, bad window length, ...).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// A closed-loop run left the finite / bounded region. Carries the step at
/// which the guard fired and the log recorded up to that point. Expected
/// behaviour for inverse-driven non-minimum-phase runs.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int step, const std::string& what, RunLog partial_log = {})
        : std::runtime_error(what), partial(std::move(partial_log)), step_(step) {}
    int step() const { return step_; }

    RunLog partial;

private:
    int step_;
};

/// Levenberg-Marquardt could not make progress (singular normal equations even
/// after the damping escalated past its ceiling).
class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::string what, std::vector<double> partial_history)
        : std::runtime_error(std::move(what)), loss_history(std::move(partial_history)) {}
    std::vector<double> loss_history;
};

/// Invalid experiment configuration (unknown key, missing file, empty list, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tracker
