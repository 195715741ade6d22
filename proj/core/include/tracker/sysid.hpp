#pragma once

#include <complex>
#include <string>
#include <vector>

#include "tracker/plant.hpp"
#include "tracker/trajectory.hpp"

namespace tracker {

/// The minimal closed-loop knowledge the add-on architecture needs. A zero
/// with modulus inside [1 - 1e-6, 1 + 1e-6] counts as non-minimum-phase and
/// raises the near-unit-circle warning; a zero that close already breaks the
/// inversion in practice.
struct SysIdReport {
    int relative_degree = 0;
    double dc_gain = 0.0;
    std::vector<std::complex<double>> zeros;
    bool minimum_phase = false;
    bool near_unit_circle_warning = false;
    double step_steady_state_error = 0.0;
    bool difference_learning_eligible = false;

    std::string to_json() const;
};

constexpr double kDefaultMatrixTol = 1e-9;

/// Smallest r in [1, n] with |c A^{r-1} b| > tol. Throws when the first n
/// Markov parameters all vanish.
int relative_degree_lti(const LtiStateSpace& sys, double tol = kDefaultMatrixTol);

/// Delay read off a recorded unit-step response from rest: smallest r >= 1
/// with |y(r)| > tol. Default tol is 1e-6 times the step amplitude.
int relative_degree_from_step(const RunLog& step_log, double tol = -1.0);

/// Transfer function evaluated at z = 1, i.e. c (I - A)^{-1} b. Throws for a
/// pole at z = 1 (integrator).
double dc_gain(const LtiStateSpace& sys);
double dc_gain(const TransferFunctionModel& tf);

/// Numerator roots, polished so |numerator(z0)| < 1e-8. Empty for a constant
/// numerator.
std::vector<std::complex<double>> zeros(const TransferFunctionModel& tf);

bool is_minimum_phase(const std::vector<std::complex<double>>& zs,
                      bool* near_unit_circle = nullptr);

/// Mean |y - step amplitude| over the final tail_fraction of the log, with the
/// amplitude taken from the desired-trajectory tail.
double step_steady_state_error(const RunLog& step_log, double tail_fraction);

/// Full identification from matrices plus a simulated step response.
SysIdReport identify(const LtiStateSpace& sys, int step_horizon = 400);

/// Step-response-only identification for systems available just as a black-box
/// step map (the nonlinear demo). Zeros stay empty; minimum_phase reflects the
/// trivially stable zero dynamics of a full-relative-degree system.
SysIdReport identify_from_step(const RunLog& step_log);

}  // namespace tracker
