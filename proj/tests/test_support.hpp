#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "tracker/plant.hpp"
#include "tracker/polynomial.hpp"
#include "tracker/trajectory.hpp"

namespace testsupport {

inline double uniform(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * ((eng() >> 11) * 0x1.0p-53);
}

/// Roots inside |z| <= radius, complex ones in conjugate pairs.
inline std::vector<std::complex<double>> random_roots(std::mt19937_64& eng, int count,
                                                      double radius) {
    std::vector<std::complex<double>> roots;
    while (static_cast<int>(roots.size()) < count) {
        if (count - static_cast<int>(roots.size()) >= 2 && uniform(eng, 0.0, 1.0) < 0.4) {
            const double mag = uniform(eng, 0.1, radius);
            const double phase = uniform(eng, 0.15, 3.0);
            roots.emplace_back(mag * std::cos(phase), mag * std::sin(phase));
            roots.emplace_back(mag * std::cos(phase), -mag * std::sin(phase));
        } else {
            roots.emplace_back(uniform(eng, -radius, radius), 0.0);
        }
    }
    return roots;
}

/// Random stable transfer function of order n, relative degree r, all zeros
/// inside the given radius, leading numerator coefficient away from zero.
inline tracker::TransferFunctionModel random_stable_tf(std::mt19937_64& eng, int n, int r,
                                                       double zero_radius = 0.85) {
    const std::vector<double> den = tracker::poly_from_roots(random_roots(eng, n, 0.85));
    std::vector<double> num = tracker::poly_from_roots(random_roots(eng, n - r, zero_radius));
    const double lead = (uniform(eng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(eng, 0.3, 2.0);
    for (double& v : num) v *= lead;
    return tracker::TransferFunctionModel(std::vector<double>(den.begin(), den.end() - 1), num);
}

/// Rescales the numerator so the DC gain is exactly one.
inline tracker::TransferFunctionModel with_unity_dc(tracker::TransferFunctionModel tf) {
    const double scale =
        tracker::poly_eval(tf.denominator(), 1.0) / tracker::poly_eval(tf.beta, 1.0);
    for (double& v : tf.beta) v *= scale;
    return tf;
}

/// Smooth bounded desired trajectory: a three-tone sinusoid mix.
inline tracker::Trajectory random_trajectory(std::mt19937_64& eng, int steps, double T = 1.0) {
    tracker::Trajectory traj;
    traj.period = T;
    traj.values.resize(static_cast<size_t>(steps));
    for (int tone = 0; tone < 3; ++tone) {
        const double a = uniform(eng, 0.2, 0.8);
        const double w = uniform(eng, 0.05, 0.7);
        const double phase = uniform(eng, 0.0, 6.28);
        for (int t = 0; t < steps; ++t)
            traj.values[static_cast<size_t>(t)] += a * std::sin(w * t + phase);
    }
    return traj;
}

}  // namespace testsupport
