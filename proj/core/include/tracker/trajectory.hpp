#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace tracker {

/// Uniformly sampled scalar signal. Sample k corresponds to discrete time
/// index k (contiguous from 0) at sample period T seconds.
struct Trajectory {
    std::vector<double> values;
    double period = 1.0;

    Trajectory() = default;
    Trajectory(std::vector<double> v, double T) : values(std::move(v)), period(T) {}

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int t) const { return values[static_cast<size_t>(t)]; }
    double& operator[](int t) { return values[static_cast<size_t>(t)]; }

    /// Value at index t, holding the final sample for t past the end.
    /// Inverse laws need an r-step preview; past the last sample the desired
    /// value is frozen.
    double at_clamped(int t) const {
        if (values.empty()) return 0.0;
        if (t < 0) return 0.0;
        if (t >= size()) return values.back();
        return values[static_cast<size_t>(t)];
    }

    static Trajectory constant(double value, int steps, double T) {
        return Trajectory(std::vector<double>(static_cast<size_t>(steps), value), T);
    }
};

/// Time-indexed record of one closed-loop run: reference u, output y, desired
/// output y_d and the state sequence. All sequences share length and period.
struct RunLog {
    Trajectory u;
    Trajectory y;
    Trajectory y_d;
    std::vector<Eigen::VectorXd> x;

    int size() const { return u.size(); }
    int state_dim() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
};

/// CSV with header `t,u,y,y_d,x0,...,x{n-1}`, one row per step, 17 significant
/// digits throughout.
void write_csv(const RunLog& log, std::ostream& out);
void write_csv(const RunLog& log, const std::string& path);
RunLog read_run_csv(std::istream& in, double period);

}  // namespace tracker
