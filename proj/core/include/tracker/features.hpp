#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "tracker/nnet.hpp"
#include "tracker/trajectory.hpp"

namespace tracker {

enum class FeatureMode { StateSpace, TransferFunction };
enum class DifferenceReference { DesiredNow, ActualNow };

/// Declarative description of how network rows are built from a run.
///
/// state_space mode:       [x(t), y_d(t+r)]                        -> u(t)   (width n+1)
/// transfer_function mode: [y_d(t+r)..y_d(t-n+r), u(t-1)..u(t-n+r)] -> u(t)  (width 2n-r+1)
///
/// With difference = true every position-like entry is taken relative to a
/// per-row reference (y_d(t) or y(t)); velocity-like state components pass
/// through raw, matching Delta_x = x - [ref, 0, ..., 0]^T. The state-space
/// difference form assumes the mechanical convention y = x1.
struct FeatureSpec {
    FeatureMode mode = FeatureMode::StateSpace;
    int r = 1;
    int n = 1;  // system order; state dimension in state_space mode
    bool difference = false;
    DifferenceReference difference_reference = DifferenceReference::ActualNow;

    int input_width() const {
        return mode == FeatureMode::StateSpace ? n + 1 : 2 * n - r + 1;
    }
    std::vector<std::string> feature_names() const;
};

/// Streaming row builder shared by offline dataset construction and the
/// closed-loop runner, so both paths produce identical rows. In
/// transfer_function mode it owns the zero-initialized past-u ring buffer.
class FeatureAssembler {
public:
    explicit FeatureAssembler(FeatureSpec spec);

    /// Reference point for the difference transform at step t.
    double reference(double y_now, const Trajectory& y_d, int t) const;

    /// Input row at step t. y_d provides the r-step preview (end-held);
    /// x is only read in state_space mode.
    Eigen::VectorXd assemble(const Eigen::VectorXd& x, double y_now, const Trajectory& y_d,
                             int t) const;

    /// Maps the network output back to the plant reference (adds the
    /// difference reference back when active) and records it in the ring.
    double finalize(double net_output, double y_now, const Trajectory& y_d, int t);

    /// Records an externally chosen reference without reconstruction (used
    /// when replaying a log).
    void record(double u);

    const FeatureSpec& spec() const { return spec_; }

private:
    FeatureSpec spec_;
    std::vector<double> u_history_;  // newest first
};

/// Rows from a recorded run. The achieved output stands in for the desired
/// one (the run really produced y, so the inverse maps y(t+r) back to u(t));
/// boundary rows lacking a full preview or history window are dropped.
Dataset build_dataset(const RunLog& log, const FeatureSpec& spec);

/// Difference transform of already-built rows; the per-row reference is read
/// from the row itself (x1 in state_space mode, the y_d(t) slot in
/// transfer_function mode, both equal to y(t) on training rows).
Dataset apply_difference(const Dataset& raw, const FeatureSpec& spec);

/// One trajectory a sin(2 pi f T t) per (amplitude, frequency) pair, in the
/// given order.
std::vector<Trajectory> sinusoid_family(const std::vector<double>& amplitudes,
                                        const std::vector<double>& frequencies_hz, double T,
                                        int steps);

/// Exactly per_source rows drawn uniformly without replacement from each
/// source, deterministic for a fixed seed.
Dataset balanced_sample(const std::vector<Dataset>& sources, int per_source,
                        unsigned long long seed);

}  // namespace tracker
