#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "tracker/errors.hpp"
#include "tracker/sysid.hpp"

using namespace tracker;

namespace {

RunLog unit_step_log(const LtiStateSpace& sys, int horizon) {
    const Trajectory step = Trajectory::constant(1.0, horizon, 1.0);
    RunLog log = simulate(sys, step, Eigen::VectorXd::Zero(sys.n()));
    log.y_d = step;
    return log;
}

}  // namespace

TEST_CASE("relative_degree_lti on the shipped systems") {
    CHECK(relative_degree_lti(sim_stable_system()) == 1);
    CHECK(relative_degree_lti(sim_unstable_system()) == 1);

    // Degree-two case: numerator degree n-2 means c b = 0 but c A b != 0.
    const TransferFunctionModel padded({0.0, 0.15, -0.8}, {-0.2, 1.0});
    const LtiStateSpace sys = tf_to_ss(padded);
    CHECK(std::abs(sys.c * sys.b) < 1e-15);
    CHECK(std::abs(sys.c * sys.A * sys.b) > 1e-12);
    CHECK(relative_degree_lti(sys) == 2);
}

TEST_CASE("relative_degree_lti degenerate cases") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2) * 0.5;
    Eigen::VectorXd b(2);
    b << 0.0, 1.0;
    Eigen::RowVectorXd c(2);
    c << 0.0, 0.0;
    CHECK_THROWS_AS(relative_degree_lti(LtiStateSpace(A, b, c)), ContractViolation);
    c << 1.0, 1.0;
    CHECK_THROWS_AS(relative_degree_lti(LtiStateSpace(A, b, c), -1.0), ContractViolation);
}

TEST_CASE("relative_degree_from_step agrees with the matrix test") {
    CHECK(relative_degree_from_step(unit_step_log(sim_stable_system(), 50)) == 1);

    const Trajectory step = Trajectory::constant(1.0, 50, 0.02);
    RunLog pend = simulate(make_pendulum(), step, Eigen::VectorXd::Zero(2));
    pend.y_d = step;
    CHECK(relative_degree_from_step(pend) == 2);

    RunLog silent;
    silent.u = silent.y = silent.y_d = Trajectory::constant(0.0, 40, 1.0);
    silent.u = Trajectory::constant(1.0, 40, 1.0);
    CHECK_THROWS_AS(relative_degree_from_step(silent), ContractViolation);
}

TEST_CASE("agreement property over seeded random stable systems") {
    std::mt19937_64 eng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(eng() % 6);
        const int r = 1 + static_cast<int>(eng() % static_cast<unsigned long long>(n));
        const LtiStateSpace sys = tf_to_ss(testsupport::random_stable_tf(eng, n, r));
        const int from_matrix = relative_degree_lti(sys, 1e-9);
        const int from_step = relative_degree_from_step(unit_step_log(sys, n + 20), 1e-6);
        CHECK(from_matrix == from_step);
        CHECK(from_matrix == r);
    }
}

TEST_CASE("dc_gain: values, equivalence and the integrator error") {
    CHECK(dc_gain(sim_stable_system()) == doctest::Approx(16.0 / 7.0).epsilon(1e-12));
    CHECK(dc_gain(sim_unstable_system()) == doctest::Approx(-18.0 / 7.0).epsilon(1e-12));
    CHECK(dc_gain(TransferFunctionModel({0.0}, {1.0})) == doctest::Approx(1.0));

    Eigen::MatrixXd A(1, 1);
    A << 1.0;  // pole at z = 1
    Eigen::VectorXd b(1);
    b << 1.0;
    Eigen::RowVectorXd c(1);
    c << 1.0;
    CHECK_THROWS_AS(dc_gain(LtiStateSpace(A, b, c)), ContractViolation);
    CHECK_THROWS_AS(dc_gain(TransferFunctionModel({-1.0, 0.0}, {1.0})), ContractViolation);

    std::mt19937_64 eng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(eng() % 6);
        const int r = 1 + static_cast<int>(eng() % static_cast<unsigned long long>(n));
        const LtiStateSpace sys = tf_to_ss(testsupport::random_stable_tf(eng, n, r));
        CHECK(std::abs(dc_gain(sys) - dc_gain(ss_to_tf(sys))) < 1e-10);
    }
}

TEST_CASE("zeros of the shipped systems and the residual bound") {
    const auto stable_zeros = zeros(ss_to_tf(sim_stable_system()));
    REQUIRE(stable_zeros.size() == 1);
    CHECK(std::abs(stable_zeros[0] - std::complex<double>(0.2, 0.0)) < 1e-12);

    const auto unstable_zeros = zeros(ss_to_tf(sim_unstable_system()));
    REQUIRE(unstable_zeros.size() == 1);
    CHECK(std::abs(unstable_zeros[0] - std::complex<double>(1.002, 0.0)) < 1e-9);

    CHECK(zeros(TransferFunctionModel({0.1, 0.2}, {3.0})).empty());

    std::mt19937_64 eng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 5);
        const TransferFunctionModel tf = testsupport::random_stable_tf(eng, n, 1);
        std::vector<double> monic = tf.beta;
        for (double& v : monic) v /= tf.leading_beta();
        for (const auto& z : zeros(tf)) CHECK(std::abs(poly_eval(monic, z)) < 1e-8);
    }
}

TEST_CASE("minimum phase verdicts, including the near-unit-circle band") {
    bool warn = false;
    CHECK(is_minimum_phase(zeros(ss_to_tf(sim_stable_system())), &warn));
    CHECK_FALSE(warn);
    CHECK_FALSE(is_minimum_phase(zeros(ss_to_tf(sim_unstable_system())), &warn));
    CHECK_FALSE(warn);  // 1.002 is outside the 1e-6 band

    CHECK_FALSE(is_minimum_phase({{1.0 + 5e-7, 0.0}}, &warn));
    CHECK(warn);
    CHECK_FALSE(is_minimum_phase({{1.0 - 5e-7, 0.0}}, &warn));
    CHECK(warn);
}

TEST_CASE("step_steady_state_error") {
    const TransferFunctionModel unity =
        testsupport::with_unity_dc(ss_to_tf(sim_stable_system()));
    CHECK(step_steady_state_error(unit_step_log(tf_to_ss(unity), 400), 0.25) < 1e-6);

    CHECK(step_steady_state_error(unit_step_log(sim_stable_system(), 400), 0.25) ==
          doctest::Approx(9.0 / 7.0).epsilon(1e-6));

    // Reference-scaled demo plant: half the unit step survives as offset.
    PendulumParams scaled;
    scaled.reference_gain = 0.5;
    const Trajectory step = Trajectory::constant(1.0, 800, 0.02);
    RunLog log = simulate(make_pendulum(scaled), step, Eigen::VectorXd::Zero(2));
    log.y_d = step;
    CHECK(step_steady_state_error(log, 0.25) == doctest::Approx(0.5).epsilon(1e-6));

    CHECK_THROWS_AS(step_steady_state_error(unit_step_log(sim_stable_system(), 400), 0.0),
                    ContractViolation);
    CHECK_THROWS_AS(step_steady_state_error(unit_step_log(sim_stable_system(), 20), 0.25),
                    ContractViolation);
}

TEST_CASE("identify produces the spec verdicts and valid JSON") {
    const SysIdReport report = identify(sim_stable_system());
    CHECK(report.relative_degree == 1);
    CHECK(report.dc_gain == doctest::Approx(16.0 / 7.0));
    CHECK(report.minimum_phase);
    CHECK_FALSE(report.difference_learning_eligible);

    const nlohmann::json j = nlohmann::json::parse(report.to_json());
    CHECK(j.at("relative_degree") == 1);
    CHECK(j.at("minimum_phase") == true);
    CHECK(j.at("zeros").size() == 1);
    CHECK(j.at("zeros")[0].at("re") == doctest::Approx(0.2));

    CHECK_FALSE(identify(sim_unstable_system()).minimum_phase);
}
