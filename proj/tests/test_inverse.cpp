#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "tracker/errors.hpp"
#include "tracker/inverse.hpp"
#include "tracker/sysid.hpp"

using namespace tracker;

TEST_CASE("exact_inverse_ss: hand-computed references for the stable system") {
    const LtiStateSpace sys = sim_stable_system();
    const SsInverse inverse(sys, 1);
    CHECK(inverse.cAr()(0) == doctest::Approx(-0.15).epsilon(1e-15));
    CHECK(inverse.cAr()(1) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(inverse.markov() == doctest::Approx(1.0));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    CHECK(exact_inverse_ss(sys, 1, x, 1.0) == doctest::Approx(1.0));
    CHECK(exact_inverse_ss(sys, 1, x, 0.0) == 0.0);
    x << 1.0, 1.0;
    CHECK(exact_inverse_ss(sys, 1, x, 0.0) == doctest::Approx(-0.45).epsilon(1e-15));
}

TEST_CASE("exactness: the inverse pins y(t+r) to the preview for random plants") {
    std::mt19937_64 eng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(eng() % 6);
        const int r = 1 + static_cast<int>(eng() % static_cast<unsigned long long>(n));
        const LtiStateSpace sys = tf_to_ss(testsupport::random_stable_tf(eng, n, r));
        const SsInverse inverse(sys, r);
        const Trajectory y_d = testsupport::random_trajectory(eng, 200 + r);

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        std::vector<double> outputs;
        for (int t = 0; t < 200; ++t) {
            outputs.push_back(sys.c * x);
            x = sys.A * x + sys.b * inverse(x, y_d.at_clamped(t + r));
        }
        for (int t = r; t < 200; ++t) CHECK(std::abs(outputs[static_cast<size_t>(t)] - y_d[t]) < 1e-9);
    }
}

TEST_CASE("exact_inverse_tf: steady fixed point equals the inverse DC gain") {
    const TransferFunctionModel tf = ss_to_tf(sim_stable_system());
    const std::vector<double> yd_window{1.0, 1.0, 1.0};
    const std::vector<double> u_history{0.4375};
    CHECK(exact_inverse_tf(tf, yd_window, u_history) == doctest::Approx(0.4375).epsilon(1e-15));

    const std::vector<double> zeros_window{0.0, 0.0, 0.0};
    const std::vector<double> zero_history{0.0};
    CHECK(exact_inverse_tf(tf, zeros_window, zero_history) == 0.0);

    CHECK_THROWS_AS(exact_inverse_tf(tf, yd_window, zeros_window), ContractViolation);
}

TEST_CASE("exact_inverse_tf reproduces the reference that generated a run") {
    const LtiStateSpace sys = sim_stable_system();
    std::mt19937_64 eng(9);
    const Trajectory u_seq = testsupport::random_trajectory(eng, 150);
    const RunLog log = simulate(sys, u_seq, Eigen::VectorXd::Zero(2));

    TfInverseContext context(ss_to_tf(sys));
    for (int t = 0; t < 150 - 1; ++t) {
        const double u = context.step(log.y, t);  // the achieved output plays y_d
        CHECK(std::abs(u - u_seq[t]) < 1e-9);
    }
}

TEST_CASE("state-space and transfer-function inverses agree from rest") {
    std::mt19937_64 eng(77);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 1 + static_cast<int>(eng() % 6);
        const int r = 1 + static_cast<int>(eng() % static_cast<unsigned long long>(n));
        const TransferFunctionModel tf = testsupport::random_stable_tf(eng, n, r);
        const LtiStateSpace sys = tf_to_ss(tf);
        const SsInverse ss_inverse(sys, r);
        TfInverseContext tf_inverse(tf);
        const Trajectory y_d = testsupport::random_trajectory(eng, 200 + r);

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int t = 0; t < 200; ++t) {
            const double u_ss = ss_inverse(x, y_d.at_clamped(t + r));
            const double u_tf = tf_inverse.step(y_d, t);
            CHECK(std::abs(u_ss - u_tf) < 1e-9);
            x = sys.A * x + sys.b * u_ss;
        }
    }
}

TEST_CASE("difference form: bias term and reconstruction identity") {
    const TransferFunctionModel tf = ss_to_tf(sim_stable_system());

    auto [du0, s0] = exact_inverse_diff(tf, std::vector<double>{0, 0, 0}, std::vector<double>{0},
                                        1.0);
    CHECK(s0 == doctest::Approx(-0.45).epsilon(1e-12));
    CHECK(du0 == 0.0);
    auto [du1, s1] = exact_inverse_diff(tf, std::vector<double>{0, 0, 0}, std::vector<double>{0},
                                        2.0);
    CHECK(s1 == doctest::Approx(-0.9).epsilon(1e-12));
    (void)du1;

    // Unity DC gain kills the absolute-level term for every reference value.
    const TransferFunctionModel unity = testsupport::with_unity_dc(tf);
    CHECK(std::abs(difference_bias_coefficient(unity)) < 1e-12);

    // Reconstruction: delta_u + s + y_d(t) equals the undifferenced law.
    std::mt19937_64 eng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(eng() % 5);
        const int r = 1 + static_cast<int>(eng() % static_cast<unsigned long long>(n));
        const TransferFunctionModel random_tf = testsupport::random_stable_tf(eng, n, r);
        std::vector<double> yd_window(static_cast<size_t>(n) + 1);
        for (double& v : yd_window) v = testsupport::uniform(eng, -2.0, 2.0);
        std::vector<double> u_history(static_cast<size_t>(n - r));
        for (double& v : u_history) v = testsupport::uniform(eng, -2.0, 2.0);

        const double yd_now = yd_window[static_cast<size_t>(r)];
        std::vector<double> delta_yd = yd_window, delta_u = u_history;
        for (double& v : delta_yd) v -= yd_now;
        for (double& v : delta_u) v -= yd_now;

        const auto [delta_out, s_term] = exact_inverse_diff(random_tf, delta_yd, delta_u, yd_now);
        const double direct = exact_inverse_tf(random_tf, yd_window, u_history);
        CHECK(std::abs(delta_out + s_term + yd_now - direct) < 1e-12);
    }
}

TEST_CASE("affine nonlinear inverse: linear specialization and identity plant") {
    const LtiStateSpace sys = sim_stable_system();
    const SsInverse reference(sys, 1);
    const Eigen::RowVectorXd cA = reference.cAr();
    const double cb = reference.markov();

    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(2);
        x << testsupport::uniform(eng, -2, 2), testsupport::uniform(eng, -2, 2);
        const double yd = testsupport::uniform(eng, -2, 2);
        const double via_affine = exact_inverse_affine_nonlinear(
            [&](const Eigen::VectorXd& s) { return double(cA * s); },
            [&](const Eigen::VectorXd&) { return cb; }, x, yd);
        CHECK(std::abs(via_affine - exact_inverse_ss(sys, 1, x, yd)) < 1e-14);
    }

    const double passthrough = exact_inverse_affine_nonlinear(
        [](const Eigen::VectorXd&) { return 0.0; }, [](const Eigen::VectorXd&) { return 1.0; },
        Eigen::VectorXd::Zero(1), 3.25);
    CHECK(passthrough == 3.25);

    CHECK_THROWS_AS(exact_inverse_affine_nonlinear([](const Eigen::VectorXd&) { return 0.0; },
                                                   [](const Eigen::VectorXd&) { return 0.0; },
                                                   Eigen::VectorXd::Zero(1), 1.0),
                    ContractViolation);
}

TEST_CASE("pendulum: analytic inverse tracks exactly over 200 steps") {
    PendulumParams params;
    const NonlinearSystem pend = make_pendulum(params);
    std::mt19937_64 eng(21);
    Trajectory y_d = testsupport::random_trajectory(eng, 220, 0.02);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    std::vector<double> outputs;
    for (int t = 0; t < 200; ++t) {
        const double u = exact_inverse_affine_nonlinear(
            [&](const Eigen::VectorXd& s) { return params.hhat(s); },
            [&](const Eigen::VectorXd& s) { return params.input_sensitivity(s); }, x,
            y_d.at_clamped(t + 2));
        outputs.push_back(pend.h(x));
        x = pend.f(x) + pend.g(x) * u;
    }
    for (int t = 2; t < 200; ++t) CHECK(std::abs(outputs[static_cast<size_t>(t)] - y_d[t]) < 1e-9);
}

TEST_CASE("lemma 1 algebra: zero bias coefficient exactly at unity DC gain") {
    std::mt19937_64 eng(2718);
    int unity_count = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(eng() % 6);
        const int r = 1 + static_cast<int>(eng() % static_cast<unsigned long long>(n));
        TransferFunctionModel tf = testsupport::random_stable_tf(eng, n, r);
        if (trial % 2 == 0) {
            tf = testsupport::with_unity_dc(tf);
            ++unity_count;
        }
        const bool identity_holds = std::abs(difference_bias_coefficient(tf)) < 1e-10;
        const bool unity_gain = std::abs(dc_gain(tf) - 1.0) < 1e-10;
        CHECK(identity_holds == unity_gain);
    }
    CHECK(unity_count == 50);
}

TEST_CASE("driving the non-minimum-phase plant with its own inverse blows up") {
    const LtiStateSpace sys = sim_unstable_system();
    const SsInverse inverse(sys, 1);
    Trajectory y_d;
    y_d.period = 1.0;
    for (int t = 0; t < 6001; ++t)
        y_d.values.push_back(std::sin(2.0 * M_PI * t / 15.0) +
                             std::cos(2.0 * M_PI * t / 12.0) - 1.0);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    int first_crossing = -1;
    for (int t = 0; t < 6000; ++t) {
        const double u = inverse(x, y_d[t + 1]);
        const double y = sys.c * x;
        if (std::abs(u) > 1e3 || std::abs(y) > 1e3) {
            first_crossing = t;
            break;
        }
        x = sys.A * x + sys.b * u;
    }
    // The internal state of the inverse grows like 1.002^t; the reference
    // passes 1e3 shortly before step 4000 on this trajectory.
    REQUIRE(first_crossing > 0);
    CHECK(first_crossing < 4500);
    MESSAGE("inverse-driven |u| or |y| first exceeds 1e3 at step ", first_crossing);
}
