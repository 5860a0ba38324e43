#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ssmdelay/errors.hpp"
#include "ssmdelay/solver.hpp"
#include "ssmdelay/systems.hpp"

using namespace ssmdelay;

namespace {

DelaySystem pure_delay(double coeff, double tau) {
    DelaySystem sys;
    sys.n = 1;
    sys.tau_max = tau;
    sys.discrete_delays = {tau};
    sys.rhs = [coeff](double, const Eigen::VectorXd&,
                      const std::vector<Eigen::VectorXd>& delayed,
                      const Eigen::VectorXd&, Eigen::VectorXd& out) {
        out(0) = coeff * delayed[0](0);
    };
    return sys;
}

Eigen::VectorXd scalar(double v) {
    Eigen::VectorXd x(1);
    x(0) = v;
    return x;
}

}  // namespace

TEST_CASE("snap_step finds the largest commensurate step") {
    CHECK(snap_step(0.01, {1.5, 2.0}) == doctest::Approx(0.01).epsilon(1e-12));
    const double dt = snap_step(0.007, {1.5, 2.0});
    CHECK(dt <= 0.007 + 1e-15);
    CHECK(std::abs(std::round(1.5 / dt) * dt - 1.5) < 1e-12);
    CHECK(std::abs(std::round(2.0 / dt) * dt - 2.0) < 1e-12);
    CHECK(dt == doctest::Approx(1.5 / 216).epsilon(1e-12));
    CHECK(snap_step(0.05, {}) == 0.05);
    // No commensurate step exists for an irrational delay ratio.
    CHECK_THROWS_AS(snap_step(0.01, {1.0, M_PI}), ConfigError);
}

TEST_CASE("equilibrium history stays at the fixed point") {
    auto sys = build_system("hutchinson");
    auto res = simulate(sys, HistorySpec::constant(scalar(0.0)), 20.0, 0.01);
    CHECK(res.trajectory.samples.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("method-of-steps closed form for xdot = -x(t-1)") {
    auto sys = pure_delay(-1.0, 1.0);
    auto res = simulate(sys, HistorySpec::constant(scalar(1.0)), 2.0, 0.01);
    const auto& traj = res.trajectory;
    const int i1 = static_cast<int>(std::llround(1.0 / traj.dt));
    const int i2 = static_cast<int>(std::llround(2.0 / traj.dt));
    CHECK(std::abs(traj.samples(i1, 0)) < 1e-9);
    CHECK(std::abs(traj.samples(i2, 0) - (-0.5)) < 1e-9);
}

TEST_CASE("self-convergence of the Hutchinson run at refined step") {
    auto sys = build_system("hutchinson");
    const auto h = HistorySpec::constant(scalar(-0.5));  // x = 9.5 unshifted
    auto coarse = simulate(sys, h, 100.0, 1e-3);
    auto fine = simulate(sys, h, 100.0, 1e-4);
    const double amp = fine.trajectory.samples.cwiseAbs().maxCoeff();
    CHECK(testutil::sup_diff_on_coarse(coarse.trajectory, fine.trajectory) <
          1e-6 * amp);
}

TEST_CASE("halving dt gains at least 8x on smooth intervals") {
    auto sys = build_system("hutchinson");
    const auto h = HistorySpec::constant(scalar(0.3));
    auto ref = simulate(sys, h, 12.0, 0.02 / 10.0);
    auto c1 = simulate(sys, h, 12.0, 0.02);
    auto c2 = simulate(sys, h, 12.0, 0.01);
    // Skip the first few delay intervals so kink-induced error has decayed.
    const double e1 = testutil::sup_diff_on_coarse(c1.trajectory, ref.trajectory, 5.0);
    auto ref2 = simulate(sys, h, 12.0, 0.01 / 10.0);
    const double e2 = testutil::sup_diff_on_coarse(c2.trajectory, ref2.trajectory, 5.0);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("semigroup property: restart from stored history") {
    auto sys = build_system("hutchinson");
    const auto h = HistorySpec::constant(scalar(0.2));
    auto full = simulate(sys, h, 13.0, 0.01);
    auto first = simulate(sys, h, 7.0, 0.01);
    auto second = simulate(sys, first.final_history, 6.0, 0.01);
    double worst = 0.0;
    const int offset = static_cast<int>(std::llround(7.0 / full.dt));
    for (int i = 0; i < second.trajectory.size(); ++i)
        worst = std::max(worst, std::abs(full.trajectory.samples(offset + i, 0) -
                                         second.trajectory.samples(i, 0)));
    CHECK(worst < 1e-9);
}

TEST_CASE("blow-up raises DivergedError with a time") {
    auto sys = pure_delay(+4.0, 0.5);  // strongly unstable
    bool thrown = false;
    try {
        simulate(sys, HistorySpec::constant(scalar(1.0)), 50.0, 0.01);
    } catch (const DivergedError& e) {
        thrown = true;
        CHECK(e.blowup_time() > 0.0);
        CHECK(e.blowup_time() < 50.0);
    }
    CHECK(thrown);
}

TEST_CASE("distributed Cushing: equilibrium and vanishing kernel") {
    auto sys = build_system("cushing");
    auto res = simulate_distributed(sys, HistorySpec::constant(scalar(0.0)), 30.0, 0.01);
    CHECK(res.trajectory.samples.cwiseAbs().maxCoeff() < 1e-14);

    // Kernel identically zero reduces to xdot = a (x - sin x).
    auto free_sys = build_system("cushing");
    free_sys.distributed->kernel = [](double) { return 0.0; };
    free_sys.distributed->constant_kernel = false;
    auto run = simulate_distributed(free_sys, HistorySpec::constant(scalar(0.8)), 5.0, 1e-3);
    // Reference: delay-free RK4 at a finer step.
    double x = 0.8;
    const double hstep = 1e-4;
    auto f = [](double v) { return v - std::sin(v); };
    for (int i = 0; i < 50000; ++i) {
        const double k1 = f(x);
        const double k2 = f(x + 0.5 * hstep * k1);
        const double k3 = f(x + 0.5 * hstep * k2);
        const double k4 = f(x + hstep * k3);
        x += hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(std::abs(run.trajectory.samples(run.trajectory.size() - 1, 0) - x) < 1e-8);
}

TEST_CASE("Cushing direct and lifted forms agree") {
    auto direct = build_system("cushing");
    auto lifted = build_system("cushing-lifted");
    const double tau = 1.0, dt = 5e-4, t_end = 50.0;

    auto run_pair = [&](const HistorySpec& xh) {
        auto dres = simulate_distributed(direct, xh, t_end, dt);
        // Lifted z(0) = integral of the history; z rows never enter delayed.
        double z0 = 0.0;
        Eigen::MatrixXd xs;
        if (xh.kind == HistorySpec::Kind::Constant) {
            z0 = xh.value(0) * tau;
            const int m = static_cast<int>(std::llround(tau / dt));
            xs = Eigen::MatrixXd::Constant(m + 1, 1, xh.value(0));
        } else {
            xs = xh.samples;
            for (int i = 0; i + 1 < xs.rows(); ++i)
                z0 += 0.5 * (xs(i, 0) + xs(i + 1, 0)) * dt;
        }
        Eigen::MatrixXd h2(xs.rows(), 2);
        h2.col(0) = xs.col(0);
        h2.col(1).setConstant(z0);
        auto lres = simulate(lifted, HistorySpec::sampled(h2, dt), t_end, dt);
        double worst = 0.0;
        for (int i = 0; i < dres.trajectory.size(); ++i)
            worst = std::max(worst, std::abs(dres.trajectory.samples(i, 0) -
                                             lres.trajectory.samples(i, 0)));
        return worst;
    };

    CHECK(run_pair(HistorySpec::constant(scalar(0.1))) < 1e-6);

    testutil::Rng rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        auto xh = testutil::random_smooth_history(rng, tau, dt, 0.1);
        CHECK(run_pair(xh) < 1e-6);
    }
}

TEST_CASE("ZOH closed loop approaches the continuous limit") {
    const double a = 1.0, p = 3.0;
    auto sys = micro_chaos_toy(a, p, 0.0, 1e-3, 0);
    auto res = simulate_digital(sys, 0.0, HistorySpec::constant(scalar(1.0)), 5.0, 1e-3);
    double worst = 0.0;
    for (int i = 0; i < res.trajectory.size(); ++i) {
        const double t = res.trajectory.time(i);
        worst = std::max(worst,
                         std::abs(res.trajectory.samples(i, 0) - std::exp((a - p) * t)));
    }
    CHECK(worst < 5e-3);  // O(sample_dt)
}

TEST_CASE("open loop grows at rate a") {
    const double a = 0.8;
    auto sys = micro_chaos_toy(a, 0.0, 0.0, 0.02, 1);
    auto res = simulate_digital(sys, 0.0, HistorySpec::constant(scalar(1e-3)), 10.0, 0.002);
    const auto& traj = res.trajectory;
    const double slope = (std::log(std::abs(traj.samples(traj.size() - 1, 0))) -
                          std::log(std::abs(traj.samples(0, 0)))) /
                         traj.t_end();
    CHECK(std::abs(slope - a) / a < 0.01);
}

TEST_CASE("micro-chaos orbit bounded by the exact map's range") {
    const double a = 1.0, p = 1.2, res_q = 0.01, Dt = 0.02;
    const int r = 1;
    auto orbit = micro_chaos_exact_orbit(a, p, res_q, Dt, r, 0.3, 200000);
    double map_max = 0.0;
    for (double v : orbit) map_max = std::max(map_max, std::abs(v));
    CHECK(map_max < 1e3);  // bounded micro-chaotic regime

    auto sys = micro_chaos_toy(a, p, res_q, Dt, r);
    auto sim = simulate_digital(sys, res_q, HistorySpec::constant(scalar(0.3)), 200.0, 0.002);
    const double sim_max = sim.trajectory.samples.cwiseAbs().maxCoeff();
    CHECK(sim_max <= map_max * std::exp(a * Dt) * 1.05 + res_q);
}

TEST_CASE("stroboscopic sampling") {
    Trajectory traj;
    traj.t0 = 0.0;
    traj.dt = 0.1;
    traj.samples.resize(10, 1);
    for (int i = 0; i < 10; ++i) traj.samples(i, 0) = i;

    auto same = stroboscopic_sample(traj, 0.1, 0.0);
    CHECK(same.size() == traj.size());
    CHECK((same.samples - traj.samples).cwiseAbs().maxCoeff() == 0.0);

    auto half = stroboscopic_sample(traj, 0.2, 0.0);
    REQUIRE(half.size() == 5);
    for (int j = 0; j < 5; ++j) CHECK(half.samples(j, 0) == 2 * j);

    CHECK_THROWS_AS(stroboscopic_sample(traj, 0.15, 0.0), ConfigError);
}

TEST_CASE("stroboscopic ZOH run equals the exact micro-chaos map") {
    const double a = 1.0, p = 1.2, res_q = 0.01, Dt = 0.02;
    const int r = 1;
    const double x0 = 0.3;
    auto sys = micro_chaos_toy(a, p, res_q, Dt, r);
    auto sim = simulate_digital(sys, res_q, HistorySpec::constant(scalar(x0)), 8.0, Dt / 20.0);
    auto strobe = stroboscopic_sample(sim.trajectory, Dt, 0.0);
    auto orbit = micro_chaos_exact_orbit(a, p, res_q, Dt, r, x0, strobe.size() - 1);
    double worst = 0.0;
    for (int j = 0; j < strobe.size(); ++j)
        worst = std::max(worst, std::abs(strobe.samples(j, 0) - orbit[j]));
    CHECK(worst < 1e-8);
}
