#include <doctest.h>

#include <cmath>
#include <vector>

#include "diode/ode.hpp"

using namespace diode;

TEST_CASE("exponential decay to tolerance") {
    auto rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
    const std::vector<double> y0{1.0};
    const auto traj = ode::integrate(rhs, 0.0, 10.0, y0);
    CHECK(traj.t.back() == 10.0);
    CHECK(traj.final_state()[0] == doctest::Approx(std::exp(-10.0)).epsilon(1e-7));
}

TEST_CASE("harmonic oscillator conserves energy and phase") {
    auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    const std::vector<double> y0{1.0, 0.0};
    const auto traj = ode::integrate(rhs, 0.0, 20.0, y0);
    CHECK(traj.final_state()[0] == doctest::Approx(std::cos(20.0)).epsilon(1e-7));
    CHECK(traj.final_state()[1] == doctest::Approx(-std::sin(20.0)).epsilon(1e-7));
}

TEST_CASE("dense samples match the exact solution") {
    auto rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = 1.0 - y[0]; };
    const std::vector<double> y0{0.0};
    const std::vector<double> samples{0.37, 1.0, 2.5, 4.999};
    ode::Options opts;
    opts.record_steps = false;
    const auto traj = ode::integrate(rhs, 0.0, 5.0, y0, opts, samples);
    REQUIRE(traj.t.size() == samples.size() + 2);  // start, samples, end
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(traj.t[i + 1] == samples[i]);
        CHECK(traj.y[i + 1][0] == doctest::Approx(1.0 - std::exp(-samples[i])).epsilon(1e-7));
    }
}

TEST_CASE("observer sees contiguous accepted steps") {
    auto rhs = [](double t, std::span<const double>, std::span<double> dy) { dy[0] = std::sin(t); };
    const std::vector<double> y0{0.0};
    double last = 0.0;
    std::size_t seen = 0;
    ode::Integrator integ(rhs, 1, {});
    const auto traj = integ.integrate(0.0, 3.0, y0, {}, [&](const ode::DenseStep& s) {
        CHECK(s.t0() == last);
        std::vector<double> mid(1);
        s.evaluate(0.5 * (s.t0() + s.t1()), mid);
        CHECK(mid[0] == doctest::Approx(1.0 - std::cos(0.5 * (s.t0() + s.t1()))).epsilon(1e-6));
        last = s.t1();
        ++seen;
    });
    CHECK(last == 3.0);
    CHECK(seen == traj.accepted);
}

TEST_CASE("step budget exhaustion is reported") {
    auto rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
    ode::Options opts;
    opts.max_steps = 3;
    const std::vector<double> y0{1.0};
    CHECK_THROWS_AS(ode::integrate(rhs, 0.0, 100.0, y0, opts), ode::ToleranceNotAchieved);
}

TEST_CASE("finite-time blow-up underflows the step size") {
    auto rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
    const std::vector<double> y0{1.0};
    try {
        ode::integrate(rhs, 0.0, 2.0, y0);
        FAIL("expected an exception");
    } catch (const ode::StepSizeUnderflow& e) {
        CHECK(e.time() == doctest::Approx(1.0).epsilon(1e-3));
    } catch (const ode::ToleranceNotAchieved&) {
    }
}

TEST_CASE("bad arguments") {
    auto rhs = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 0.0; };
    const std::vector<double> y0{1.0}, y2{1.0, 2.0};
    CHECK_THROWS_AS(ode::integrate(rhs, 1.0, 1.0, y0), std::invalid_argument);
    ode::Integrator integ(rhs, 1);
    CHECK_THROWS_AS(integ.integrate(0.0, 1.0, y2), std::invalid_argument);
}
