#include <doctest.h>

#include <cmath>
#include <numbers>

#include "diode/coherent.hpp"
#include "diode/sweep.hpp"

using namespace diode;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario base(double d2 = 0.0, double g2 = 1.0) {
    return validate(DiodeConfig{{0.12, 1.0}, {d2, g2}, 2.0 * kPi * 0.982}, DriveConfig{});
}

bool same_bits(const SweepRow& a, const SweepRow& b) {
    auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return eq(a.delta, b.delta) && eq(a.theta, b.theta) && eq(a.flux, b.flux) && eq(a.T_fwd, b.T_fwd) &&
           eq(a.T_bwd, b.T_bwd) && eq(a.L, b.L) && eq(a.P1_L, b.P1_L) && eq(a.P2_L, b.P2_L) &&
           eq(a.P12_L, b.P12_L) && eq(a.P1_R, b.P1_R) && eq(a.P2_R, b.P2_R) && eq(a.P12_R, b.P12_R) &&
           a.error == b.error;
}

}  // namespace

TEST_CASE("efficiency") {
    CHECK(efficiency(1.0, 0.0) == 1.0);
    CHECK(efficiency(0.37, 0.37) == 0.0);
    CHECK(efficiency(0.8, 0.2) == doctest::Approx(0.48));
    CHECK(efficiency(0.0, 0.0) == 0.0);
    CHECK(efficiency(0.2, 0.8) == doctest::Approx(0.12));
}

TEST_CASE("axes") {
    const auto l = linspace(-2.0, 2.0, 81);
    CHECK(l.size() == 81);
    CHECK(l.front() == -2.0);
    CHECK(l.back() == 2.0);
    CHECK(l[40] == 0.0);
    const auto g = logspace(1e-6, 1e2, 60);
    CHECK(g.front() == 1e-6);
    CHECK(g.back() == 1e2);
    CHECK(g[1] / g[0] == doctest::Approx(std::pow(1e8, 1.0 / 59.0)));
    const auto p = phase_axis(4);
    CHECK(p[0] == 0.0);
    CHECK(p[2] == doctest::Approx(kPi));
    CHECK(p.back() < 2.0 * kPi);
}

TEST_CASE("3x3 grid gives nine rows in lexicographic order") {
    const SweepGrid grid{{-1.0, 0.5, 1.0}, {0.5, 1.0, 3.0}, {0.1}};
    const auto table = sweep_map(base(), grid);
    REQUIRE(table.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(table[i].delta == grid.delta_axis[i / 3]);
        CHECK(table[i].theta == grid.theta_axis[i % 3]);
        CHECK(table[i].ok());
    }
}

TEST_CASE("flux is the slowest axis") {
    const SweepGrid grid{{-1.0, 1.0}, {1.0, 2.0}, {0.01, 1.0}};
    const auto table = sweep_map(base(), grid);
    REQUIRE(table.size() == 8);
    CHECK(table[3].flux == 0.01);
    CHECK(table[4].flux == 1.0);
    CHECK(table[4].delta == -1.0);
    CHECK(table[4].theta == 1.0);
}

TEST_CASE("rows equal standalone calls bit for bit") {
    const Scenario s = base(0.3);
    const SweepGrid grid{{-1.0, 0.2}, {0.7, 4.0}, {0.05, 2.0}};
    const auto table = sweep_map(s, grid, SweepOptions{3});
    for (const auto& r : table) {
        CHECK(same_bits(r, evaluate_point(s, r.delta, r.theta, r.flux)));
        Scenario one = validate(DiodeConfig{{r.delta, 1.0}, {0.3, 1.0}, r.theta},
                                DriveConfig{Direction::LeftToRight, r.flux, 0.01});
        CHECK(transport(one).T == r.T_fwd);
        one.drive.direction = Direction::RightToLeft;
        CHECK(transport(one).T == r.T_bwd);
    }
}

TEST_CASE("worker count does not change the table") {
    const SweepGrid grid{linspace(-2.0, 2.0, 9), phase_axis(9), {0.1}};
    const auto one = sweep_map(base(), grid, SweepOptions{1});
    const auto many = sweep_map(base(), grid, SweepOptions{5});
    REQUIRE(one.size() == many.size());
    for (std::size_t i = 0; i < one.size(); ++i) CHECK(same_bits(one[i], many[i]));
}

TEST_CASE("values stay in range and symmetric rows do not rectify") {
    const SweepGrid grid{linspace(-2.0, 2.0, 9), phase_axis(8), {0.1, 3.0}};
    const auto table = sweep_map(base(0.5), grid);
    for (const auto& r : table) {
        if (!r.ok()) continue;
        for (double v : {r.T_fwd, r.T_bwd, r.L, r.P1_L, r.P2_L, r.P12_L, r.P1_R, r.P2_R, r.P12_R}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        if (r.delta == 0.5) CHECK(r.L == 0.0);
    }
}

TEST_CASE("failed points are marked in place") {
    const SweepGrid grid{{-1.0, 0.0}, {0.0, 1.0}, {0.1}};
    const auto table = sweep_map(base(0.0), grid);
    REQUIRE(table.size() == 4);
    CHECK(table[0].ok());
    CHECK(table[1].ok());
    CHECK_FALSE(table[2].ok());  // both atoms resonant at zero separation
    CHECK(std::isnan(table[2].T_fwd));
    CHECK(std::isnan(table[2].L));
    CHECK(table[2].delta == 0.0);
    CHECK(table[3].ok());
}

TEST_CASE("bad grids are rejected") {
    CHECK_THROWS_AS(sweep_map(base(), SweepGrid{{1.0, 0.0}, {0.0}, {0.1}}), ValidationError);
    CHECK_THROWS_AS(sweep_map(base(), SweepGrid{{}, {0.0}, {0.1}}), ValidationError);
    CHECK_THROWS_AS(sweep_map(base(), SweepGrid{{0.0}, {0.0}, {0.0}}), ValidationError);
    CHECK_THROWS_AS(sweep_power(base(), 0.12, 1.0, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(gamma_ratio_scan(base(), 0.12, 1.0, 0.1, {1.0, -2.0}), ValidationError);
}

TEST_CASE("power sweep rows follow the flux axis") {
    const auto flux = logspace(1e-3, 10.0, 7);
    const auto table = sweep_power(base(), 0.12, 2.0 * kPi * 0.982, flux);
    REQUIRE(table.size() == flux.size());
    for (std::size_t i = 0; i < flux.size(); ++i) CHECK(table[i].flux == flux[i]);
}

TEST_CASE("gamma ratio scan") {
    const double th = 2.0 * kPi * 0.982;
    const auto rows = gamma_ratio_scan(base(), 0.12, th, 0.1, {0.25, 1.0, 4.0});
    REQUIRE(rows.size() == 3);
    const SweepRow equal = evaluate_point(base(), 0.12, th, 0.1);
    CHECK(rows[1].T_fwd == equal.T_fwd);
    CHECK(rows[1].T_bwd == equal.T_bwd);
    CHECK(rows[1].L == equal.L);

    SUBCASE("swapping the atoms and inverting the ratio mirrors the transmittances") {
        for (double r : {0.25, 0.5, 2.0, 4.0}) {
            const auto a = gamma_ratio_scan(base(0.0), 0.12, th, 0.1, {r});
            // atom (0.12, 1) | atom (0, r) seen from the other side and measured in units of r
            const auto b = gamma_ratio_scan(base(0.12 / r), 0.0, th, 0.1 / r, {1.0 / r});
            CHECK(a[0].T_fwd == doctest::Approx(b[0].T_bwd).epsilon(1e-10));
            CHECK(a[0].T_bwd == doctest::Approx(b[0].T_fwd).epsilon(1e-10));
        }
    }
}
