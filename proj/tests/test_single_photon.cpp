#include <doctest.h>

#include <cmath>
#include <numbers>

#include "diode/single_photon.hpp"
#include "oracles.hpp"

using namespace diode;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario make(double d1, double d2, double theta, double omega = 0.01) {
    return validate(DiodeConfig{{d1, 1.0}, {d2, 1.0}, theta}, DriveConfig{Direction::LeftToRight, 0.1, omega});
}

}  // namespace

TEST_CASE("closed-form reflectivity at hand-evaluated points") {
    CHECK(reflectivity_closed_form(0.0, 0.0, kPi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(reflectivity_closed_form(1.0, 1.0, kPi) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(reflectivity_closed_form(1.0, -1.0, kPi) == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
    // a resonant atom reflects everything at any phase
    for (double d : {-1.7, 0.12, 2.0})
        for (double th : {0.3, 2.0, 2.0 * kPi * 0.982}) CHECK(reflectivity_closed_form(d, 0.0, th) == doctest::Approx(1.0));
}

TEST_CASE("closed form is symmetric under exchange of the detunings") {
    for (double d1 : {-2.0, -1.0, 0.0, 1.0, 2.0})
        for (double d2 : {-2.0, -1.0, 0.0, 1.0, 2.0})
            for (double th : {0.25 * kPi, 0.75 * kPi, 1.25 * kPi, 1.75 * kPi}) {
                const double r = reflectivity_closed_form(d1, d2, th);
                CHECK(std::abs(r - reflectivity_closed_form(d2, d1, th)) < 1e-12);
                CHECK(r >= 0.0);
                CHECK(r <= 1.0);
            }
}

TEST_CASE("closed form is undefined for co-located resonant atoms") {
    CHECK_THROWS_AS(reflectivity_closed_form(0.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(reflectivity_closed_form(0.0, 0.0, 2.0 * kPi), DomainError);
    CHECK_NOTHROW(reflectivity_closed_form(0.0, 0.0, 1e-3));
    CHECK_THROWS_AS(reflectivity_closed_form(std::nan(""), 0.0, 1.0), DomainError);
}

TEST_CASE("single-atom reflection") {
    CHECK(single_atom_reflection(0.0, 0.0) == 1.0);
    CHECK(single_atom_reflection(1.0, 0.0) == 0.5);
    CHECK(single_atom_reflection(0.0, 0.5) == 0.5);
    CHECK_THROWS_AS(single_atom_reflection(0.0, -1.0), DomainError);
}

TEST_CASE("an empty pulse leaves the atoms alone") {
    SinglePhotonOptions opts;
    opts.amplitude = 0.0;
    const auto res = integrate_amplitudes(make(0.3, -0.2, 1.0), opts);
    for (const auto& a : res.trajectory) {
        CHECK(a.c1 == std::complex<double>{});
        CHECK(a.c2 == std::complex<double>{});
    }
    CHECK(res.reflectivity.R == 0.0);
}

TEST_CASE("atom 1 responds linearly at early times") {
    const double omega = 0.01;
    const auto res = integrate_amplitudes(make(0.0, 0.0, kPi, omega));
    int checked = 0;
    for (const auto& a : res.trajectory) {
        if (a.t <= 0.0 || a.t > 5e-3) continue;
        CHECK(a.c1.real() == doctest::Approx(-std::sqrt(0.5 * omega) * a.t).epsilon(1e-2));
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("reflectivity record is well formed") {
    const auto res = integrate_amplitudes(make(0.7, -0.4, 2.0));
    const auto& rec = res.reflectivity;
    REQUIRE(rec.t.size() == rec.n_ref.size());
    for (std::size_t i = 1; i < rec.n_ref.size(); ++i) {
        CHECK(rec.t[i] > rec.t[i - 1]);
        CHECK(rec.n_ref[i] >= rec.n_ref[i - 1]);
    }
    CHECK(rec.R >= 0.0);
    CHECK(rec.R <= 1.0);
    CHECK(rec.R >= rec.n_ref.back());
    for (const auto& a : res.trajectory) CHECK(a.norm() <= 1.0 + 1e-9);
    CHECK(res.trajectory.back().norm() < 1e-10);
}

TEST_CASE("numeric reflectivity approaches the monochromatic limit") {
    CHECK(reflectivity_numeric(make(0.0, 0.0, kPi)) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(reflectivity_numeric(make(0.12, 0.0, 2.0 * kPi * 0.982)) ==
          doctest::Approx(reflectivity_closed_form(0.12, 0.0, 2.0 * kPi * 0.982)).epsilon(0.02));
    CHECK(reflectivity_numeric(make(1.0, 1.0, kPi)) == doctest::Approx(0.8).epsilon(0.02));
    CHECK(reflectivity_numeric(make(1.0, -1.0, kPi)) == doctest::Approx(8.0 / 9.0).epsilon(0.02));
}

TEST_CASE("numeric reflectivity is symmetric under exchange of the detunings") {
    CHECK(std::abs(reflectivity_numeric(make(1.0, -1.0, kPi)) - reflectivity_numeric(make(-1.0, 1.0, kPi))) < 1e-3);
}

TEST_CASE("discretised waveguide agrees with the amplitude equations") {
    const auto brute = oracle::waveguide_reflection(1.0, -1.0, kPi, 0.1,
                                                    oracle::WaveguideGrid{100.0, 0.05, 0.5, 1.0, 40.0, 0.008});
    CHECK(brute.reflected + brute.transmitted > 0.999);
    CHECK(brute.atoms < 1e-8);
    CHECK(reflectivity_numeric(make(1.0, -1.0, kPi, 0.1)) == doctest::Approx(brute.reflected).epsilon(0.02));
    CHECK(reflectivity_numeric(make(1.0, -1.0, kPi)) == doctest::Approx(brute.reflected).epsilon(0.02));
}

TEST_CASE("unequal couplings are rejected") {
    const Scenario s = validate(DiodeConfig{{0.0, 1.0}, {0.0, 0.5}, 1.0}, DriveConfig{});
    CHECK_THROWS_AS(reflectivity_numeric(s), SinglePhotonError);
}

TEST_CASE("a tail that never decays is reported") {
    SinglePhotonOptions opts;
    opts.max_time = 150.0;  // the pulse alone lasts 200
    CHECK_THROWS_AS(reflectivity_numeric(make(0.3, 0.0, 1.0), opts), SinglePhotonError);
}
