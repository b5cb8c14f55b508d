#pragma once

// Scattering of a single-photon square pulse on the diode.
//
// In the single-excitation sector the field amplitudes can be integrated out
// exactly (flat coupling, Markov limit), leaving two coupled amplitude
// equations for the atoms. The reflected photon number follows from the
// emitted amplitude into the backward mode.

#include <complex>
#include <stdexcept>
#include <vector>

#include "diode/model.hpp"

namespace diode {

class SinglePhotonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Atomic excitation amplitudes in the frame rotating with the carrier.
struct AmplitudeState {
    double t = 0.0;
    std::complex<double> c1{};
    std::complex<double> c2{};

    double norm() const { return std::norm(c1) + std::norm(c2); }
};

struct ReflectivityRecord {
    double R = 0.0;
    std::vector<double> t;      // sample times
    std::vector<double> n_ref;  // reflected photon number up to t, non-decreasing
};

struct SinglePhotonOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double quadrature_step = 1e-2;  // uniform resampling grid for the emitted flux
    double tail_padding = 20.0;     // minimum integration time after the pulse
    double tail_threshold = 1e-10;  // |c1|^2 + |c2|^2 below which the tail is done
    double max_time = 1e6;          // give up on the tail beyond this time
    double amplitude = 1.0;         // scales the pulse; 1 is one photon
    bool record_trajectory = true;
};

struct AmplitudeResult {
    std::vector<AmplitudeState> trajectory;
    ReflectivityRecord reflectivity;
};

/// Integrates the amplitude equations under the square pulse and accumulates
/// the reflected photon number. Requires equal decay rates.
AmplitudeResult integrate_amplitudes(const Scenario& s, const SinglePhotonOptions& opts = {});

/// Reflected photon number once the atoms have returned to the ground state.
double reflectivity_numeric(const Scenario& s, const SinglePhotonOptions& opts = {});

/// Monochromatic reflectivity of the equal-coupling pair; detunings in units
/// of the decay rate. Throws DomainError at delta1 = delta2 = 0, theta = 0
/// (mod 2pi), where the expression is 0/0.
double reflectivity_closed_form(double delta1, double delta2, double theta);

/// Reflection of a coherent drive on a single atom: 1 / (1 + delta^2 + 2 flux).
double single_atom_reflection(double delta, double flux);

}  // namespace diode
