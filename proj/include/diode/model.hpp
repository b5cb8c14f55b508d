#pragma once

// Physical parameters of the two-atom waveguide diode.
//
// All quantities are dimensionless: rates, detunings, fluxes and bandwidths are
// measured in units of a reference decay rate gamma_ref, times in 1/gamma_ref.
// The atom met first by light travelling left-to-right is "atom 1".

#include <stdexcept>
#include <string>

namespace diode {

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct AtomParams {
    double detuning = 0.0;    // drive frequency minus atomic transition frequency
    double decay_rate = 1.0;  // coupling into the waveguide (amplitude damping rate)

    bool operator==(const AtomParams&) const = default;
};

struct DiodeConfig {
    AtomParams atom1;  // left atom
    AtomParams atom2;  // right atom
    double theta = 0.0;  // round-trip propagation phase between the atoms

    bool operator==(const DiodeConfig&) const = default;
};

enum class Direction { LeftToRight, RightToLeft };

Direction opposite(Direction d);
const char* to_string(Direction d);

struct DriveConfig {
    Direction direction = Direction::LeftToRight;
    double flux = 0.1;        // mean photon flux |alpha|^2
    double bandwidth = 0.01;  // Omega; square pulse of length 2/Omega

    bool operator==(const DriveConfig&) const = default;
};

/// Bandwidths above this value (in gamma_ref) leave the monochromatic regime.
inline constexpr double kMonochromaticBandwidth = 0.1;

/// A scenario that passed validation: canonical units, theta in [0, 2pi),
/// both atoms initially in the ground state.
///
/// After `mirror` the simulated light still enters from the left; `direction`
/// records which physical incidence the scenario represents and `mirrored`
/// records whether the atom labels were swapped to get there.
struct Scenario {
    DiodeConfig diode;
    DriveConfig drive;
    double theta1 = 0.0;  // phase picked up between the atoms, first leg
    double theta2 = 0.0;  // second leg; theta1 + theta2 == theta
    double gamma_ref = 1.0;  // physical value of the unit rate
    bool monochromatic = true;
    bool mirrored = false;

    bool operator==(const Scenario&) const = default;

    double delta1() const { return diode.atom1.detuning; }
    double delta2() const { return diode.atom2.detuning; }
    double gamma1() const { return diode.atom1.decay_rate; }
    double gamma2() const { return diode.atom2.decay_rate; }

    /// Complex drive amplitude eta * xi on the pulse plateau; |.|^2 == flux.
    double plateau_amplitude() const;
    /// Mean photon number of the whole square pulse, |eta|^2 = 2 flux / Omega.
    double mean_photon_number() const;
    double pulse_length() const { return 2.0 / drive.bandwidth; }
};

/// Checks raw inputs and expresses them in units of gamma_ref.
///
/// gamma_ref is atom 1's decay rate, or atom 2's when atom 1 is uncoupled.
/// Throws ValidationError for negative rates or flux, non-positive bandwidth,
/// non-finite input or a diode with no coupled atom.
Scenario validate(const DiodeConfig& diode, const DriveConfig& drive);

/// Re-validates an existing scenario (idempotent on canonical data).
Scenario validate(const Scenario& s);

/// Swaps the atoms so that the opposite incidence can be simulated with light
/// entering from the left. theta is unchanged; the direction flag flips.
Scenario mirror(const Scenario& s);

/// Reduces an angle into [0, 2pi).
double wrap_phase(double theta);

}  // namespace diode
