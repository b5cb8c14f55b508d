#include "diode/model.hpp"

#include <cmath>
#include <numbers>

namespace diode {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw ValidationError(std::string(name) + " must be finite");
    }
}

}  // namespace

Direction opposite(Direction d) {
    return d == Direction::LeftToRight ? Direction::RightToLeft : Direction::LeftToRight;
}

const char* to_string(Direction d) {
    return d == Direction::LeftToRight ? "left" : "right";
}

double wrap_phase(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    // fmod of a value just below a multiple of 2pi can round up to 2pi.
    if (r >= two_pi) r = 0.0;
    return r;
}

double Scenario::plateau_amplitude() const { return std::sqrt(drive.flux); }

double Scenario::mean_photon_number() const { return 2.0 * drive.flux / drive.bandwidth; }

Scenario validate(const DiodeConfig& diode, const DriveConfig& drive) {
    require_finite(diode.atom1.detuning, "delta1");
    require_finite(diode.atom2.detuning, "delta2");
    require_finite(diode.atom1.decay_rate, "gamma1");
    require_finite(diode.atom2.decay_rate, "gamma2");
    require_finite(diode.theta, "theta");
    require_finite(drive.flux, "flux");
    require_finite(drive.bandwidth, "bandwidth");

    if (diode.atom1.decay_rate < 0.0) throw ValidationError("gamma1 must be ≥ 0");
    if (diode.atom2.decay_rate < 0.0) throw ValidationError("gamma2 must be ≥ 0");
    if (diode.atom1.decay_rate == 0.0 && diode.atom2.decay_rate == 0.0) {
        throw ValidationError("no coupled atom: at least one decay rate must be > 0");
    }
    if (drive.flux < 0.0) throw ValidationError("flux must be ≥ 0");
    if (drive.bandwidth <= 0.0) throw ValidationError("bandwidth must be > 0");

    const double ref = diode.atom1.decay_rate > 0.0 ? diode.atom1.decay_rate
                                                     : diode.atom2.decay_rate;
    Scenario s;
    s.gamma_ref = ref;
    s.diode.atom1 = {diode.atom1.detuning / ref, diode.atom1.decay_rate / ref};
    s.diode.atom2 = {diode.atom2.detuning / ref, diode.atom2.decay_rate / ref};
    s.diode.theta = wrap_phase(diode.theta);
    s.theta1 = 0.5 * s.diode.theta;
    s.theta2 = 0.5 * s.diode.theta;
    s.drive.direction = drive.direction;
    s.drive.flux = drive.flux / ref;
    s.drive.bandwidth = drive.bandwidth / ref;
    s.monochromatic = s.drive.bandwidth <= kMonochromaticBandwidth;
    return s;
}

Scenario validate(const Scenario& s) {
    Scenario out = validate(s.diode, s.drive);
    out.gamma_ref *= s.gamma_ref;
    out.mirrored = s.mirrored;
    return out;
}

Scenario mirror(const Scenario& s) {
    Scenario m = s;
    std::swap(m.diode.atom1, m.diode.atom2);
    std::swap(m.theta1, m.theta2);
    m.drive.direction = opposite(s.drive.direction);
    m.mirrored = !s.mirrored;
    return m;
}

}  // namespace diode
