#pragma once

// Coherent-state drive of the two-atom diode.
//
// The Heisenberg equations for the atomic operators close on nine expectation
// values once the incoming coherent field acts on its eigenstate as a scalar.
// In a frame rotating at the drive frequency the resulting system is affine
// and time independent while the square pulse is on:
//
//     dx/dt = A x + b.
//
// Real coordinates are measured from the both-ground state, in the order
//
//     0  z1 + 1        5  Re s2      10  Im qmz
//     1  z2 + 1        6  Im s2      11  Re qpm
//     2  zz - 1        7  Re qzm     12  Im qpm
//     3  Re s1         8  Im qzm     13  Re qmm
//     4  Im s1         9  Re qmz     14  Im qmm
//
// so the ground state packs to the zero vector and b vanishes without drive.

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diode/model.hpp"
#include "diode/ode.hpp"

namespace diode {

using cplx = std::complex<double>;

inline constexpr int kStateDim = 15;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Atomic expectation values. Coherences are taken in the rotating frame.
struct CorrelatorState {
    double z1 = -1.0;  // <sz1>
    double z2 = -1.0;  // <sz2>
    double zz = 1.0;   // <sz1 sz2>
    cplx s1{};         // <s-1>
    cplx s2{};         // <s-2>
    cplx qzm{};        // <sz1 s-2>
    cplx qmz{};        // <s-1 sz2>
    cplx qpm{};        // <s+1 s-2>
    cplx qmm{};        // <s-1 s-2>

    static CorrelatorState ground() { return {}; }

    double p1() const { return 0.5 * (1.0 + z1); }
    double p2() const { return 0.5 * (1.0 + z2); }
    double p12() const { return 0.25 * (1.0 + z1 + z2 + zz); }

    bool operator==(const CorrelatorState&) const = default;
};

StateVector pack(const CorrelatorState& x);
CorrelatorState unpack(const StateVector& v);

/// Relabels atom 1 <-> atom 2.
CorrelatorState swap_atoms(const CorrelatorState& x);

/// Largest amount by which `x` violates the bounds of a two-qubit state
/// (populations, coherence magnitudes, joint excitation); 0 when physical.
double physicality_violation(const CorrelatorState& x);
bool is_physical(const CorrelatorState& x, double tol);

/// Time derivative of the rotating-frame correlators for a constant drive
/// amplitude `drive` (eta * xi) at atom 1. Affine in `x`.
CorrelatorState rotating_rhs(const Scenario& s, const CorrelatorState& x, cplx drive);

/// Correlators with the explicit phases of the interaction picture reinstated,
/// i.e. without the rotating-frame factors.
CorrelatorState to_lab_frame(const Scenario& s, double t, const CorrelatorState& rotating);
CorrelatorState to_rotating_frame(const Scenario& s, double t, const CorrelatorState& lab);

/// Time derivative in the interaction picture, with the explicit
/// exp(+-i delta t) factors of the operator equations.
CorrelatorState lab_frame_rhs(const Scenario& s, double t, const CorrelatorState& lab, cplx drive);

struct LinearSystem {
    StateMatrix A = StateMatrix::Zero();
    StateVector b = StateVector::Zero();
    std::array<bool, 2> coupled{true, true};  // gamma_j > 0
    std::string label;  // parameters, for diagnostics
};

/// Builds A and b on the pulse plateau, drive amplitude sqrt(flux).
LinearSystem assemble_system(const Scenario& s);
/// Same, for an arbitrary drive amplitude at atom 1.
LinearSystem assemble_system(const Scenario& s, cplx drive);

class SteadyStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kMaxConditionNumber = 1e12;

/// Solves A x + b = 0 by LU with partial pivoting, after checking the
/// condition number against kMaxConditionNumber. An uncoupled atom stays in
/// its ground state; the solve is then restricted to that invariant subspace.
/// Throws SteadyStateError when the system is singular or ill-conditioned, or
/// the solution fails its residual or physicality checks.
CorrelatorState steady_state(const LinearSystem& sys);

struct TransientOptions {
    double rtol = 1e-9;
    double atol = 1e-9;
    double initial_step = 1e-3;
    bool record_steps = true;
};

struct TransientTrajectory {
    std::vector<double> t;
    std::vector<CorrelatorState> states;
    std::size_t rejected = 0;

    const CorrelatorState& final_state() const { return states.back(); }
};

/// Integrates dx/dt = A x + b from x0 at t = 0 to t_end.
/// The trajectory holds accepted steps plus `sample_times`.
TransientTrajectory integrate_transient(const LinearSystem& sys, const CorrelatorState& x0,
                                        double t_end, const TransientOptions& opts = {},
                                        std::span<const double> sample_times = {});

/// Integrates the scenario under the full square pulse: drive on for
/// 0 <= t <= 2/Omega, off afterwards. Starts from the ground state.
TransientTrajectory integrate_pulse(const Scenario& s, double t_end,
                                    const TransientOptions& opts = {});

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rate of photons scattered backwards divided by the input flux.
/// Throws TransportError for zero flux or a value outside [0, 1] beyond 1e-6.
double reflected_flux_fraction(const CorrelatorState& x, const Scenario& s);

struct TransportResult {
    Direction direction = Direction::LeftToRight;
    double T = 0.0;   // transmittance
    double Nb = 0.0;  // reflected fraction
    CorrelatorState steady_state;  // in the unmirrored atom labeling
    double P1 = 0.0, P2 = 0.0, P12 = 0.0;
};

/// Steady-state transport for the scenario's incidence direction.
/// Right incidence is simulated on the mirrored diode.
TransportResult transport(const Scenario& s);

struct ExcitationRow {
    double flux = 0.0;
    Direction direction = Direction::LeftToRight;
    double P1 = 0.0, P2 = 0.0, P12 = 0.0;
};

/// Excitation probabilities for each flux and both directions, ordered by
/// flux and then left before right.
std::vector<ExcitationRow> excitation_curves(const Scenario& s, std::vector<double> flux_list);

}  // namespace diode
