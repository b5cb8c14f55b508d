#include "diode/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace diode {

namespace {

constexpr cplx I{0.0, 1.0};

double re(cplx z) { return z.real(); }

std::string describe(const Scenario& s) {
    std::ostringstream os;
    os.precision(6);
    os << "delta1=" << s.delta1() << " delta2=" << s.delta2() << " gamma1=" << s.gamma1()
       << " gamma2=" << s.gamma2() << " theta=" << s.diode.theta << " flux=" << s.drive.flux;
    return os.str();
}

// Columns spanning the states in which one atom sits in its ground state and
// the other one is free: x = B y with y = (z+1, Re s, Im s) of the free atom.
Eigen::Matrix<double, kStateDim, 3> product_basis(int free_atom) {
    Eigen::Matrix<double, kStateDim, 3> B = Eigen::Matrix<double, kStateDim, 3>::Zero();
    if (free_atom == 0) {
        // atom 2 ground: zz = -z1, qmz = -s1
        B(0, 0) = 1.0;
        B(2, 0) = -1.0;
        B(3, 1) = 1.0;
        B(9, 1) = -1.0;
        B(4, 2) = 1.0;
        B(10, 2) = -1.0;
    } else {
        // atom 1 ground: zz = -z2, qzm = -s2
        B(1, 0) = 1.0;
        B(2, 0) = -1.0;
        B(5, 1) = 1.0;
        B(7, 1) = -1.0;
        B(6, 2) = 1.0;
        B(8, 2) = -1.0;
    }
    return B;
}

}  // namespace

StateVector pack(const CorrelatorState& x) {
    StateVector v;
    v << x.z1 + 1.0, x.z2 + 1.0, x.zz - 1.0, x.s1.real(), x.s1.imag(), x.s2.real(), x.s2.imag(),
        x.qzm.real(), x.qzm.imag(), x.qmz.real(), x.qmz.imag(), x.qpm.real(), x.qpm.imag(),
        x.qmm.real(), x.qmm.imag();
    return v;
}

CorrelatorState unpack(const StateVector& v) {
    CorrelatorState x;
    x.z1 = v(0) - 1.0;
    x.z2 = v(1) - 1.0;
    x.zz = v(2) + 1.0;
    x.s1 = {v(3), v(4)};
    x.s2 = {v(5), v(6)};
    x.qzm = {v(7), v(8)};
    x.qmz = {v(9), v(10)};
    x.qpm = {v(11), v(12)};
    x.qmm = {v(13), v(14)};
    return x;
}

CorrelatorState swap_atoms(const CorrelatorState& x) {
    CorrelatorState y;
    y.z1 = x.z2;
    y.z2 = x.z1;
    y.zz = x.zz;
    y.s1 = x.s2;
    y.s2 = x.s1;
    y.qzm = x.qmz;
    y.qmz = x.qzm;
    y.qpm = std::conj(x.qpm);
    y.qmm = x.qmm;
    return y;
}

double physicality_violation(const CorrelatorState& x) {
    double v = 0.0;
    auto bound = [&v](double value, double lo, double hi) {
        v = std::max({v, lo - value, value - hi});
    };
    bound(x.z1, -1.0, 1.0);
    bound(x.z2, -1.0, 1.0);
    bound(x.zz, -1.0, 1.0);
    v = std::max(v, std::norm(x.s1) - x.p1());
    v = std::max(v, std::norm(x.s2) - x.p2());
    bound(x.p12(), 0.0, std::min(x.p1(), x.p2()));
    return v;
}

bool is_physical(const CorrelatorState& x, double tol) {
    return physicality_violation(x) <= tol;
}

CorrelatorState rotating_rhs(const Scenario& s, const CorrelatorState& x, cplx drive) {
    const double g1 = s.gamma1();
    const double g2 = s.gamma2();
    const double d1 = s.delta1();
    const double d2 = s.delta2();
    const double G = std::sqrt(g1 * g2);
    const cplx p1 = std::polar(1.0, s.theta1);
    const cplx p2 = std::polar(1.0, s.theta2);
    // Drive seen by each atom; atom 2 is reached after the first leg.
    const cplx e1 = std::sqrt(g1) * drive;
    const cplx e2 = std::sqrt(g2) * drive * p1;

    CorrelatorState d;
    d.s1 = (I * d1 - g1) * x.s1 + G * p2 * x.qzm + e1 * x.z1;
    d.z1 = -2.0 * g1 * (x.z1 + 1.0) - 4.0 * G * re(p2 * x.qpm) - 4.0 * re(e1 * std::conj(x.s1));
    d.s2 = (I * d2 - g2) * x.s2 + G * p1 * x.qmz + e2 * x.z2;
    d.z2 = -2.0 * g2 * (x.z2 + 1.0) - 4.0 * G * re(p1 * std::conj(x.qpm)) -
           4.0 * re(e2 * std::conj(x.s2));
    d.qzm = (I * d2 - 2.0 * g1 - g2) * x.qzm - 2.0 * g1 * x.s2 - G * std::conj(p2) * x.s1 -
            G * (std::conj(p2) + p1) * x.qmz - 2.0 * (e1 * x.qpm + std::conj(e1) * x.qmm) +
            e2 * x.zz;
    d.qmz = (I * d1 - 2.0 * g2 - g1) * x.qmz - 2.0 * g2 * x.s1 - G * std::conj(p1) * x.s2 -
            G * (std::conj(p1) + p2) * x.qzm -
            2.0 * (e2 * std::conj(x.qpm) + std::conj(e2) * x.qmm) + e1 * x.zz;
    d.qpm = (I * (d2 - d1) - g1 - g2) * x.qpm + 0.5 * G * (x.z1 * std::conj(p2) + x.z2 * p1) +
            0.5 * G * x.zz * (p1 + std::conj(p2)) + std::conj(e1) * x.qzm +
            e2 * std::conj(x.qmz);
    d.qmm = (I * (d1 + d2) - g1 - g2) * x.qmm + e1 * x.qzm + e2 * x.qmz;
    d.zz = -2.0 * (g1 + g2) * x.zz - 2.0 * g2 * x.z1 - 2.0 * g1 * x.z2 +
           4.0 * G * re(x.qpm * (std::conj(p1) + p2)) - 4.0 * re(e1 * std::conj(x.qmz)) -
           4.0 * re(e2 * std::conj(x.qzm));
    return d;
}

CorrelatorState to_lab_frame(const Scenario& s, double t, const CorrelatorState& x) {
    const double d1 = s.delta1();
    const double d2 = s.delta2();
    CorrelatorState y = x;
    y.s1 = x.s1 * std::polar(1.0, -d1 * t);
    y.s2 = x.s2 * std::polar(1.0, -d2 * t);
    y.qzm = x.qzm * std::polar(1.0, -d2 * t);
    y.qmz = x.qmz * std::polar(1.0, -d1 * t);
    y.qpm = x.qpm * std::polar(1.0, (d1 - d2) * t);
    y.qmm = x.qmm * std::polar(1.0, -(d1 + d2) * t);
    return y;
}

CorrelatorState to_rotating_frame(const Scenario& s, double t, const CorrelatorState& x) {
    return to_lab_frame(s, -t, x);
}

CorrelatorState lab_frame_rhs(const Scenario& s, double t, const CorrelatorState& x, cplx drive) {
    const double g1 = s.gamma1();
    const double g2 = s.gamma2();
    const double G = std::sqrt(g1 * g2);
    const double d12 = s.delta1() - s.delta2();
    const cplx p1 = std::polar(1.0, s.theta1);
    const cplx p2 = std::polar(1.0, s.theta2);
    const cplx ph12 = std::polar(1.0, d12 * t);  // exp(i delta12 t)
    // Field operators acting on the coherent input: a_t -> eta xi exp(-i delta1 t).
    // Atom 2 sees the field one leg later; the delay itself is neglected.
    const cplx a1 = std::sqrt(g1) * drive * std::polar(1.0, -s.delta1() * t);
    const cplx a2 = std::sqrt(g2) * drive * std::polar(1.0, -s.delta1() * t) * p1 * ph12;

    CorrelatorState d;
    d.s1 = -g1 * x.s1 + G * std::conj(ph12) * p2 * x.qzm + a1 * x.z1;
    d.z1 = -2.0 * g1 * (x.z1 + 1.0) - 4.0 * G * re(x.qpm * std::conj(ph12) * p2) -
           4.0 * re(std::conj(x.s1) * a1);
    d.s2 = -g2 * x.s2 + G * x.qmz * ph12 * p1 + a2 * x.z2;
    d.z2 = -2.0 * g2 * (x.z2 + 1.0) - 4.0 * G * re(std::conj(x.qpm) * ph12 * p1) -
           4.0 * re(std::conj(x.s2) * a2);
    d.qzm = (-2.0 * g1 - g2) * x.qzm - 2.0 * g1 * x.s2 - G * x.s1 * ph12 * std::conj(p2) -
            G * x.qmz * ph12 * (std::conj(p2) + p1) -
            2.0 * (x.qpm * a1 + std::conj(a1) * x.qmm) + x.zz * a2;
    d.qmz = (-2.0 * g2 - g1) * x.qmz - 2.0 * g2 * x.s1 - G * x.s2 * std::conj(ph12) * std::conj(p1) -
            G * x.qzm * std::conj(ph12) * (std::conj(p1) + p2) -
            2.0 * (std::conj(x.qpm) * a2 + std::conj(a2) * x.qmm) + x.zz * a1;
    d.qpm = -(g1 + g2) * x.qpm + 0.5 * G * ph12 * (x.z1 * std::conj(p2) + x.z2 * p1) +
            0.5 * G * x.zz * ph12 * (p1 + std::conj(p2)) + std::conj(a1) * x.qzm +
            std::conj(x.qmz) * a2;
    d.qmm = -(g1 + g2) * x.qmm + x.qzm * a1 + x.qmz * a2;
    d.zz = -2.0 * (g1 + g2) * x.zz - 2.0 * g2 * x.z1 - 2.0 * g1 * x.z2 +
           4.0 * G * re(x.qpm * std::conj(ph12) * (std::conj(p1) + p2)) -
           4.0 * re(std::conj(x.qmz) * a1) - 4.0 * re(std::conj(x.qzm) * a2);
    return d;
}

LinearSystem assemble_system(const Scenario& s) {
    return assemble_system(s, cplx{s.plateau_amplitude(), 0.0});
}

LinearSystem assemble_system(const Scenario& s, cplx drive) {
    // The right-hand side is affine in the packed coordinates; probe it on
    // the origin and the unit vectors.
    auto f = [&](const StateVector& v) {
        const CorrelatorState dx = rotating_rhs(s, unpack(v), drive);
        StateVector out = pack(dx);
        // pack() shifts z and zz by the ground values; derivatives carry no offset.
        out(0) = dx.z1;
        out(1) = dx.z2;
        out(2) = dx.zz;
        return out;
    };
    LinearSystem sys;
    sys.b = f(StateVector::Zero());
    for (int k = 0; k < kStateDim; ++k) {
        sys.A.col(k) = f(StateVector::Unit(k)) - sys.b;
    }
    sys.coupled = {s.gamma1() > 0.0, s.gamma2() > 0.0};
    sys.label = describe(s);
    return sys;
}

namespace {

// LU's own estimate misses exact rank loss (e.g. a dark singlet), so use
// the singular values; the matrices are tiny.
template <class M>
double inverse_condition(const M& a) {
    const auto sv = Eigen::JacobiSVD<M>(a).singularValues();
    return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

}  // namespace

CorrelatorState steady_state(const LinearSystem& sys) {
    if (sys.b.isZero(0.0)) return CorrelatorState::ground();
    if (!sys.coupled[0] && !sys.coupled[1]) {
        throw SteadyStateError("no coupled atom (" + sys.label + ")");
    }

    StateVector x;
    if (sys.coupled[0] && sys.coupled[1]) {
        Eigen::PartialPivLU<StateMatrix> lu(sys.A);
        const double rcond = inverse_condition(sys.A);
        if (!(rcond * kMaxConditionNumber > 1.0)) {
            std::ostringstream os;
            os << "steady state is singular or ill-conditioned (condition estimate "
               << (rcond > 0.0 ? 1.0 / rcond : INFINITY) << ") for " << sys.label;
            throw SteadyStateError(os.str());
        }
        x = lu.solve(-sys.b);
    } else {
        const auto B = product_basis(sys.coupled[0] ? 0 : 1);
        const Eigen::Matrix3d reduced = B.transpose() * sys.A * B;
        Eigen::PartialPivLU<Eigen::Matrix3d> lu(reduced);
        if (!(inverse_condition(reduced) * kMaxConditionNumber > 1.0)) {
            throw SteadyStateError("single-atom steady state is singular for " + sys.label);
        }
        x = B * lu.solve(-B.transpose() * sys.b);
    }

    const double residual = (sys.A * x + sys.b).cwiseAbs().maxCoeff();
    if (!(residual < 1e-10)) {
        std::ostringstream os;
        os << "steady-state residual " << residual << " exceeds 1e-10 for " << sys.label;
        throw SteadyStateError(os.str());
    }
    CorrelatorState state = unpack(x);
    if (!is_physical(state, 1e-8)) {
        std::ostringstream os;
        os << "unphysical steady state (violation " << physicality_violation(state) << ") for "
           << sys.label;
        throw SteadyStateError(os.str());
    }
    return state;
}

TransientTrajectory integrate_transient(const LinearSystem& sys, const CorrelatorState& x0,
                                        double t_end, const TransientOptions& opts,
                                        std::span<const double> sample_times) {
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
    if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) {
        throw std::invalid_argument("tolerances must be > 0");
    }
    const StateMatrix A = sys.A;
    const StateVector b = sys.b;
    auto rhs = [&A, &b](double, std::span<const double> y, std::span<double> dy) {
        Eigen::Map<const StateVector> yv(y.data());
        Eigen::Map<StateVector> dv(dy.data());
        dv.noalias() = A * yv + b;
    };
    ode::Options o;
    o.rtol = opts.rtol;
    o.atol = opts.atol;
    o.initial_step = opts.initial_step;
    o.record_steps = opts.record_steps;

    const StateVector v0 = pack(x0);
    const auto traj = ode::integrate(rhs, 0.0, t_end, std::span<const double>(v0.data(), kStateDim),
                                     o, sample_times);
    TransientTrajectory out;
    out.t = traj.t;
    out.rejected = traj.rejected;
    out.states.reserve(traj.y.size());
    for (const auto& y : traj.y) out.states.push_back(unpack(Eigen::Map<const StateVector>(y.data())));
    return out;
}

TransientTrajectory integrate_pulse(const Scenario& s, double t_end, const TransientOptions& opts) {
    const double t_off = s.pulse_length();
    const LinearSystem on = assemble_system(s);
    const LinearSystem off = assemble_system(s, cplx{0.0, 0.0});

    auto first = integrate_transient(on, CorrelatorState::ground(), std::min(t_end, t_off), opts);
    if (t_end <= t_off) return first;

    auto second = integrate_transient(off, first.final_state(), t_end - t_off, opts);
    for (std::size_t i = 1; i < second.t.size(); ++i) {
        first.t.push_back(second.t[i] + t_off);
        first.states.push_back(second.states[i]);
    }
    first.rejected += second.rejected;
    return first;
}

double reflected_flux_fraction(const CorrelatorState& x, const Scenario& s) {
    const double flux = s.drive.flux;
    if (!(flux > 0.0)) {
        throw TransportError(
            "reflected fraction undefined at zero flux; use the single-photon reflectivity");
    }
    const double g1 = s.gamma1();
    const double g2 = s.gamma2();
    const cplx p2 = std::polar(1.0, s.theta2);
    const double rate = 0.5 * (g1 * (x.z1 + 1.0) + g2 * (x.z2 + 1.0)) +
                        2.0 * std::sqrt(g1 * g2) * re(x.qpm * p2);
    const double nb = rate / flux;
    if (!(nb >= -1e-6 && nb <= 1.0 + 1e-6)) {
        std::ostringstream os;
        os << "reflected fraction " << nb << " outside [0, 1] for " << describe(s);
        throw TransportError(os.str());
    }
    return std::clamp(nb, 0.0, 1.0);
}

TransportResult transport(const Scenario& s) {
    if (!(s.drive.flux > 0.0)) {
        throw TransportError("transport needs flux > 0; use the single-photon reflectivity");
    }
    const bool flip = s.drive.direction == Direction::RightToLeft;
    const Scenario sim = flip ? mirror(s) : s;

    const CorrelatorState x = steady_state(assemble_system(sim));
    TransportResult r;
    r.direction = s.drive.direction;
    r.Nb = reflected_flux_fraction(x, sim);
    r.T = 1.0 - r.Nb;
    r.steady_state = flip ? swap_atoms(x) : x;
    r.P1 = r.steady_state.p1();
    r.P2 = r.steady_state.p2();
    r.P12 = r.steady_state.p12();
    return r;
}

std::vector<ExcitationRow> excitation_curves(const Scenario& s, std::vector<double> flux_list) {
    std::sort(flux_list.begin(), flux_list.end());
    std::vector<ExcitationRow> rows;
    rows.reserve(2 * flux_list.size());
    for (double flux : flux_list) {
        if (!(flux > 0.0)) throw std::invalid_argument("flux values must be > 0");
        for (Direction dir : {Direction::LeftToRight, Direction::RightToLeft}) {
            Scenario point = s;
            point.drive.flux = flux;
            point.drive.direction = dir;
            const TransportResult t = transport(point);
            rows.push_back({flux, dir, t.P1, t.P2, t.P12});
        }
    }
    return rows;
}

}  // namespace diode
