#include "diode/single_photon.hpp"

#include <cmath>
#include <sstream>

#include "diode/ode.hpp"

namespace diode {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

// Composite Simpson rule over samples arriving one at a time on a uniform grid.
class SimpsonAccumulator {
public:
    explicit SimpsonAccumulator(double h) : h_(h) {}

    void add(double f) {
        if (count_ == 0) {
            f0_ = f;
        } else if (count_ % 2 == 1) {
            f1_ = f;
        } else {
            closed_ += h_ / 3.0 * (f0_ + 4.0 * f1_ + f);
            f0_ = f;
        }
        ++count_;
    }

    /// Integral over the samples up to the last even index.
    double closed() const { return closed_; }

    /// Integral over all samples; a trailing odd interval uses the trapezoid rule.
    double total() const {
        if (count_ >= 2 && count_ % 2 == 0) return closed_ + 0.5 * h_ * (f0_ + f1_);
        return closed_;
    }

    std::size_t count() const { return count_; }

private:
    double h_;
    std::size_t count_ = 0;
    double f0_ = 0.0, f1_ = 0.0;
    double closed_ = 0.0;
};

}  // namespace

AmplitudeResult integrate_amplitudes(const Scenario& s, const SinglePhotonOptions& opts) {
    if (s.gamma1() != s.gamma2()) {
        throw SinglePhotonError("single-photon amplitudes need equal decay rates");
    }
    const double g = s.gamma1();
    const double d1 = s.delta1();
    const double d2 = s.delta2();
    const cplx p1 = std::polar(1.0, s.theta1);
    const cplx p2 = std::polar(1.0, s.theta2);
    const cplx carrier = std::polar(1.0, 0.5 * s.diode.theta);  // pulse phase at atom 2
    const double t_off = s.pulse_length();
    const double xi = std::sqrt(0.5 * s.drive.bandwidth) * opts.amplitude;
    const double root_g = std::sqrt(g);

    // y = (Re c1, Im c1, Re c2, Im c2)
    auto make_rhs = [=](double pulse) {
        return [=](double, std::span<const double> y, std::span<double> dy) {
            const cplx c1{y[0], y[1]};
            const cplx c2{y[2], y[3]};
            const cplx dc1 = I * d1 * c1 - g * (c1 + c2 * p2) - root_g * pulse;
            const cplx dc2 = I * d2 * c2 - g * (c2 + c1 * p1) - root_g * carrier * pulse;
            dy[0] = dc1.real();
            dy[1] = dc1.imag();
            dy[2] = dc2.real();
            dy[3] = dc2.imag();
        };
    };
    auto emitted = [&](std::span<const double> y) {
        const cplx c1{y[0], y[1]};
        const cplx c2{y[2], y[3]};
        return g * std::norm(c1 + c2 * p2);
    };

    AmplitudeResult result;
    auto& rec = result.reflectivity;
    const double hq = opts.quadrature_step;
    SimpsonAccumulator simpson(hq);
    std::size_t next_k = 0;
    std::array<double, 4> yq{};

    auto observer = [&](const ode::DenseStep& step) {
        for (;; ++next_k) {
            const double tk = static_cast<double>(next_k) * hq;
            if (tk > step.t1()) break;
            step.evaluate(tk, yq);
            simpson.add(emitted(yq));
        }
        rec.t.push_back(step.t1());
        rec.n_ref.push_back(simpson.closed());
        if (opts.record_trajectory) {
            const auto y = step.y_end();
            result.trajectory.push_back({step.t1(), {y[0], y[1]}, {y[2], y[3]}});
        }
    };

    ode::Options o;
    o.rtol = opts.rtol;
    o.atol = opts.atol;
    o.record_steps = false;

    std::array<double, 4> y{};
    result.trajectory.push_back({0.0, {}, {}});
    rec.t.push_back(0.0);
    rec.n_ref.push_back(0.0);

    ode::Integrator pulse_on(make_rhs(xi), 4, o);
    auto traj = pulse_on.integrate(0.0, t_off, y, {}, observer);
    std::copy(traj.final_state().begin(), traj.final_state().end(), y.begin());

    ode::Integrator pulse_off(make_rhs(0.0), 4, o);
    pulse_off.set_next_step(pulse_on.next_step());
    double t = t_off;
    auto norm = [&y] { return y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]; };
    while (true) {
        const double t_next = t + opts.tail_padding;
        traj = pulse_off.integrate(t, t_next, y, {}, observer);
        std::copy(traj.final_state().begin(), traj.final_state().end(), y.begin());
        t = t_next;
        if (norm() < opts.tail_threshold) break;
        if (t >= opts.max_time) {
            std::ostringstream os;
            os << "atomic excitation did not decay: |c1|^2+|c2|^2 = " << norm() << " at t = " << t
               << " (threshold " << opts.tail_threshold << ")";
            throw SinglePhotonError(os.str());
        }
    }
    rec.R = simpson.total();
    return result;
}

double reflectivity_numeric(const Scenario& s, const SinglePhotonOptions& opts) {
    SinglePhotonOptions o = opts;
    o.record_trajectory = false;
    return integrate_amplitudes(s, o).reflectivity.R;
}

double reflectivity_closed_form(double delta1, double delta2, double theta) {
    if (!std::isfinite(delta1) || !std::isfinite(delta2) || !std::isfinite(theta)) {
        throw DomainError("reflectivity needs finite detunings and phase");
    }
    if (delta1 == 0.0 && delta2 == 0.0 && wrap_phase(theta) == 0.0) {
        throw DomainError("co-located resonant atoms (delta1 = delta2 = 0, theta = 0): reflectivity undefined");
    }
    const double ch = std::cos(0.5 * theta);
    const double sh = std::sin(0.5 * theta);
    const double n1 = (delta1 + delta2) * ch + 2.0 * sh;
    const double n2 = (delta2 - delta1) * sh;
    const double m1 = delta1 * delta2 - 1.0 + std::cos(theta);
    const double m2 = delta1 + delta2 + std::sin(theta);
    const double den = m1 * m1 + m2 * m2;
    if (!(den > 0.0)) {
        throw DomainError("reflectivity undefined: vanishing denominator");
    }
    return std::min(1.0, (n1 * n1 + n2 * n2) / den);
}

double single_atom_reflection(double delta, double flux) {
    if (!std::isfinite(delta) || !std::isfinite(flux)) {
        throw DomainError("single-atom reflection needs finite input");
    }
    if (flux < 0.0) throw DomainError("flux must be ≥ 0");
    return 1.0 / (1.0 + delta * delta + 2.0 * flux);
}

}  // namespace diode
