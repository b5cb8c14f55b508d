#include "diode/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace diode::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Difference between fifth- and fourth-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

std::string underflow_message(double t) {
    std::ostringstream os;
    os << "step size underflow at t = " << t;
    return os.str();
}

std::string tolerance_message(double t, std::size_t steps) {
    std::ostringstream os;
    os << "tolerance not achieved: step budget of " << steps << " exhausted at t = " << t;
    return os.str();
}

}  // namespace

StepSizeUnderflow::StepSizeUnderflow(double t)
    : std::runtime_error(underflow_message(t)), time_(t) {}

ToleranceNotAchieved::ToleranceNotAchieved(double t, std::size_t steps)
    : std::runtime_error(tolerance_message(t, steps)), time_(t) {}

void DenseStep::evaluate(double t, std::span<double> out) const {
    const double s = (t - t0_) / h_;
    const double s1 = 1.0 - s;
    for (std::size_t i = 0; i < y0_.size(); ++i) {
        out[i] = y0_[i] + s * (r1_[i] + s1 * (r2_[i] + s * (r3_[i] + s1 * r4_[i])));
    }
}

Integrator::Integrator(Rhs rhs, std::size_t dim, Options opts)
    : rhs_(std::move(rhs)), dim_(dim), opts_(opts), h_next_(opts.initial_step) {
    for (auto& k : k_) k.assign(dim, 0.0);
    ytmp_.assign(dim, 0.0);
    ynew_.assign(dim, 0.0);
}

Trajectory Integrator::integrate(double t0, double t1, std::span<const double> y0,
                                 std::span<const double> sample_times,
                                 const StepObserver& observer) {
    if (!(t1 > t0)) throw std::invalid_argument("integration end must follow its start");
    if (y0.size() != dim_) throw std::invalid_argument("initial state has wrong dimension");

    Trajectory traj;
    std::vector<double> y(y0.begin(), y0.end());
    traj.t.push_back(t0);
    traj.y.push_back(y);

    auto sample = sample_times.begin();
    while (sample != sample_times.end() && *sample <= t0) ++sample;

    DenseStep dense;
    dense.y0_.resize(dim_);
    dense.y1_.resize(dim_);
    dense.r1_.resize(dim_);
    dense.r2_.resize(dim_);
    dense.r3_.resize(dim_);
    dense.r4_.resize(dim_);

    auto& k1 = k_[0];
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    auto& k5 = k_[4];
    auto& k6 = k_[5];
    auto& k7 = k_[6];

    double t = t0;
    double h = std::min(h_next_, opts_.max_step);
    rhs_(t, y, k1);

    std::size_t steps = 0;
    while (t < t1) {
        if (steps++ >= opts_.max_steps) throw ToleranceNotAchieved(t, opts_.max_steps);

        bool last = false;
        const double h_unclipped = h;
        if (t + 1.01 * h >= t1) {
            h = t1 - t;
            last = true;
        }
        if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            throw StepSizeUnderflow(t);
        }

        for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y[i] + h * a21 * k1[i];
        rhs_(t + c2 * h, ytmp_, k2);
        for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs_(t + c3 * h, ytmp_, k3);
        for (std::size_t i = 0; i < dim_; ++i)
            ytmp_[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(t + c4 * h, ytmp_, k4);
        for (std::size_t i = 0; i < dim_; ++i)
            ytmp_[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs_(t + c5 * h, ytmp_, k5);
        for (std::size_t i = 0; i < dim_; ++i)
            ytmp_[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                   a65 * k5[i]);
        rhs_(t + h, ytmp_, k6);
        for (std::size_t i = 0; i < dim_; ++i)
            ynew_[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                   a76 * k6[i]);
        const double t_new = last ? t1 : t + h;
        rhs_(t_new, ynew_, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double scale =
                opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            err += (e / scale) * (e / scale);
        }
        err = std::sqrt(err / static_cast<double>(dim_));

        if (!std::isfinite(err)) {
            h *= kMinFactor;
            ++traj.rejected;
            continue;
        }

        const double factor =
            err == 0.0 ? kMaxFactor
                       : std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, kMaxFactor);

        if (err > 1.0) {
            h *= std::max(factor, kMinFactor);
            ++traj.rejected;
            continue;
        }

        dense.t0_ = t;
        dense.h_ = t_new - t;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double ydiff = ynew_[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            dense.y0_[i] = y[i];
            dense.y1_[i] = ynew_[i];
            dense.r1_[i] = ydiff;
            dense.r2_[i] = bspl;
            dense.r3_[i] = ydiff - h * k7[i] - bspl;
            dense.r4_[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                d6 * k6[i] + d7 * k7[i]);
        }

        while (sample != sample_times.end() && *sample <= t_new) {
            std::vector<double> ys(dim_);
            dense.evaluate(*sample, ys);
            traj.t.push_back(*sample);
            traj.y.push_back(std::move(ys));
            ++sample;
        }
        if (observer) observer(dense);

        t = t_new;
        y.swap(ynew_);
        k1.swap(k7);
        ++traj.accepted;

        if ((opts_.record_steps || t >= t1) && traj.t.back() != t) {
            traj.t.push_back(t);
            traj.y.push_back(y);
        }
        h = std::min(std::max(h * factor, last ? h_unclipped : 0.0), opts_.max_step);
        h_next_ = h;
    }
    return traj;
}

Trajectory integrate(const Rhs& rhs, double t0, double t1, std::span<const double> y0,
                     const Options& opts, std::span<const double> sample_times,
                     const StepObserver& observer) {
    Integrator integ(rhs, y0.size(), opts);
    return integ.integrate(t0, t1, y0, sample_times, observer);
}

}  // namespace diode::ode
