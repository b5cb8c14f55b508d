#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small dense systems.
//
// Embedded error estimate of order 4, local extrapolation to order 5 and the
// standard fourth-order continuous extension for dense output. The integrator
// lands exactly on the requested end time and reports samples at requested
// intermediate times through the dense interpolant.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace diode::ode {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct Options {
    double rtol = 1e-9;
    double atol = 1e-9;
    double initial_step = 1e-3;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;
    bool record_steps = true;  // keep every accepted step in the trajectory
};

class StepSizeUnderflow : public std::runtime_error {
public:
    explicit StepSizeUnderflow(double t);
    double time() const { return time_; }

private:
    double time_;
};

class ToleranceNotAchieved : public std::runtime_error {
public:
    ToleranceNotAchieved(double t, std::size_t steps);
    double time() const { return time_; }

private:
    double time_;
};

/// Interpolant over one accepted step [t0, t0 + h].
class DenseStep {
public:
    double t0() const { return t0_; }
    double t1() const { return t0_ + h_; }
    double h() const { return h_; }
    std::size_t size() const { return y0_.size(); }
    std::span<const double> y_begin() const { return y0_; }
    std::span<const double> y_end() const { return y1_; }

    void evaluate(double t, std::span<double> out) const;

private:
    friend class Integrator;
    double t0_ = 0.0;
    double h_ = 0.0;
    std::vector<double> y0_, y1_;
    std::vector<double> r1_, r2_, r3_, r4_;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<double>> y;
    std::size_t accepted = 0;
    std::size_t rejected = 0;

    const std::vector<double>& final_state() const { return y.back(); }
};

using StepObserver = std::function<void(const DenseStep&)>;

class Integrator {
public:
    Integrator(Rhs rhs, std::size_t dim, Options opts = {});

    /// Integrates from (t0, y0) to t1 > t0. `sample_times` (ascending, inside
    /// [t0, t1]) are added to the trajectory; `observer` sees every accepted step.
    Trajectory integrate(double t0, double t1, std::span<const double> y0,
                         std::span<const double> sample_times = {},
                         const StepObserver& observer = {});

    /// Step size proposed for the next call, carried over between segments.
    double next_step() const { return h_next_; }
    void set_next_step(double h) { h_next_ = h; }

private:
    Rhs rhs_;
    std::size_t dim_;
    Options opts_;
    double h_next_;
    std::vector<double> k_[7];
    std::vector<double> ytmp_, ynew_;
};

/// Convenience wrapper for a single integration with default construction.
Trajectory integrate(const Rhs& rhs, double t0, double t1, std::span<const double> y0,
                     const Options& opts = {}, std::span<const double> sample_times = {},
                     const StepObserver& observer = {});

}  // namespace diode::ode
