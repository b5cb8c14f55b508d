#include "diode/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "diode/coherent.hpp"

namespace diode {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_axis(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw ValidationError(std::string(name) + " axis is empty");
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!std::isfinite(axis[i])) throw ValidationError(std::string(name) + " axis has non-finite value");
        if (i > 0 && !(axis[i] > axis[i - 1]))
            throw ValidationError(std::string(name) + " axis must be strictly increasing");
    }
}

Scenario point_scenario(const Scenario& base, double delta, double theta, double flux) {
    DiodeConfig d = base.diode;
    d.atom1.detuning = delta;
    d.theta = theta;
    DriveConfig drive = base.drive;
    drive.direction = Direction::LeftToRight;
    drive.flux = flux;
    return validate(d, drive);
}

void mark_failed(SweepRow& r, const char* what) {
    r.T_fwd = r.T_bwd = r.L = kNaN;
    r.P1_L = r.P2_L = r.P12_L = r.P1_R = r.P2_R = r.P12_R = kNaN;
    r.error = what;
    if (r.error.empty()) r.error = "unknown failure";
}

}  // namespace

double efficiency(double t_fwd, double t_bwd) {
    const double sum = t_fwd + t_bwd;
    if (sum == 0.0) return 0.0;
    return std::abs(t_fwd - t_bwd) / sum * t_fwd;
}

void check_grid(const SweepGrid& grid) {
    check_axis(grid.delta_axis, "delta");
    check_axis(grid.theta_axis, "theta");
    check_axis(grid.flux_axis, "flux");
    if (grid.flux_axis.front() <= 0.0) throw ValidationError("flux axis must be positive");
}

SweepRow evaluate_point(const Scenario& base, double delta, double theta, double flux) {
    SweepRow r;
    r.delta = delta;
    r.theta = theta;
    r.flux = flux;
    try {
        const Scenario fwd = point_scenario(base, delta, theta, flux);
        Scenario bwd = fwd;
        bwd.drive.direction = Direction::RightToLeft;
        const TransportResult left = transport(fwd);
        const TransportResult right = transport(bwd);
        r.T_fwd = left.T;
        r.T_bwd = right.T;
        r.L = efficiency(left.T, right.T);
        r.P1_L = left.P1;
        r.P2_L = left.P2;
        r.P12_L = left.P12;
        r.P1_R = right.P1;
        r.P2_R = right.P2;
        r.P12_R = right.P12;
    } catch (const std::exception& e) {
        mark_failed(r, e.what());
    }
    return r;
}

SweepTable sweep_map(const Scenario& base, const SweepGrid& grid, const SweepOptions& opts) {
    check_grid(grid);
    const std::size_t nd = grid.delta_axis.size();
    const std::size_t nt = grid.theta_axis.size();
    SweepTable table(grid.size());
    parallel_for(table.size(), opts.threads, [&](std::size_t i) {
        const std::size_t it = i % nt;
        const std::size_t id = (i / nt) % nd;
        const std::size_t iflux = i / (nt * nd);
        table[i] = evaluate_point(base, grid.delta_axis[id], grid.theta_axis[it], grid.flux_axis[iflux]);
    });
    return table;
}

SweepTable sweep_power(const Scenario& base, double delta, double theta,
                       const std::vector<double>& flux_axis, const SweepOptions& opts) {
    return sweep_map(base, SweepGrid{{delta}, {theta}, flux_axis}, opts);
}

std::vector<GammaRow> gamma_ratio_scan(const Scenario& base, double delta, double theta,
                                       double flux, const std::vector<double>& ratios,
                                       const SweepOptions& opts) {
    for (double r : ratios)
        if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("gamma ratios must be > 0");
    std::vector<GammaRow> rows(ratios.size());
    parallel_for(rows.size(), opts.threads, [&](std::size_t i) {
        Scenario s = base;
        s.diode.atom1.decay_rate = 1.0;
        s.diode.atom2.decay_rate = ratios[i];
        const SweepRow p = evaluate_point(s, delta, theta, flux);
        rows[i] = {ratios[i], p.T_fwd, p.T_bwd, p.L, p.error};
    });
    return rows;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("log axis endpoints must be > 0");
    auto v = linspace(std::log10(a), std::log10(b), n);
    for (auto& x : v) x = std::pow(10.0, x);
    if (n > 0) v.front() = a;
    if (n > 1) v.back() = b;
    return v;
}

std::vector<double> phase_axis(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return v;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace diode
