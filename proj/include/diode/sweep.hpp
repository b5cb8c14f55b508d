#pragma once

// Rectification efficiency and grid sweeps over the coherent-drive model.
//
// Grid points are independent; they are evaluated on a pool of workers and
// written into a table pre-sized and indexed by grid position, so the output
// never depends on the schedule.

#include <atomic>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "diode/model.hpp"

namespace diode {

/// |T_fwd - T_bwd| / (T_fwd + T_bwd) * T_fwd, and 0 when both vanish.
double efficiency(double t_fwd, double t_bwd);

struct SweepGrid {
    std::vector<double> delta_axis;  // detuning of atom 1
    std::vector<double> theta_axis;
    std::vector<double> flux_axis;

    std::size_t size() const { return delta_axis.size() * theta_axis.size() * flux_axis.size(); }
};

/// Throws ValidationError unless every axis is non-empty and strictly increasing.
void check_grid(const SweepGrid& grid);

struct SweepRow {
    double delta = 0.0, theta = 0.0, flux = 0.0;
    double T_fwd = 0.0, T_bwd = 0.0, L = 0.0;
    double P1_L = 0.0, P2_L = 0.0, P12_L = 0.0;
    double P1_R = 0.0, P2_R = 0.0, P12_R = 0.0;
    std::string error;  // empty unless the point failed; values are then NaN

    bool ok() const { return error.empty(); }
};

using SweepTable = std::vector<SweepRow>;

struct SweepOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Transport in both directions for `base` with atom 1 detuned by `delta`,
/// phase `theta` and input flux `flux`. Failures land in `error`.
SweepRow evaluate_point(const Scenario& base, double delta, double theta, double flux);

/// Rows ordered by (flux, delta, theta).
SweepTable sweep_map(const Scenario& base, const SweepGrid& grid, const SweepOptions& opts = {});

SweepTable sweep_power(const Scenario& base, double delta, double theta,
                       const std::vector<double>& flux_axis, const SweepOptions& opts = {});

struct GammaRow {
    double ratio = 0.0;  // gamma2 / gamma1, gamma1 = 1
    double T_fwd = 0.0, T_bwd = 0.0, L = 0.0;
    std::string error;

    bool ok() const { return error.empty(); }
};

std::vector<GammaRow> gamma_ratio_scan(const Scenario& base, double delta, double theta,
                                       double flux, const std::vector<double>& ratios,
                                       const SweepOptions& opts = {});

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);  // endpoints, not exponents
/// n equally spaced phases 2 pi k / n, k = 0 .. n-1.
std::vector<double> phase_axis(std::size_t n);

unsigned resolve_threads(unsigned requested);

/// Runs body(i) for i in [0, n) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        } catch (...) {
            errors[w] = std::current_exception();
            next = n;
        }
    };
    std::vector<std::thread> pool;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    for (unsigned w = 1; w < count; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace diode
