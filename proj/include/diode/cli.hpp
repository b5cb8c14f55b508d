#pragma once

// Command-line front end: argument and config parsing, command dispatch and
// CSV/JSON emission.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "diode/sweep.hpp"

namespace diode::cli {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr const char* kCsvHeader =
    "delta,theta,flux,T_fwd,T_bwd,L,P1_L,P2_L,P12_L,P1_R,P2_R,P12_R";

enum class Command { SinglePhoton, Transport, SweepMap, SweepPower, GammaScan, Validate };
enum class Format { Csv, Json };

const char* to_string(Command c);

/// Bad arguments or configuration; exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure; exit code 1.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Command command = Command::Transport;

    double delta = 0.12;  // atom 1 detuning
    double delta2 = 0.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double theta = 2.0 * 3.14159265358979323846 * 0.982;  // radians
    double flux = 0.1;
    double omega = 0.01;

    double flux_min = 1e-6;
    double flux_max = 1e2;
    std::size_t points = 60;
    double delta_min = -2.0;
    double delta_max = 2.0;
    std::size_t delta_points = 81;
    std::size_t theta_points = 81;
    std::vector<double> ratios{0.25, 0.5, 1.0, 2.0, 4.0};

    unsigned threads = 0;  // from DIODE_SIM_THREADS
    std::string out;       // empty: stdout
    Format format = Format::Csv;
};

/// Thrown by parse_args for --help and --version; `what()` is the text to print.
class EarlyExit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses argv. Flags override values loaded with --config. Throws UsageError.
RunConfig parse_args(int argc, const char* const* argv);

/// Runs the command; returns the process exit code.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args + execute with the exit-code contract (0 ok, 1 failure, 2 usage).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string format_number(double x);
std::string format_csv(const SweepTable& table);
std::string format_json(const SweepTable& table, const RunConfig& cfg, double wall_seconds);

/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace diode::cli
