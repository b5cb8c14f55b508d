#include "diode/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "diode/coherent.hpp"
#include "diode/single_photon.hpp"

namespace diode::cli {

using json = nlohmann::json;

namespace {

struct Registry {
    CLI::App& app;
    std::map<std::string, std::function<void(const json&)>> setters;

    template <class T>
    CLI::Option* bind(const std::string& name, T& field, const std::string& help) {
        setters[name] = [&field](const json& j) { field = j.get<T>(); };
        return app.add_option("--" + name, field, help);
    }
};

json apply_config(const std::string& path, Registry& reg) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "': " + std::strerror(errno));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("malformed config file '" + path + "': " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        auto it = reg.setters.find(key);
        if (it == reg.setters.end()) throw UsageError("unknown config key '" + key + "' in " + path);
        if (reg.app.get_option("--" + key)->count() > 0) continue;  // flag wins
        try {
            it->second(value);
        } catch (const json::exception& e) {
            throw UsageError("config key '" + key + "': " + e.what());
        }
    }
    return doc;
}

unsigned threads_from_env() {
    const char* v = std::getenv("DIODE_SIM_THREADS");
    if (v == nullptr || *v == '\0') return 0;
    char* end = nullptr;
    errno = 0;
    const long n = std::strtol(v, &end, 10);
    if (errno != 0 || *end != '\0' || n < 0 || n > 4096)
        throw UsageError(std::string("DIODE_SIM_THREADS must be a non-negative integer, got '") + v + "'");
    return static_cast<unsigned>(n);
}

Scenario base_scenario(const RunConfig& cfg) {
    DiodeConfig d;
    d.atom1 = {cfg.delta, cfg.gamma1};
    d.atom2 = {cfg.delta2, cfg.gamma2};
    d.theta = cfg.theta;
    DriveConfig drive;
    drive.flux = cfg.flux;
    drive.bandwidth = cfg.omega;
    return validate(d, drive);
}

std::string join_row(std::initializer_list<double> xs) {
    std::string s;
    for (double x : xs) {
        if (!s.empty()) s += ',';
        s += format_number(x);
    }
    return s;
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
    if (cfg.out.empty()) {
        out << content;
    } else {
        write_atomic(cfg.out, content);
    }
}

std::ostream& summary_stream(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return cfg.out.empty() ? err : out;
}

json parameters(const RunConfig& cfg) {
    return json{{"delta", cfg.delta},         {"delta2", cfg.delta2},
                {"gamma1", cfg.gamma1},       {"gamma2", cfg.gamma2},
                {"theta", cfg.theta},         {"flux", cfg.flux},
                {"omega", cfg.omega},         {"flux-min", cfg.flux_min},
                {"flux-max", cfg.flux_max},   {"points", cfg.points},
                {"delta-min", cfg.delta_min}, {"delta-max", cfg.delta_max},
                {"delta-points", cfg.delta_points}, {"theta-points", cfg.theta_points},
                {"ratios", cfg.ratios}};
}

json metadata(const RunConfig& cfg, double wall_seconds) {
    return json{{"command", to_string(cfg.command)},
                {"version", kVersion},
                {"wall_time_s", wall_seconds},
                {"parameters", parameters(cfg)}};
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int finish_table(const RunConfig& cfg, const SweepTable& table, double wall, std::ostream& out,
                 std::ostream& err) {
    emit(cfg, cfg.format == Format::Csv ? format_csv(table) : format_json(table, cfg, wall), out);
    std::size_t failed = 0;
    const SweepRow* best = nullptr;
    for (const auto& r : table) {
        if (!r.ok()) {
            ++failed;
            continue;
        }
        if (best == nullptr || r.L > best->L) best = &r;
    }
    auto& s = summary_stream(cfg, out, err);
    if (best != nullptr) {
        s << "max L = " << format_number(best->L) << " at delta=" << format_number(best->delta)
          << " theta=" << format_number(best->theta) << " flux=" << format_number(best->flux) << " ("
          << table.size() << " rows, " << failed << " failed)\n";
    } else {
        s << "no point succeeded (" << table.size() << " rows)\n";
    }
    for (const auto& r : table)
        if (!r.ok()) err << "point delta=" << r.delta << " theta=" << r.theta << " flux=" << r.flux
                         << " failed: " << r.error << "\n";
    // Failed points are part of the table; only a table with nothing in it is a failure.
    return best != nullptr ? 0 : 1;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_single_photon(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario s = base_scenario(cfg);
    const double r_num = reflectivity_numeric(s);
    double r_closed = std::numeric_limits<double>::quiet_NaN();
    try {
        r_closed = reflectivity_closed_form(s.delta1(), s.delta2(), s.diode.theta);
    } catch (const DomainError& e) {
        err << "closed form: " << e.what() << "\n";
    }
    std::string content;
    if (cfg.format == Format::Csv) {
        content = "delta1,delta2,theta,omega,R_numeric,R_closed_form\n" +
                  join_row({s.delta1(), s.delta2(), s.diode.theta, s.drive.bandwidth, r_num, r_closed}) + "\n";
    } else {
        json j{{"metadata", metadata(cfg, elapsed(t0))},
               {"rows", json::array({json{{"delta1", s.delta1()},
                                          {"delta2", s.delta2()},
                                          {"theta", s.diode.theta},
                                          {"omega", s.drive.bandwidth},
                                          {"R_numeric", r_num},
                                          {"R_closed_form", number_or_null(r_closed)}}})}};
        content = j.dump(2) + "\n";
    }
    emit(cfg, content, out);
    summary_stream(cfg, out, err) << "R = " << format_number(r_num) << " (closed form "
                                  << format_number(r_closed) << ")\n";
    return 0;
}

int run_gamma_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario s = base_scenario(cfg);
    const auto rows = gamma_ratio_scan(s, s.delta1(), s.diode.theta, s.drive.flux, cfg.ratios,
                                       SweepOptions{cfg.threads});
    std::string content;
    if (cfg.format == Format::Csv) {
        content = "ratio,T_fwd,T_bwd,L\n";
        for (const auto& r : rows) content += join_row({r.ratio, r.T_fwd, r.T_bwd, r.L}) + "\n";
    } else {
        json arr = json::array();
        for (const auto& r : rows) {
            json o{{"ratio", r.ratio},
                   {"T_fwd", number_or_null(r.T_fwd)},
                   {"T_bwd", number_or_null(r.T_bwd)},
                   {"L", number_or_null(r.L)}};
            if (!r.ok()) o["error"] = r.error;
            arr.push_back(o);
        }
        content = json{{"metadata", metadata(cfg, elapsed(t0))}, {"rows", arr}}.dump(2) + "\n";
    }
    emit(cfg, content, out);
    const GammaRow* best = nullptr;
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (!r.ok()) {
            ++failed;
            err << "ratio " << r.ratio << " failed: " << r.error << "\n";
        } else if (best == nullptr || r.L > best->L) {
            best = &r;
        }
    }
    if (best != nullptr)
        summary_stream(cfg, out, err) << "max L = " << format_number(best->L) << " at gamma2/gamma1="
                                      << format_number(best->ratio) << "\n";
    return failed == 0 ? 0 : 1;
}

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Check> builtin_checks() {
    std::vector<Check> checks;
    const double pi = std::numbers::pi;

    {
        double worst = 0.0;
        const double pts[][3] = {{1.0, -1.0, pi}, {0.5, 0.0, 0.5 * pi}, {-1.0, 0.5, 1.5 * pi}, {2.0, 1.0, 0.3}};
        for (const auto& p : pts) {
            const Scenario s = validate(DiodeConfig{{p[0], 1.0}, {p[1], 1.0}, p[2]}, DriveConfig{});
            const double exact = reflectivity_closed_form(p[0], p[1], p[2]);
            worst = std::max(worst, std::abs(reflectivity_numeric(s) - exact) / exact);
        }
        checks.push_back({"closed-form vs ODE reflectivity", worst < 0.02,
                          "max relative error " + format_number(worst)});
    }
    {
        double worst = 0.0;
        for (double d : {0.0, 0.5, 1.0}) {
            for (double f : {1e-3, 0.1, 1.0}) {
                DriveConfig drive;
                drive.flux = f;
                const Scenario s = validate(DiodeConfig{{d, 1.0}, {0.0, 0.0}, 0.0}, drive);
                const double exact = single_atom_reflection(d, f);
                worst = std::max(worst, std::abs(transport(s).Nb - exact) / exact);
            }
        }
        checks.push_back({"single-atom reflection", worst < 0.01, "max relative error " + format_number(worst)});
    }
    {
        double worst = 0.0;
        for (double d1 : {-2.0, -1.0, 0.0, 1.0, 2.0})
            for (double d2 : {-2.0, -1.0, 0.0, 1.0, 2.0})
                for (double th : {0.25 * pi, 0.75 * pi, 1.25 * pi, 1.75 * pi})
                    worst = std::max(worst, std::abs(reflectivity_closed_form(d1, d2, th) -
                                                     reflectivity_closed_form(d2, d1, th)));
        double l_sym = 0.0;
        for (double d : {-1.0, 0.12, 1.5}) {
            const Scenario base = validate(DiodeConfig{{d, 1.0}, {d, 1.0}, 1.0}, DriveConfig{});
            const SweepRow r = evaluate_point(base, d, 2.0 * pi * 0.982, 0.1);
            l_sym = std::max(l_sym, r.ok() ? r.L : 1.0);
        }
        checks.push_back({"exchange symmetry", worst < 1e-12 && l_sym < 1e-9,
                          "single-photon asymmetry " + format_number(worst) + ", symmetric-diode L " +
                              format_number(l_sym)});
    }
    return checks;
}

int run_validate(std::ostream& out) {
    bool all = true;
    for (const auto& c : builtin_checks()) {
        out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        all = all && c.pass;
    }
    return all ? 0 : 1;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    const SweepOptions opts{cfg.threads};
    switch (cfg.command) {
        case Command::SinglePhoton:
            return run_single_photon(cfg, out, err);
        case Command::Validate:
            return run_validate(out);
        case Command::GammaScan:
            return run_gamma_scan(cfg, out, err);
        case Command::Transport: {
            const Scenario s = base_scenario(cfg);
            const SweepRow row = evaluate_point(s, s.delta1(), s.diode.theta, s.drive.flux);
            if (!row.ok()) throw SteadyStateError(row.error);
            return finish_table(cfg, {row}, elapsed(t0), out, err);
        }
        case Command::SweepMap: {
            const Scenario s = base_scenario(cfg);
            if (cfg.delta_points == 0 || cfg.theta_points == 0) throw ValidationError("grid needs at least one point per axis");
            SweepGrid grid{linspace(cfg.delta_min / s.gamma_ref, cfg.delta_max / s.gamma_ref, cfg.delta_points),
                           phase_axis(cfg.theta_points), {s.drive.flux}};
            const auto table = sweep_map(s, grid, opts);
            return finish_table(cfg, table, elapsed(t0), out, err);
        }
        case Command::SweepPower: {
            const Scenario s = base_scenario(cfg);
            if (cfg.points == 0) throw ValidationError("points must be ≥ 1");
            if (!(cfg.flux_min > 0.0) || !(cfg.flux_max >= cfg.flux_min))
                throw ValidationError("flux range must satisfy 0 < flux-min ≤ flux-max");
            const auto fluxes = logspace(cfg.flux_min / s.gamma_ref, cfg.flux_max / s.gamma_ref, cfg.points);
            const auto table = sweep_power(s, s.delta1(), s.diode.theta, fluxes, opts);
            return finish_table(cfg, table, elapsed(t0), out, err);
        }
    }
    return 1;
}

}  // namespace

const char* to_string(Command c) {
    switch (c) {
        case Command::SinglePhoton: return "single-photon";
        case Command::Transport: return "transport";
        case Command::SweepMap: return "sweep-map";
        case Command::SweepPower: return "sweep-power";
        case Command::GammaScan: return "gamma-scan";
        case Command::Validate: return "validate";
    }
    return "?";
}

RunConfig parse_args(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Two-atom waveguide optical diode simulator", "diode_sim"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Registry reg{app, {}};
    reg.bind("delta", cfg.delta, "detuning of atom 1 (left), units of gamma1");
    reg.bind("delta2", cfg.delta2, "detuning of atom 2 (right)");
    reg.bind("gamma1", cfg.gamma1, "decay rate of atom 1");
    reg.bind("gamma2", cfg.gamma2, "decay rate of atom 2");
    double theta_frac = 0.982;
    double theta_rad = 0.0;
    auto* frac_opt = reg.bind("theta-frac", theta_frac, "inter-atom phase as a fraction of 2 pi");
    auto* rad_opt = reg.bind("theta", theta_rad, "inter-atom phase in radians");
    frac_opt->excludes(rad_opt);
    reg.bind("flux", cfg.flux, "input photon flux |alpha|^2");
    reg.bind("omega", cfg.omega, "pulse bandwidth Omega (pulse length 2/Omega)");
    reg.bind("flux-min", cfg.flux_min, "sweep-power: lowest flux");
    reg.bind("flux-max", cfg.flux_max, "sweep-power: highest flux");
    reg.bind("points", cfg.points, "sweep-power: number of log-spaced flux points");
    reg.bind("delta-min", cfg.delta_min, "sweep-map: lowest detuning");
    reg.bind("delta-max", cfg.delta_max, "sweep-map: highest detuning");
    reg.bind("delta-points", cfg.delta_points, "sweep-map: detuning points");
    reg.bind("theta-points", cfg.theta_points, "sweep-map: phase points over [0, 2 pi)");
    reg.bind("ratios", cfg.ratios, "gamma-scan: gamma2/gamma1 values")->delimiter(',');
    reg.bind("out", cfg.out, "output file (default stdout)");
    std::string format = "csv";
    reg.bind("format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with flag names as keys");

    const std::pair<const char*, Command> commands[] = {
        {"single-photon", Command::SinglePhoton}, {"transport", Command::Transport},
        {"sweep-map", Command::SweepMap},         {"sweep-power", Command::SweepPower},
        {"gamma-scan", Command::GammaScan},       {"validate", Command::Validate}};
    const char* help[] = {"reflectivity of a single-photon pulse",
                          "steady-state transport in both directions",
                          "efficiency map over detuning and phase",
                          "efficiency and excitation versus flux",
                          "efficiency versus gamma2/gamma1",
                          "run the built-in consistency checks"};
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) subs.push_back(app.add_subcommand(commands[i].first, help[i]));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw EarlyExit(app.help());
    } catch (const CLI::CallForAllHelp&) {
        throw EarlyExit(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::CallForVersion&) {
        throw EarlyExit(std::string(kVersion) + "\n");
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed()) cfg.command = commands[i].second;

    bool theta_in_radians = rad_opt->count() > 0;
    if (!config_path.empty()) {
        const json doc = apply_config(config_path, reg);
        if (frac_opt->count() + rad_opt->count() == 0) {
            if (doc.contains("theta-frac") && doc.contains("theta"))
                throw UsageError("config sets both theta-frac and theta");
            theta_in_radians = doc.contains("theta");
        }
    }
    cfg.theta = theta_in_radians ? theta_rad : 2.0 * std::numbers::pi * theta_frac;
    if (format != "csv" && format != "json") throw UsageError("format must be csv or json");
    cfg.format = format == "json" ? Format::Json : Format::Csv;
    cfg.threads = threads_from_env();
    return cfg;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(cfg, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(argc, argv);
    } catch (const EarlyExit& e) {
        out << e.what();
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return execute(cfg, out, err);
}

std::string format_number(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string format_csv(const SweepTable& table) {
    std::string s = std::string(kCsvHeader) + "\n";
    for (const auto& r : table) {
        s += join_row({r.delta, r.theta, r.flux, r.T_fwd, r.T_bwd, r.L, r.P1_L, r.P2_L, r.P12_L, r.P1_R,
                       r.P2_R, r.P12_R});
        s += '\n';
    }
    return s;
}

std::string format_json(const SweepTable& table, const RunConfig& cfg, double wall_seconds) {
    json rows = json::array();
    for (const auto& r : table) {
        json o{{"delta", r.delta},          {"theta", r.theta},
               {"flux", r.flux},            {"T_fwd", number_or_null(r.T_fwd)},
               {"T_bwd", number_or_null(r.T_bwd)}, {"L", number_or_null(r.L)},
               {"P1_L", number_or_null(r.P1_L)},   {"P2_L", number_or_null(r.P2_L)},
               {"P12_L", number_or_null(r.P12_L)}, {"P1_R", number_or_null(r.P1_R)},
               {"P2_R", number_or_null(r.P2_R)},   {"P12_R", number_or_null(r.P12_R)}};
        if (!r.ok()) o["error"] = r.error;
        rows.push_back(std::move(o));
    }
    return json{{"metadata", metadata(cfg, wall_seconds)}, {"rows", rows}}.dump(2) + "\n";
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + tmp.string() + "': " + std::strerror(errno));
        f << content;
        f.flush();
        if (!f) {
            const std::string msg = std::strerror(errno);
            f.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write to '" + tmp.string() + "' failed: " + msg);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError("cannot move output into '" + path.string() + "': " + ec.message());
    }
}

}  // namespace diode::cli
