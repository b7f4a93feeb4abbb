#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "frontlab/csv.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/evolve.hpp"

namespace frontlab {

/// One experiment: potential, frame parameters, grid, initial-data recipe,
/// diagnostics. Parsed from plain-text key=value files; NaN means "derive
/// the default at load time".
struct RunConfig {
    std::string potential_kind = "cubic"; // cubic | supersonic
    double theta = 0.25;
    double super_s = 2.0; // physical speed of the supersonic construction

    double alpha = 1.0;
    double dx = 0.05;
    double x_left = std::numeric_limits<double>::quiet_NaN();
    double x_right = std::numeric_limits<double>::quiet_NaN();
    double dt = std::numeric_limits<double>::quiet_NaN();
    double T = 100.0;

    std::string initial = "step"; // step | front | front_perturbed | csv
    std::string initial_csv;
    double initial_x0 = 0.0;
    double perturb_amplitude = 1e-3;
    std::uint64_t seed = 1;

    double xi0 = std::numeric_limits<double>::quiet_NaN();
    double snapshot_dt = 25.0;
    double trace_dt = 0.5;
    std::vector<double> c_list{0.2, 0.35355339059327373, 0.6};
    double front_tol = 1e-10;
    std::string out = "out";

    bool operator==(const RunConfig& other) const {
        auto eq = [](double a, double b) {
            return (std::isnan(a) && std::isnan(b)) || a == b;
        };
        return potential_kind == other.potential_kind && eq(theta, other.theta) &&
               eq(super_s, other.super_s) && eq(alpha, other.alpha) && eq(dx, other.dx) &&
               eq(x_left, other.x_left) && eq(x_right, other.x_right) && eq(dt, other.dt) &&
               eq(T, other.T) && initial == other.initial && initial_csv == other.initial_csv &&
               eq(initial_x0, other.initial_x0) && eq(perturb_amplitude, other.perturb_amplitude) &&
               seed == other.seed && eq(xi0, other.xi0) && eq(snapshot_dt, other.snapshot_dt) &&
               eq(trace_dt, other.trace_dt) && c_list == other.c_list &&
               eq(front_tol, other.front_tol) && out == other.out;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_double_list(const std::string& s, int line_no) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw config_error("line " + std::to_string(line_no) + ": bad number '" + cell + "'");
        }
    }
    return out;
}

} // namespace detail

inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value,
                             int line_no) {
    auto num = [&](const std::string& v) {
        try {
            if (detail::trim(v) == "auto") return std::numeric_limits<double>::quiet_NaN();
            return std::stod(v);
        } catch (const std::exception&) {
            throw config_error("line " + std::to_string(line_no) + ": bad number '" + v + "'");
        }
    };
    if (key == "potential.kind") cfg.potential_kind = detail::trim(value);
    else if (key == "potential.theta") cfg.theta = num(value);
    else if (key == "potential.s") cfg.super_s = num(value);
    else if (key == "alpha") cfg.alpha = num(value);
    else if (key == "grid.dx") cfg.dx = num(value);
    else if (key == "grid.x_left") cfg.x_left = num(value);
    else if (key == "grid.x_right") cfg.x_right = num(value);
    else if (key == "dt") cfg.dt = num(value);
    else if (key == "T") cfg.T = num(value);
    else if (key == "initial") cfg.initial = detail::trim(value);
    else if (key == "initial.csv") cfg.initial_csv = detail::trim(value);
    else if (key == "initial.x0") cfg.initial_x0 = num(value);
    else if (key == "perturb.amplitude") cfg.perturb_amplitude = num(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(detail::trim(value)));
    else if (key == "xi0") cfg.xi0 = num(value);
    else if (key == "snapshot.dt") cfg.snapshot_dt = num(value);
    else if (key == "trace.dt") cfg.trace_dt = num(value);
    else if (key == "c_list") cfg.c_list = detail::parse_double_list(value, line_no);
    else if (key == "front.tol") cfg.front_tol = num(value);
    else if (key == "out") cfg.out = detail::trim(value);
    else
        throw config_error("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
}

/// Fill the derived defaults and enforce the load-time rules: CFL and the
/// domain-sizing rule that keeps the clamped boundaries causally out of
/// reach of the interface for the whole run.
inline void finalize_config(RunConfig& cfg) {
    if (cfg.potential_kind != "cubic" && cfg.potential_kind != "supersonic")
        throw config_error("potential.kind must be cubic or supersonic");
    if (cfg.potential_kind == "cubic" && !(cfg.theta > 0.0 && cfg.theta < 0.5))
        throw config_error("potential.theta must lie in (0, 1/2)");
    if (!(cfg.alpha > 0.0)) throw config_error("alpha must be > 0");
    if (!(cfg.dx > 0.0)) throw config_error("grid.dx must be > 0");
    if (!(cfg.T > 0.0)) throw config_error("T must be > 0");
    if (cfg.initial != "step" && cfg.initial != "front" && cfg.initial != "front_perturbed" &&
        cfg.initial != "csv")
        throw config_error("initial must be step, front, front_perturbed or csv");
    if (cfg.initial == "csv" && cfg.initial_csv.empty())
        throw config_error("initial.csv path required for initial = csv");
    for (double c : cfg.c_list)
        if (!(c > 0.0)) throw config_error("c_list entries must be > 0");

    if (std::isnan(cfg.dt)) cfg.dt = EvolveParams::auto_dt(cfg.alpha, cfg.dx);
    if (cfg.dt > 0.9 * std::sqrt(cfg.alpha) * cfg.dx * (1.0 + 1e-12))
        throw config_error("CFL violated: need dt <= 0.9 sqrt(alpha) dx");

    const double reach = cfg.T / std::sqrt(cfg.alpha);
    const double xi0_proxy = std::isnan(cfg.xi0) ? cfg.initial_x0 + 10.0 : cfg.xi0;
    const double right_min = cfg.potential_kind == "supersonic"
                                 ? cfg.initial_x0 + cfg.super_s * cfg.T + reach + 20.0
                                 : xi0_proxy + reach + 20.0;
    const double left_max = cfg.initial_x0 - reach - 20.0;
    if (std::isnan(cfg.x_right)) cfg.x_right = right_min;
    if (std::isnan(cfg.x_left)) cfg.x_left = left_max;
    if (cfg.x_right < right_min - 1e-9)
        throw config_error("domain-sizing rule violated: grid.x_right must be >= " +
                           fmt17(right_min));
    if (cfg.x_left > left_max + 1e-9)
        throw config_error("domain-sizing rule violated: grid.x_left must be <= " +
                           fmt17(left_max));
    if (!std::isnan(cfg.xi0) && (cfg.xi0 <= cfg.x_left || cfg.xi0 >= cfg.x_right))
        throw config_error("xi0 must lie inside the grid");
}

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line_no) + ": expected key=value");
        apply_config_key(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)),
                         line_no);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config_text(buf.str());
    finalize_config(cfg);
    return cfg;
}

/// Effective-config echo; reloading the echo reproduces the RunConfig.
inline std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "potential.kind = " << cfg.potential_kind << "\n";
    out << "potential.theta = " << fmt17(cfg.theta) << "\n";
    out << "potential.s = " << fmt17(cfg.super_s) << "\n";
    out << "alpha = " << fmt17(cfg.alpha) << "\n";
    out << "grid.dx = " << fmt17(cfg.dx) << "\n";
    out << "grid.x_left = " << fmt17(cfg.x_left) << "\n";
    out << "grid.x_right = " << fmt17(cfg.x_right) << "\n";
    out << "dt = " << fmt17(cfg.dt) << "\n";
    out << "T = " << fmt17(cfg.T) << "\n";
    out << "initial = " << cfg.initial << "\n";
    if (!cfg.initial_csv.empty()) out << "initial.csv = " << cfg.initial_csv << "\n";
    out << "initial.x0 = " << fmt17(cfg.initial_x0) << "\n";
    out << "perturb.amplitude = " << fmt17(cfg.perturb_amplitude) << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "xi0 = " << fmt17(cfg.xi0) << "\n";
    out << "snapshot.dt = " << fmt17(cfg.snapshot_dt) << "\n";
    out << "trace.dt = " << fmt17(cfg.trace_dt) << "\n";
    out << "c_list = ";
    for (std::size_t i = 0; i < cfg.c_list.size(); ++i)
        out << (i ? "," : "") << fmt17(cfg.c_list[i]);
    out << "\n";
    out << "front.tol = " << fmt17(cfg.front_tol) << "\n";
    out << "out = " << cfg.out << "\n";
    return out.str();
}

} // namespace frontlab
