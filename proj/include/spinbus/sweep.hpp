#ifndef SPINBUS_SWEEP_HPP
#define SPINBUS_SWEEP_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spinbus/chain.hpp"
#include "spinbus/correlation.hpp"
#include "spinbus/coupling.hpp"
#include "spinbus/dsf.hpp"
#include "spinbus/dynamics.hpp"
#include "spinbus/exact.hpp"

namespace spinbus {

inline constexpr const char* kVersion = "0.1.0";

/// Configuration errors exit with a distinct status from numerical failures.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// "start:stop:count" with inclusive endpoints; a bare number is a one-point grid.
struct LambdaGrid {
    double start = 1.0;
    double stop = 1.0;
    int count = 1;

    std::vector<double> points() const {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(count));
        if (count == 1) {
            out.push_back(start);
            return out;
        }
        for (int i = 0; i < count; ++i)
            out.push_back(start + (stop - start) * double(i) / double(count - 1));
        return out;
    }

    std::string str() const {
        char buf[96];
        if (count == 1) {
            std::snprintf(buf, sizeof buf, "%.17g", start);
        } else {
            std::snprintf(buf, sizeof buf, "%.17g:%.17g:%d", start, stop, count);
        }
        return buf;
    }
};

/// Resolved run configuration.  Defaults follow the reference regime
/// N = 40, mu = 1, J_A = J_B = 0.1, open boundary.
struct RunConfig {
    int n_sites = 40;
    double gamma = 1.0;
    double mu = 1.0;
    double j_a = 0.1;
    double j_b = 0.1;
    LambdaGrid lambda{1.0, 1.0, 1};
    double epsilon = 0.15;
    double t_max = 40.0;
    double dt = 0.05;
    int n_max = -1;
    Boundary boundary = Boundary::Open;
    bool include_n0 = true;
    int anchor = 0; // 0 = centered pair, -1 = exact site average, >= 1 fixed site
    int threads = 0;
    std::string out;

    AnchorPolicy anchor_policy() const {
        if (anchor == 0) return AnchorPolicy::centered();
        if (anchor == -1) return AnchorPolicy::averaged();
        if (anchor >= 1) return AnchorPolicy::fixed(anchor);
        throw ConfigError("config key 'anchor': expected -1, 0 or a site index >= 1, got " +
                          std::to_string(anchor));
    }

    ChainSpec chain_at(double lam) const {
        return ChainSpec{n_sites, gamma, lam * gamma, boundary};
    }

    TransformConfig transform() const { return TransformConfig{epsilon, t_max, dt, n_max, include_n0}; }

    PipelineConfig pipeline() const {
        PipelineConfig p;
        p.mu = mu;
        p.j_a = j_a;
        p.j_b = j_b;
        p.transform = transform();
        p.anchor = anchor_policy();
        p.threads = threads;
        return p;
    }
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "'" +
                          (line > 0 ? " (line " + std::to_string(line) + ")" : "") +
                          ": expected real number, got '" + value + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "'" +
                          (line > 0 ? " (line " + std::to_string(line) + ")" : "") +
                          ": expected integer, got '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value, int line) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    throw ConfigError("config key '" + key + "'" +
                      (line > 0 ? " (line " + std::to_string(line) + ")" : "") +
                      ": expected boolean, got '" + value + "'");
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace detail

inline LambdaGrid parse_lambda_grid(const std::string& text, int line = 0) {
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) {
        const double v = detail::parse_real("lambda", text, line);
        return LambdaGrid{v, v, 1};
    }
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw ConfigError("config key 'lambda': expected START:STOP:COUNT, got '" + text + "'");
    LambdaGrid g;
    g.start = detail::parse_real("lambda", text.substr(0, c1), line);
    g.stop = detail::parse_real("lambda", text.substr(c1 + 1, c2 - c1 - 1), line);
    g.count = detail::parse_int("lambda", text.substr(c2 + 1), line);
    if (g.count < 1) throw ConfigError("config key 'lambda': grid count must be >= 1");
    return g;
}

/// Applies one canonical key onto the config.  Used both by the config-file
/// parser and by the flag layer, so the two stay consistent.  The 'j' key sets
/// a one-point lambda grid via lambda = j / gamma and must not be combined
/// with an explicit lambda.
inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value,
                             int line, bool& saw_j, bool& saw_lambda) {
    if (key == "n_sites") {
        cfg.n_sites = detail::parse_int(key, value, line);
        if (cfg.n_sites < 2) throw ConfigError("config key 'n_sites': must be >= 2, got " + value);
    } else if (key == "gamma") {
        cfg.gamma = detail::parse_real(key, value, line);
        if (!(cfg.gamma > 0.0)) throw ConfigError("config key 'gamma': must be > 0, got " + value);
    } else if (key == "j") {
        const double j = detail::parse_real(key, value, line);
        if (j < 0.0) throw ConfigError("config key 'j': must be >= 0, got " + value);
        cfg.lambda = LambdaGrid{j / cfg.gamma, j / cfg.gamma, 1};
        saw_j = true;
    } else if (key == "mu") {
        cfg.mu = detail::parse_real(key, value, line);
    } else if (key == "ja") {
        cfg.j_a = detail::parse_real(key, value, line);
    } else if (key == "jb") {
        cfg.j_b = detail::parse_real(key, value, line);
    } else if (key == "lambda") {
        cfg.lambda = parse_lambda_grid(value, line);
        saw_lambda = true;
    } else if (key == "epsilon") {
        cfg.epsilon = detail::parse_real(key, value, line);
        if (!(cfg.epsilon > 0.0))
            throw ConfigError("config key 'epsilon': must be > 0, got " + value);
    } else if (key == "tmax") {
        cfg.t_max = detail::parse_real(key, value, line);
        if (!(cfg.t_max > 0.0)) throw ConfigError("config key 'tmax': must be > 0, got " + value);
    } else if (key == "dt") {
        cfg.dt = detail::parse_real(key, value, line);
        if (!(cfg.dt > 0.0)) throw ConfigError("config key 'dt': must be > 0, got " + value);
    } else if (key == "nmax") {
        cfg.n_max = detail::parse_int(key, value, line);
    } else if (key == "boundary") {
        if (value == "open")
            cfg.boundary = Boundary::Open;
        else if (value == "periodic")
            cfg.boundary = Boundary::Periodic;
        else
            throw ConfigError("config key 'boundary': expected open|periodic, got '" + value +
                              "'");
    } else if (key == "include_n0") {
        cfg.include_n0 = detail::parse_bool(key, value, line);
    } else if (key == "anchor") {
        cfg.anchor = detail::parse_int(key, value, line);
        if (cfg.anchor < -1)
            throw ConfigError("config key 'anchor': expected -1, 0 or site index, got " + value);
    } else if (key == "threads") {
        cfg.threads = detail::parse_int(key, value, line);
        if (cfg.threads < 0)
            throw ConfigError("config key 'threads': must be >= 0, got " + value);
    } else if (key == "out") {
        cfg.out = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'" +
                          (line > 0 ? " at line " + std::to_string(line) : ""));
    }
    if (saw_j && saw_lambda)
        throw ConfigError("config keys 'j' and 'lambda' are mutually exclusive (lambda = j/gamma)");
}

/// key = value lines; '#' starts a comment; unknown keys are rejected by name.
/// gamma is applied before everything else so that a 'j' line resolves
/// lambda = j / gamma against the file's own field value regardless of order.
inline RunConfig parse_config_stream(std::istream& in, RunConfig base = RunConfig{}) {
    struct Item {
        std::string key, value;
        int line;
    };
    std::vector<Item> items;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        items.push_back({detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)),
                         line_no});
    }
    bool saw_j = false, saw_lambda = false;
    for (const Item& it : items)
        if (it.key == "gamma") apply_config_key(base, it.key, it.value, it.line, saw_j, saw_lambda);
    for (const Item& it : items)
        if (it.key != "gamma") apply_config_key(base, it.key, it.value, it.line, saw_j, saw_lambda);
    return base;
}

inline RunConfig parse_config_file(const std::string& path, RunConfig base = RunConfig{}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file '" + path + "' is not readable");
    return parse_config_stream(in, base);
}

// ---------------------------------------------------------------------------
// columnar output

namespace detail {

inline std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace detail

/// Cell value: double or verbatim string.
using Cell = std::variant<double, long, std::string>;

/// Whitespace-delimited columnar file with a '#' header echoing the resolved
/// config (as re-parsable key = value lines) plus a matching JSON sidecar at
/// <path>.json.
class TableWriter {
public:
    TableWriter(std::string subcommand, const RunConfig& cfg, std::vector<std::string> columns)
        : subcommand_(std::move(subcommand)), cfg_(cfg), columns_(std::move(columns)) {}

    void row(std::vector<Cell> cells) {
        if (cells.size() != columns_.size())
            throw std::logic_error("TableWriter: row width mismatch");
        rows_.push_back(std::move(cells));
    }

    /// Header lines, each starting with "# ".
    std::vector<std::string> header() const {
        std::vector<std::string> h;
        h.push_back("spinbus " + std::string(kVersion));
        h.push_back("subcommand: " + subcommand_);
        h.push_back("n_sites = " + std::to_string(cfg_.n_sites));
        h.push_back("gamma = " + detail::fmt(cfg_.gamma));
        h.push_back("mu = " + detail::fmt(cfg_.mu));
        h.push_back("ja = " + detail::fmt(cfg_.j_a));
        h.push_back("jb = " + detail::fmt(cfg_.j_b));
        h.push_back("lambda = " + cfg_.lambda.str());
        h.push_back("epsilon = " + detail::fmt(cfg_.epsilon));
        h.push_back("tmax = " + detail::fmt(cfg_.t_max));
        h.push_back("dt = " + detail::fmt(cfg_.dt));
        h.push_back("nmax = " + std::to_string(cfg_.n_max));
        h.push_back(std::string("boundary = ") + to_string(cfg_.boundary));
        h.push_back(std::string("include_n0 = ") + (cfg_.include_n0 ? "true" : "false"));
        h.push_back("anchor = " + std::to_string(cfg_.anchor));
        h.push_back("threads = " + std::to_string(cfg_.threads));
        std::string cols = "columns:";
        for (const auto& c : columns_) cols += " " + c;
        h.push_back(cols);
        return h;
    }

    void write(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
        for (const auto& line : header()) f << "# " << line << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) f << " ";
                f << cell_str(r[i]);
            }
            f << "\n";
        }
        if (!f) throw std::runtime_error("write failed for '" + path + "'");
        write_json(path + ".json");
    }

private:
    static std::string cell_str(const Cell& c) {
        if (std::holds_alternative<double>(c)) return detail::fmt(std::get<double>(c));
        if (std::holds_alternative<long>(c)) return std::to_string(std::get<long>(c));
        return std::get<std::string>(c);
    }

    void write_json(const std::string& path) const {
        nlohmann::ordered_json doc;
        doc["version"] = kVersion;
        doc["subcommand"] = subcommand_;
        nlohmann::ordered_json config;
        for (const auto& line : header()) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) continue;
            config[line.substr(0, eq)] = line.substr(eq + 3);
        }
        doc["config"] = config;
        doc["columns"] = columns_;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : rows_) {
            nlohmann::ordered_json jr = nlohmann::ordered_json::array();
            for (const auto& c : r) {
                if (std::holds_alternative<double>(c)) {
                    const double v = std::get<double>(c);
                    if (std::isfinite(v))
                        jr.push_back(v);
                    else
                        jr.push_back(detail::fmt(v));
                } else if (std::holds_alternative<long>(c)) {
                    jr.push_back(std::get<long>(c));
                } else {
                    jr.push_back(std::get<std::string>(c));
                }
            }
            rows.push_back(std::move(jr));
        }
        doc["rows"] = rows;
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot open sidecar '" + path + "'");
        f << doc.dump(1, '\t') << "\n";
    }

    std::string subcommand_;
    RunConfig cfg_;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// ---------------------------------------------------------------------------
// subcommand runners

namespace detail {

inline double single_lambda(const RunConfig& cfg, const char* who) {
    if (cfg.lambda.count != 1)
        throw ConfigError(std::string(who) + ": requires a single lambda (use --lambda VALUE)");
    return cfg.lambda.start;
}

} // namespace detail

/// spectrum: one row per quasiparticle mode, columns (index, energy).
inline void run_spectrum(const RunConfig& cfg, const std::string& path) {
    const double lam = detail::single_lambda(cfg, "spectrum");
    const SpectralSolution sol = spectrum(cfg.chain_at(lam));
    TableWriter w("spectrum", cfg, {"index", "energy"});
    for (Eigen::Index p = 0; p < sol.energies.size(); ++p)
        w.row({long(p), sol.energies(p)});
    w.write(path);
}

/// correlation: all four channels per (n, t).
inline void run_correlation(const RunConfig& cfg, const std::string& path) {
    const double lam = detail::single_lambda(cfg, "correlation");
    const ChainSpec spec = cfg.chain_at(lam);
    if (spec.boundary != Boundary::Open)
        throw ConfigError("correlation: open boundary required (periodic correlations are out of scope)");
    const TimeGrid grid = cfg.transform().grid();
    const CorrelationSet corr = correlation_sweep(
        spec, cfg.anchor_policy(), all_separations(spec.n_sites, cfg.n_max), grid, cfg.threads);
    TableWriter w("correlation", cfg,
                  {"n", "t", "xx_re", "xx_im", "xy_re", "xy_im", "yx_re", "yx_im", "yy_re",
                   "yy_im"});
    const int n_top = (cfg.n_max < 0 || cfg.n_max > spec.n_sites - 1) ? spec.n_sites - 1 : cfg.n_max;
    for (int n = 0; n <= n_top; ++n) {
        const auto& xx = corr.series(Channel::XX, n);
        const auto& xy = corr.series(Channel::XY, n);
        const auto& yx = corr.series(Channel::YX, n);
        const auto& yy = corr.series(Channel::YY, n);
        for (int i = 0; i < grid.count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            w.row({long(n), grid.t(i), xx.values[idx].real(), xx.values[idx].imag(),
                   xy.values[idx].real(), xy.values[idx].imag(), yx.values[idx].real(),
                   yx.values[idx].imag(), yy.values[idx].real(), yy.values[idx].imag()});
        }
    }
    w.write(path);
}

/// dsf: S^{xx}, S^{xy}, S^{yy} at k = 0 on a fixed omega grid spanning
/// [-6, 6] * Gamma (121 points).
inline void run_dsf(const RunConfig& cfg, const std::string& path) {
    const double lam = detail::single_lambda(cfg, "dsf");
    const ChainSpec spec = cfg.chain_at(lam);
    if (spec.boundary != Boundary::Open) throw ConfigError("dsf: open boundary required");
    const TransformConfig tc = cfg.transform();
    const SpectralSolution sol = open_spectrum(spec);
    tc.validate(band_top(sol));
    const CorrelationSet corr = correlation_sweep(
        spec, cfg.anchor_policy(), all_separations(spec.n_sites, cfg.n_max), tc.grid(),
        cfg.threads);
    TableWriter w("dsf", cfg,
                  {"omega", "sxx_re", "sxx_im", "sxy_re", "sxy_im", "syy_re", "syy_im"});
    const int count = 121;
    for (int i = 0; i < count; ++i) {
        const double omega = -6.0 * cfg.gamma + 12.0 * cfg.gamma * double(i) / double(count - 1);
        const Complex sxx = dsf(Channel::XX, 0.0, omega, corr, tc).value;
        const Complex sxy = dsf(Channel::XY, 0.0, omega, corr, tc).value;
        const Complex syy = dsf(Channel::YY, 0.0, omega, corr, tc).value;
        w.row({omega, sxx.real(), sxx.imag(), sxy.real(), sxy.imag(), syy.real(), syy.imag()});
    }
    w.write(path);
}

/// couplings: the lambda sweep of the effective-Hamiltonian coefficients.
inline void run_couplings(const RunConfig& cfg, const std::string& path) {
    const std::vector<CouplingResult> rows =
        coupling_sweep(cfg.lambda.points(), cfg.chain_at(1.0), cfg.pipeline());
    TableWriter w("couplings", cfg,
                  {"lambda", "mu_a", "mu_b", "g1", "g2", "residual_imag", "near_resonant"});
    for (const auto& r : rows)
        w.row({r.lambda, r.couplings.mu_a, r.couplings.mu_b, r.couplings.g1, r.couplings.g2,
               r.couplings.residual_imag, long(r.near_resonant ? 1 : 0)});
    w.write(path);
}

namespace detail {

/// Trajectory horizon: at least one beat of the dominant coupling.
inline TimeGrid trajectory_grid(const EffectiveCouplings& c, double fallback_span) {
    const double g = std::max(std::abs(c.g1), std::abs(c.g2));
    double span = fallback_span;
    if (g > 1e-12) span = std::max(span, 1.1 * std::numbers::pi / (2.0 * g));
    const int count = 2001;
    return TimeGrid{span / (count - 1), count};
}

} // namespace detail

/// dynamics: concurrence trajectories from |eg> under the per-lambda
/// effective Hamiltonian; writes (lambda, t, C) plus a *_tmax companion table
/// with (lambda, t_first_max, c_max).
inline void run_dynamics(const RunConfig& cfg, const std::string& path,
                         const std::string& tmax_path) {
    const std::vector<CouplingResult> rows =
        coupling_sweep(cfg.lambda.points(), cfg.chain_at(1.0), cfg.pipeline());
    TableWriter w("dynamics", cfg, {"lambda", "t", "concurrence"});
    TableWriter wt("dynamics", cfg, {"lambda", "t_first_max", "c_max"});
    const TwoQubitDensity rho0 = TwoQubitDensity::basis_state(1); // |eg>
    for (const auto& r : rows) {
        const TimeGrid grid = detail::trajectory_grid(r.couplings, cfg.t_max);
        const std::vector<double> c = concurrence_trajectory(r.couplings, rho0, grid);
        for (int i = 0; i < grid.count; ++i)
            w.row({r.lambda, grid.t(i), c[static_cast<std::size_t>(i)]});
        const double peak = *std::max_element(c.begin(), c.end());
        wt.row({r.lambda, time_to_first_max(c, grid), peak});
    }
    w.write(path);
    wt.write(tmax_path);
}

/// fidelity: reduced full-Hamiltonian ground state vs effective-Hamiltonian
/// ground state over the lambda grid (N <= 12).
inline void run_fidelity(const RunConfig& cfg, const std::string& path) {
    if (cfg.n_sites > 12)
        throw ConfigError("fidelity: N = " + std::to_string(cfg.n_sites) +
                          " exceeds the dense-oracle cap of 12");
    const std::vector<FidelityPoint> rows =
        fidelity_curve(cfg.lambda.points(), cfg.chain_at(1.0), cfg.pipeline());
    TableWriter w("fidelity", cfg, {"lambda", "fidelity", "degenerate_ground"});
    for (const auto& r : rows)
        w.row({r.lambda, r.fidelity, long(r.degenerate_ground ? 1 : 0)});
    w.write(path);
}

/// sweep: couplings plus trajectory summary per lambda, one row each.
inline void run_sweep(const RunConfig& cfg, const std::string& path) {
    const std::vector<CouplingResult> rows =
        coupling_sweep(cfg.lambda.points(), cfg.chain_at(1.0), cfg.pipeline());
    TableWriter w("sweep", cfg,
                  {"lambda", "mu_a", "mu_b", "g1", "g2", "residual_imag", "near_resonant",
                   "t_first_max", "c_max"});
    const TwoQubitDensity rho0 = TwoQubitDensity::basis_state(1);
    for (const auto& r : rows) {
        const TimeGrid grid = detail::trajectory_grid(r.couplings, cfg.t_max);
        const std::vector<double> c = concurrence_trajectory(r.couplings, rho0, grid);
        const double peak = *std::max_element(c.begin(), c.end());
        w.row({r.lambda, r.couplings.mu_a, r.couplings.mu_b, r.couplings.g1, r.couplings.g2,
               r.couplings.residual_imag, long(r.near_resonant ? 1 : 0),
               time_to_first_max(c, grid), peak});
    }
    w.write(path);
}

/// Dispatch; returns the output paths written.
inline std::vector<std::string> run_subcommand(const std::string& name, const RunConfig& cfg) {
    std::string out = cfg.out.empty() ? name + ".dat" : cfg.out;
    if (name == "spectrum") {
        run_spectrum(cfg, out);
    } else if (name == "correlation") {
        run_correlation(cfg, out);
    } else if (name == "dsf") {
        run_dsf(cfg, out);
    } else if (name == "couplings") {
        run_couplings(cfg, out);
    } else if (name == "dynamics") {
        const auto dot = out.rfind('.');
        const std::string tmax_path = (dot == std::string::npos)
                                          ? out + "_tmax"
                                          : out.substr(0, dot) + "_tmax" + out.substr(dot);
        run_dynamics(cfg, out, tmax_path);
        return {out, tmax_path};
    } else if (name == "fidelity") {
        run_fidelity(cfg, out);
    } else if (name == "sweep") {
        run_sweep(cfg, out);
    } else {
        throw ConfigError("unknown subcommand '" + name + "'");
    }
    return {out};
}

} // namespace spinbus

#endif // SPINBUS_SWEEP_HPP
