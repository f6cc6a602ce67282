#pragma once

#include "mania/errors.hpp"
#include "mania/experiments.hpp"
#include "mania/fractional.hpp"
#include "mania/optimizer.hpp"
#include "mania/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace mania::cli {

/// Bad command line or configuration value. Exit status 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExitStatus : int { pass = 0, study_fail = 1, usage = 2, io = 3 };

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"solve",  "gap",      "converge", "interp", "inverse",
                                                "lemmas", "recovery", "seminorm", "all"};
    return names;
}

struct CliInvocation {
    std::string subcommand;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides; ///< in application order
    std::string output_dir;
    bool repro = false;
    std::size_t mesh = 64; ///< solve and seminorm only
    ExperimentConfig config;
};

// ---------------------------------------------------------------------------
// Configuration: flat "key = value" lines, '#' starts a comment.

/// Raw key/value settings before validation; later assignments win.
using Settings = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"s",        "p",    "alpha", "mesh_sizes", "grad_tol",
                                               "max_iters", "seed", "output_dir", "mesh"};
    return keys;
}

inline void set_key(Settings& settings, const std::string& key, const std::string& value) {
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
        throw UsageError("unknown configuration key '" + key + "'");
    }
    settings[key] = value;
}

inline Settings parse_config_text(const std::string& text) {
    Settings out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        set_key(out, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

inline Settings read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) {
            throw std::invalid_argument(v);
        }
        return d;
    } catch (const std::exception&) {
        throw UsageError("invalid number for '" + key + "': '" + v + "'");
    }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') {
            throw std::invalid_argument(v);
        }
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) {
            throw std::invalid_argument(v);
        }
        return u;
    } catch (const std::exception&) {
        throw UsageError("invalid non-negative integer for '" + key + "': '" + v + "'");
    }
}

inline std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
    // comma- or whitespace-separated
    std::string spaced = v;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::vector<std::size_t> out;
    std::istringstream in(spaced);
    std::string item;
    while (in >> item) {
        out.push_back(static_cast<std::size_t>(to_uint(key, item)));
    }
    if (out.empty()) {
        throw UsageError("'" + key + "' must list at least one mesh size");
    }
    return out;
}

} // namespace detail

/// Applies settings on top of the defaults and validates the result.
/// Regime violations surface as RegimeError naming the inequality.
inline ExperimentConfig resolve_config(const Settings& settings, std::size_t* mesh = nullptr) {
    ExperimentConfig cfg;
    double s = cfg.params.s();
    double p = cfg.params.p();
    double alpha = cfg.params.alpha();
    for (const auto& [key, value] : settings) {
        if (key == "s") {
            s = detail::to_double(key, value);
        } else if (key == "p") {
            p = detail::to_double(key, value);
        } else if (key == "alpha") {
            alpha = detail::to_double(key, value);
        } else if (key == "mesh_sizes") {
            cfg.mesh_sizes = detail::to_sizes(key, value);
        } else if (key == "grad_tol") {
            cfg.solver.grad_tol = detail::to_double(key, value);
        } else if (key == "max_iters") {
            cfg.solver.max_iters = static_cast<long>(detail::to_uint(key, value));
        } else if (key == "seed") {
            cfg.seed = detail::to_uint(key, value);
        } else if (key == "output_dir") {
            cfg.output_path = value;
        } else if (key == "mesh") {
            const auto n = detail::to_uint(key, value);
            if (n < 2) {
                throw UsageError("'mesh' must be at least 2");
            }
            if (mesh != nullptr) {
                *mesh = static_cast<std::size_t>(n);
            }
        }
    }
    cfg.params = AdmissibleParams(s, p, alpha);
    try {
        cfg.validate();
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------

/// Parses argv (without the program name) and resolves the configuration:
/// defaults, then the config file, then overrides in command-line order.
inline CliInvocation parse_args(const std::vector<std::string>& argv) {
    if (argv.empty()) {
        throw UsageError("missing subcommand; expected one of: solve gap converge interp inverse lemmas recovery "
                         "seminorm all");
    }
    CLI::App app{"Cutoff finite element method for a Lavrentiev-gap problem", "mania"};
    app.allow_windows_style_options(false);
    std::string sub;
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::size_t mesh = 0;
    std::string alpha;
    std::string s;
    std::string p;
    bool repro = false;
    app.add_option("subcommand", sub, "study or action to run")->required();
    auto* o_config = app.add_option("--config", config_path, "configuration file");
    auto* o_out = app.add_option("--out", out_dir, "output directory");
    auto* o_set = app.add_option("--set", sets, "key=value override (repeatable)")->allow_extra_args(false);
    auto* o_seed = app.add_option("--seed", seed, "random seed");
    app.add_flag("--repro", repro, "fixed evaluation and accumulation order");
    auto* o_mesh = app.add_option("--mesh", mesh, "number of elements (solve, seminorm)");
    auto* o_alpha = app.add_option("--alpha", alpha, "cutoff exponent");
    auto* o_s = app.add_option("--s", s, "fractional order s");
    auto* o_p = app.add_option("--p", p, "integrability exponent p");

    std::vector<std::string> args(argv.rbegin(), argv.rend());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string(e.get_name()) + ": " + e.what());
    }
    if (std::find(subcommands().begin(), subcommands().end(), sub) == subcommands().end()) {
        throw UsageError("unknown subcommand '" + sub + "'");
    }
    if (o_mesh->count() > 0 && sub != "solve" && sub != "seminorm") {
        throw UsageError("--mesh is only valid for solve and seminorm");
    }

    CliInvocation inv;
    inv.subcommand = sub;
    inv.config_path = config_path;
    inv.repro = repro;

    // Replay options in command-line order so that the last assignment wins.
    std::size_t set_index = 0;
    for (const CLI::Option* opt : app.parse_order()) {
        if (opt == o_set) {
            const std::string& kv = sets.at(set_index++);
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw UsageError("--set expects key=value, got '" + kv + "'");
            }
            inv.overrides.emplace_back(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        } else if (opt == o_alpha) {
            inv.overrides.emplace_back("alpha", alpha);
        } else if (opt == o_s) {
            inv.overrides.emplace_back("s", s);
        } else if (opt == o_p) {
            inv.overrides.emplace_back("p", p);
        } else if (opt == o_seed) {
            inv.overrides.emplace_back("seed", std::to_string(seed));
        } else if (opt == o_mesh) {
            inv.overrides.emplace_back("mesh", std::to_string(mesh));
        } else if (opt == o_out) {
            inv.overrides.emplace_back("output_dir", out_dir);
        }
    }
    (void)o_config;

    Settings settings;
    if (!config_path.empty()) {
        settings = read_config_file(config_path);
    }
    for (const auto& [k, v] : inv.overrides) {
        set_key(settings, k, v);
    }
    inv.config = resolve_config(settings, &inv.mesh);
    inv.config.reproducible = repro;
    inv.output_dir = inv.config.output_path;
    return inv;
}

// ---------------------------------------------------------------------------

inline void print_summary(std::ostream& out, const std::vector<StudyReport>& reports) {
    out << std::left << std::setw(12) << "study" << std::setw(8) << "result" << std::setw(14) << "order"
        << std::setw(10) << "r2" << "\n";
    for (const auto& r : reports) {
        out << std::left << std::setw(12) << r.name << std::setw(8) << (r.pass() ? "PASS" : "FAIL") << std::setw(14)
            << (r.fitted_order ? mania::detail::fmt(*r.fitted_order) : "-") << std::setw(10)
            << (r.r2 ? mania::detail::fmt(*r.r2) : "-") << "\n";
        if (!r.valid) {
            out << "    error: " << r.error << "\n";
        }
        for (const auto& c : r.checks) {
            out << "    [" << (c.pass ? "ok" : "FAIL") << "] " << c.name;
            if (!c.detail.empty()) {
                out << " (" << c.detail << ")";
            }
            out << "\n";
        }
    }
}

inline StudyReport solve_report(const CliInvocation& inv, std::ostream& out) {
    const Mesh1D mesh(inv.mesh);
    const CutoffParams params = CutoffParams::for_mesh(inv.config.params.alpha(), mesh);
    const SolveResult res = minimize_enhanced(mesh, params, inv.config.solver);
    const FeFunction root = nodal_interpolant(mesh, [](double x) { return std::cbrt(x); });
    const double interp_energy = energy_enhanced(root, params);
    out << "mesh N = " << inv.mesh << ", alpha = " << params.alpha() << ", clamp = " << params.clamp() << "\n"
        << "J_h^alpha(u_h)        = " << format_number(res.energy) << "\n"
        << "J_h^alpha(I_h x^1/3)  = " << format_number(interp_energy) << "\n"
        << "gradient max-norm     = " << format_number(res.grad_norm) << "\n"
        << "iterations            = " << res.iters << (res.converged ? " (converged)" : " (not converged)") << "\n";
    StudyReport r;
    r.name = "solve";
    r.columns = {"x", "value", "interp_root"};
    for (std::size_t j = 0; j < mesh.n_nodes(); ++j) {
        r.rows.push_back({mesh.node(j), res.minimizer[j], root[j]});
    }
    r.checks.push_back({"energy finite and nonnegative", std::isfinite(res.energy) && res.energy >= 0.0,
                        "energy = " + format_number(res.energy)});
    r.checks.push_back({"energy <= J_h(I_h x^(1/3))", res.energy <= interp_energy, ""});
    r.checks.push_back({"boundary values pinned", res.minimizer[0] == 0.0 && res.minimizer[mesh.n_elements()] == 1.0,
                        ""});
    return r;
}

inline StudyReport seminorm_report(const CliInvocation& inv, std::ostream& out) {
    const Mesh1D mesh(inv.mesh);
    const double s = inv.config.params.s();
    const double p = inv.config.params.p();
    const FeFunction vh = nodal_interpolant(mesh, [](double x) { return std::cbrt(x); });
    const SeminormResult semi = seminorm_w1sp(vh, s, p);
    const double w1p = norm_wkp(vh, 1, p);
    out << "[I_h x^(1/3)]_{W^{1+s,p}} = " << format_number(semi.value) << "  (N = " << inv.mesh << ", s = " << s
        << ", p = " << p << ")\n"
        << "||I_h x^(1/3)||_{W^{1,p}}  = " << format_number(w1p) << "\n";
    StudyReport r;
    r.name = "seminorm";
    r.columns = {"h", "value", "w1p_norm", "ratio"};
    r.rows.push_back({mesh.h(), semi.value, w1p, semi.value / (std::pow(mesh.h(), -s) * w1p)});
    r.checks.push_back({"seminorm finite and nonnegative", std::isfinite(semi.value) && semi.value >= 0.0, ""});
    return r;
}

/// Executes an invocation; reports go under the resolved output directory.
inline ExitStatus run(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    try {
        std::vector<StudyReport> reports;
        if (inv.subcommand == "solve") {
            reports.push_back(solve_report(inv, out));
        } else if (inv.subcommand == "seminorm") {
            reports.push_back(seminorm_report(inv, out));
        } else if (inv.subcommand == "all") {
            reports = run_all(inv.config).reports;
        } else {
            reports = run_study(inv.subcommand, inv.config);
        }
        write_reports(inv.output_dir, reports);
        print_summary(out, reports);
        out << "reports written to " << inv.output_dir << "\n";
        const bool pass = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass(); });
        return pass ? ExitStatus::pass : ExitStatus::study_fail;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return ExitStatus::io;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return ExitStatus::io;
    }
}

/// parse_args + run with the exit-status contract: 0 pass, 1 study fail,
/// 2 usage or validation error, 3 I/O error.
inline int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CliInvocation inv;
    try {
        inv = parse_args(argv);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n"
            << "usage: mania <solve|gap|converge|interp|inverse|lemmas|recovery|seminorm|all> [--config PATH] "
               "[--out DIR] [--set key=value]... [--seed INT] [--repro] [--mesh N] [--alpha A] [--s S] [--p P]\n";
        return static_cast<int>(ExitStatus::usage);
    } catch (const RegimeError& e) {
        err << "validation error: " << e.what() << "\n";
        return static_cast<int>(ExitStatus::usage);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitStatus::io);
    }
    return static_cast<int>(run(inv, out, err));
}

} // namespace mania::cli
