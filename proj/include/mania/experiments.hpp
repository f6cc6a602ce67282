#pragma once

#include "mania/errors.hpp"
#include "mania/fractional.hpp"
#include "mania/functionals.hpp"
#include "mania/mesh.hpp"
#include "mania/optimizer.hpp"
#include "mania/report.hpp"
#include "mania/studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mania {

/// Acceptance thresholds for the studies. Changing any of these changes what "pass" means.
namespace thresholds {
inline constexpr double raw_floor_min = 1e-3;
inline constexpr double scan_agreement = 1e-3;
inline constexpr double min_energy_reduction = 0.1;
inline constexpr double interp_order_slack = 0.05;
inline constexpr double interp_r2 = 0.95;
inline constexpr double inverse_max_over_median = 1.5;
inline constexpr double lemma_order_slack = 0.1;
inline constexpr double lemma_r2 = 0.9;
inline constexpr double recovery_final_max = 1e-3;
inline constexpr double identity_gap_tol = 1e-14;
inline constexpr double reference_rel_change = 0.01;
inline constexpr double monotone_rel_slack = 1e-12;
inline constexpr double inverse_p2_beta = 0.4;
inline constexpr double lemma2_probe_exponent = 0.45;
inline constexpr std::size_t tail_drop = 2;
} // namespace thresholds

struct ExperimentConfig {
    AdmissibleParams params{0.2, 1.1, 0.035};
    std::vector<std::size_t> mesh_sizes{8, 16, 32, 64, 128, 256, 512, 1024};
    SolveConfig solver{};
    std::uint64_t seed = 20240607;
    std::string output_path = "reports";
    /// Run studies one after another in a fixed order.
    bool reproducible = false;

    void validate() const {
        if (mesh_sizes.empty()) {
            throw ParameterError("mesh_sizes must not be empty");
        }
        for (std::size_t i = 0; i < mesh_sizes.size(); ++i) {
            const std::size_t n = mesh_sizes[i];
            if (n < 2 || (n & (n - 1)) != 0) {
                throw ParameterError("mesh_sizes must be powers of 2 (>= 2), got " + std::to_string(n));
            }
            if (i > 0 && n <= mesh_sizes[i - 1]) {
                throw ParameterError("mesh_sizes must be strictly increasing");
            }
        }
        solver.validate();
    }
};

// ---------------------------------------------------------------------------
// Brute-force grid minimum over the interior values of X_h.

struct GridMinimum {
    double energy = std::numeric_limits<double>::infinity();
    std::vector<double> interior;
};

/// Exhaustive search over the grid lo, lo+step, ..., hi in every interior coordinate.
inline GridMinimum brute_force_minimum(const Mesh1D& mesh, const std::function<double(const FeFunction&)>& energy,
                                       double lo, double hi, double step) {
    const std::size_t dofs = mesh.n_elements() - 1;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    std::vector<std::size_t> idx(dofs, 0);
    std::vector<double> x(dofs, lo);
    GridMinimum best;
    while (true) {
        for (std::size_t d = 0; d < dofs; ++d) {
            x[d] = lo + static_cast<double>(idx[d]) * step;
        }
        const double e = energy(FeFunction::from_interior(mesh, x));
        if (e < best.energy) {
            best.energy = e;
            best.interior = x;
        }
        std::size_t d = 0;
        while (d < dofs && ++idx[d] == count) {
            idx[d] = 0;
            ++d;
        }
        if (d == dofs) {
            break;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Solver ladders shared by the gap demonstration and the convergence study.

/// Enhanced minimizers over the mesh ladder. Each mesh is seeded with the
/// prolongated previous solution (or a continuation solve for the first mesh)
/// and with I_h x^(1/3); the lower energy is kept.
inline std::vector<SolveResult> enhanced_ladder(const ExperimentConfig& config) {
    std::vector<SolveResult> out;
    const double alpha = config.params.alpha();
    SolveConfig direct = config.solver;
    direct.continuation = false;
    for (std::size_t n : config.mesh_sizes) {
        const Mesh1D mesh(n);
        const CutoffParams params = CutoffParams::for_mesh(alpha, mesh);
        SolveResult seeded = out.empty() ? minimize_enhanced(mesh, alpha, config.solver)
                                         : minimize_enhanced_from(prolongate(out.back().minimizer, mesh), params, direct);
        SolveResult from_root =
            minimize_enhanced_from(initial_guess(mesh, Initializer::interp_root), params, direct);
        out.push_back(from_root.energy < seeded.energy ? std::move(from_root) : std::move(seeded));
    }
    return out;
}

/// Raw-functional minimizers over the ladder by continuation from `init`.
inline std::vector<SolveResult> raw_ladder(const ExperimentConfig& config, Initializer init) {
    std::vector<SolveResult> out;
    SolveConfig first = config.solver;
    first.continuation = true;
    first.initializer = init;
    SolveConfig direct = config.solver;
    direct.continuation = false;
    for (std::size_t n : config.mesh_sizes) {
        const Mesh1D mesh(n);
        out.push_back(out.empty() ? minimize_raw(mesh, first)
                                  : minimize_raw_from(prolongate(out.back().minimizer, mesh), direct));
    }
    return out;
}

namespace detail {

template <class F>
auto run_maybe_async(bool async, F&& f) {
    return std::async(async ? std::launch::async : std::launch::deferred, std::forward<F>(f));
}

inline bool non_increasing(const std::vector<double>& v, double rel_slack) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] + rel_slack * std::abs(v[i - 1])) {
            return false;
        }
    }
    return true;
}

inline bool strictly_decreasing(const std::vector<double>& v, std::size_t from = 0) {
    for (std::size_t i = std::max<std::size_t>(from, 1); i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) {
            return false;
        }
    }
    return true;
}

inline bool all_finite_nonnegative(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x >= 0.0; });
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::vector<double> column(const RateStudy& study) {
    std::vector<double> v;
    for (const auto& r : study.rows) {
        v.push_back(r.value);
    }
    return v;
}

inline StudyReport rate_report(const std::string& name, const RateStudy& study) {
    StudyReport r;
    r.name = name;
    r.columns = {"h", "value"};
    for (const auto& [col, values] : study.extra) {
        r.columns.push_back(col);
    }
    for (std::size_t i = 0; i < study.rows.size(); ++i) {
        std::vector<double> row{study.rows[i].h, study.rows[i].value};
        for (const auto& [col, values] : study.extra) {
            row.push_back(values.at(i));
        }
        r.rows.push_back(std::move(row));
    }
    r.fitted_order = study.fitted_order;
    r.r2 = study.fit_r2;
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Gap demonstration: standard finite elements stall, the cutoff energy does not.

struct ScanComparison {
    std::size_t n_elements;
    double scan_minimum;
    double solver_minimum;
};

struct GapReport {
    std::vector<std::size_t> mesh_sizes;
    std::vector<double> raw_min_energies;
    std::vector<double> raw_from_ramp;
    std::vector<double> raw_from_root;
    std::vector<double> enhanced_min_energies;
    double raw_floor = 0.0;
    double enhanced_trend_order = 0.0;
    double enhanced_trend_r2 = 0.0;
    std::vector<ScanComparison> scans;
};

/// Raw minimum at N = 2 and N = 3: grid search against the solver from both initializers.
inline std::vector<ScanComparison> raw_scan_comparisons(const SolveConfig& solver) {
    std::vector<ScanComparison> out;
    SolveConfig direct = solver;
    direct.continuation = false;
    for (std::size_t n : {std::size_t{2}, std::size_t{3}}) {
        const Mesh1D mesh(n);
        const GridMinimum grid =
            brute_force_minimum(mesh, [](const FeFunction& f) { return energy_mania(f); }, -0.1, 1.2, 2e-3);
        double best = std::numeric_limits<double>::infinity();
        for (Initializer init : {Initializer::linear_ramp, Initializer::interp_root}) {
            direct.initializer = init;
            best = std::min(best, minimize_raw(mesh, direct).energy);
        }
        out.push_back({n, grid.energy, best});
    }
    return out;
}

inline GapReport run_gap_demo(const ExperimentConfig& config) {
    config.validate();
    const bool async = !config.reproducible;
    auto ramp = detail::run_maybe_async(async, [&] { return raw_ladder(config, Initializer::linear_ramp); });
    auto root = detail::run_maybe_async(async, [&] { return raw_ladder(config, Initializer::interp_root); });
    auto enh = detail::run_maybe_async(async, [&] { return enhanced_ladder(config); });
    auto scans = detail::run_maybe_async(async, [&] { return raw_scan_comparisons(config.solver); });

    GapReport rep;
    rep.mesh_sizes = config.mesh_sizes;
    const auto ramp_r = ramp.get();
    const auto root_r = root.get();
    const auto enh_r = enh.get();
    for (std::size_t i = 0; i < config.mesh_sizes.size(); ++i) {
        rep.raw_from_ramp.push_back(ramp_r[i].energy);
        rep.raw_from_root.push_back(root_r[i].energy);
        rep.raw_min_energies.push_back(std::min(ramp_r[i].energy, root_r[i].energy));
        rep.enhanced_min_energies.push_back(enh_r[i].energy);
    }
    rep.raw_floor = *std::min_element(rep.raw_min_energies.begin(), rep.raw_min_energies.end());
    std::vector<RateRow> rows;
    for (std::size_t i = 0; i < config.mesh_sizes.size(); ++i) {
        rows.push_back({1.0 / static_cast<double>(config.mesh_sizes[i]), rep.enhanced_min_energies[i]});
    }
    if (rows.size() >= 3) {
        const OrderFit fit = fit_order(rows);
        rep.enhanced_trend_order = fit.order;
        rep.enhanced_trend_r2 = fit.r2;
    }
    rep.scans = scans.get();
    return rep;
}

inline StudyReport gap_report(const GapReport& g) {
    StudyReport r;
    r.name = "gap";
    r.columns = {"h", "value", "raw_from_linear_ramp", "raw_from_interp_root", "enhanced_min"};
    for (std::size_t i = 0; i < g.mesh_sizes.size(); ++i) {
        r.rows.push_back({1.0 / static_cast<double>(g.mesh_sizes[i]), g.raw_min_energies[i], g.raw_from_ramp[i],
                          g.raw_from_root[i], g.enhanced_min_energies[i]});
    }
    r.fitted_order = g.enhanced_trend_order;
    r.r2 = g.enhanced_trend_r2;
    using namespace thresholds;
    r.checks.push_back({"raw_floor >= 1e-3", g.raw_floor >= raw_floor_min, "raw_floor = " + detail::fmt(g.raw_floor)});
    const double finest = g.enhanced_min_energies.back();
    r.checks.push_back({"enhanced minimum on finest mesh < raw_floor", finest < g.raw_floor,
                        "enhanced = " + detail::fmt(finest)});
    bool below = true;
    for (std::size_t i = 0; i < g.mesh_sizes.size(); ++i) {
        below = below && g.enhanced_min_energies[i] <= g.raw_min_energies[i];
    }
    r.checks.push_back({"enhanced <= raw on every mesh", below, ""});
    bool decreasing = true;
    for (std::size_t i = 1; i < g.mesh_sizes.size(); ++i) {
        if (g.mesh_sizes[i - 1] >= 32) {
            decreasing = decreasing && g.enhanced_min_energies[i] < g.enhanced_min_energies[i - 1];
        }
    }
    r.checks.push_back({"enhanced minima strictly decreasing for N >= 32", decreasing, ""});
    r.checks.push_back({"raw minima non-increasing in N", detail::non_increasing(g.raw_min_energies, monotone_rel_slack),
                        ""});
    r.checks.push_back({"energies finite and nonnegative",
                        detail::all_finite_nonnegative(g.raw_min_energies) &&
                            detail::all_finite_nonnegative(g.enhanced_min_energies),
                        ""});
    for (const auto& s : g.scans) {
        const double diff = std::abs(s.scan_minimum - s.solver_minimum);
        r.checks.push_back({"grid scan agrees with raw solver at N=" + std::to_string(s.n_elements),
                            diff <= scan_agreement,
                            "scan = " + detail::fmt(s.scan_minimum) + ", solver = " + detail::fmt(s.solver_minimum)});
    }
    return r;
}

// ---------------------------------------------------------------------------
// Convergence of the discrete minimum values.

inline RateStudy run_min_convergence(const ExperimentConfig& config) {
    config.validate();
    const auto solves = enhanced_ladder(config);
    const ScalarFunction root = ScalarFunction::power(1.0 / 3.0);
    RateStudy study{StudyTarget::min_energy, config.params, config.mesh_sizes, {}, {}, 0.0, 0.0, 0};
    std::vector<double> interp_energy;
    std::vector<double> w1p_error;
    std::vector<double> iters;
    std::vector<double> grad_norm;
    std::vector<double> converged;
    for (std::size_t i = 0; i < solves.size(); ++i) {
        const Mesh1D mesh(config.mesh_sizes[i]);
        const CutoffParams params = CutoffParams::for_mesh(config.params.alpha(), mesh);
        study.rows.push_back({mesh.h(), solves[i].energy});
        interp_energy.push_back(energy_enhanced(nodal_interpolant(mesh, root.value), params));
        w1p_error.push_back(fe_error(solves[i].minimizer, root, config.params.p(), 1));
        iters.push_back(static_cast<double>(solves[i].iters));
        grad_norm.push_back(solves[i].grad_norm);
        converged.push_back(solves[i].converged ? 1.0 : 0.0);
    }
    study.extra = {{"interp_energy", interp_energy},
                   {"w1p_error", w1p_error},
                   {"iters", iters},
                   {"grad_norm", grad_norm},
                   {"converged", converged}};
    if (study.rows.size() >= 3) {
        study.fit(0);
    }
    return study;
}

inline StudyReport converge_report(const RateStudy& study) {
    StudyReport r = detail::rate_report("converge", study);
    const auto values = detail::column(study);
    const auto& interp = study.extra.at(0).second;
    r.checks.push_back({"minimum energies finite and nonnegative", detail::all_finite_nonnegative(values), ""});
    r.checks.push_back({"minimum energies non-increasing in N", detail::non_increasing(values, 0.0), ""});
    r.checks.push_back({"final <= 0.1 x first", values.back() <= thresholds::min_energy_reduction * values.front(),
                        "first = " + detail::fmt(values.front()) + ", final = " + detail::fmt(values.back())});
    bool sandwich = true;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sandwich = sandwich && values[i] >= 0.0 && values[i] <= interp[i];
    }
    r.checks.push_back({"0 <= J_h(u_h) <= J_h(I_h x^(1/3)) on every mesh", sandwich, ""});
    return r;
}

// ---------------------------------------------------------------------------
// Interpolation rates for the cube-root minimizer.

struct InterpStudies {
    RateStudy lp;
    RateStudy w1p;
};

inline InterpStudies run_interp_study(const ExperimentConfig& config) {
    config.validate();
    const ScalarFunction root = ScalarFunction::power(1.0 / 3.0);
    const double p = config.params.p();
    InterpStudies out{{StudyTarget::lp_error, config.params, config.mesh_sizes, {}, {}, 0.0, 0.0, 0},
                      {StudyTarget::w1p_error, config.params, config.mesh_sizes, {}, {}, 0.0, 0.0, 0}};
    for (std::size_t n : config.mesh_sizes) {
        const Mesh1D mesh(n);
        out.lp.rows.push_back({mesh.h(), interp_error(root, mesh, p, 0)});
        out.w1p.rows.push_back({mesh.h(), interp_error(root, mesh, p, 1)});
    }
    out.lp.fit(thresholds::tail_drop);
    out.w1p.fit(thresholds::tail_drop);
    return out;
}

inline std::vector<StudyReport> interp_reports(const InterpStudies& s) {
    const double sv = s.lp.params.s();
    StudyReport lp = detail::rate_report("interp_lp", s.lp);
    const double lp_min = 1.0 + sv - thresholds::interp_order_slack;
    lp.checks.push_back({"L^p error order >= 1+s-0.05", s.lp.fitted_order >= lp_min,
                         "order = " + detail::fmt(s.lp.fitted_order) + ", bound = " + detail::fmt(lp_min)});
    lp.checks.push_back({"r2 >= 0.95", s.lp.fit_r2 >= thresholds::interp_r2, "r2 = " + detail::fmt(s.lp.fit_r2)});
    StudyReport w = detail::rate_report("interp_w1p", s.w1p);
    const double w_min = sv - thresholds::interp_order_slack;
    w.checks.push_back({"W^{1,p} error order >= s-0.05", s.w1p.fitted_order >= w_min,
                        "order = " + detail::fmt(s.w1p.fitted_order) + ", bound = " + detail::fmt(w_min)});
    w.checks.push_back({"r2 >= 0.95", s.w1p.fit_r2 >= thresholds::interp_r2, "r2 = " + detail::fmt(s.w1p.fit_r2)});
    return {lp, w};
}

// ---------------------------------------------------------------------------
// Fractional inverse inequality for I_h x^(1/3).

/// Rows (h, [v_h]_{W^{1+s,p}} / (h^-s ||v_h||_{W^{1,p}})) for v_h = I_h x^(1/3).
inline RateStudy inverse_ratio_study(const std::vector<std::size_t>& mesh_sizes, double s, double p,
                                     const AdmissibleParams& tag) {
    const FractionalIndex index(s, p);
    if (!index.inverse_regime()) {
        throw RegimeError("sp < 1 violated");
    }
    RateStudy study{StudyTarget::seminorm_growth, tag, mesh_sizes, {}, {}, 0.0, 0.0, 0};
    std::vector<double> semi;
    std::vector<double> norm;
    for (std::size_t n : mesh_sizes) {
        const Mesh1D mesh(n);
        const FeFunction vh = nodal_interpolant(mesh, [](double x) { return std::cbrt(x); });
        const double sn = seminorm_w1sp(vh, s, p).value;
        const double nm = norm_wkp(vh, 1, p);
        semi.push_back(sn);
        norm.push_back(nm);
        study.rows.push_back({mesh.h(), sn / (std::pow(mesh.h(), -s) * nm)});
    }
    study.extra = {{"seminorm", semi}, {"w1p_norm", norm}};
    if (study.rows.size() >= 3) {
        study.fit(0);
    }
    return study;
}

struct InverseStudies {
    RateStudy primary;
    RateStudy hilbert; ///< p = 2, beta = 0.4
};

inline InverseStudies run_inverse_study(const ExperimentConfig& config) {
    config.validate();
    return {inverse_ratio_study(config.mesh_sizes, config.params.s(), config.params.p(), config.params),
            inverse_ratio_study(config.mesh_sizes, thresholds::inverse_p2_beta, 2.0, config.params)};
}

inline StudyReport bounded_ratio_report(const std::string& name, const RateStudy& study) {
    StudyReport r = detail::rate_report(name, study);
    const auto v = detail::column(study);
    const double mx = *std::max_element(v.begin(), v.end());
    const double med = detail::median(v);
    r.checks.push_back({"max ratio <= 1.5 x median", mx <= thresholds::inverse_max_over_median * med,
                        "max = " + detail::fmt(mx) + ", median = " + detail::fmt(med)});
    r.checks.push_back({"ratios finite and nonnegative", detail::all_finite_nonnegative(v), ""});
    return r;
}

inline std::vector<StudyReport> inverse_reports(const InverseStudies& s) {
    return {bounded_ratio_report("inverse", s.primary), bounded_ratio_report("inverse_p2", s.hilbert)};
}

// ---------------------------------------------------------------------------
// Error-splitting lemma rates.

struct LemmaStudies {
    RateStudy lemma1;
    RateStudy lemma2;
};

inline LemmaStudies run_lemma_study(const ExperimentConfig& config) {
    config.validate();
    const ScalarFunction root = ScalarFunction::power(1.0 / 3.0);
    const ScalarFunction probe = ScalarFunction::power(thresholds::lemma2_probe_exponent);
    LemmaStudies out{{StudyTarget::lemma1_qty, config.params, config.mesh_sizes, {}, {}, 0.0, 0.0, 0},
                     {StudyTarget::lemma2_qty, config.params, config.mesh_sizes, {}, {}, 0.0, 0.0, 0}};
    for (std::size_t n : config.mesh_sizes) {
        const Mesh1D mesh(n);
        const CutoffParams params = CutoffParams::for_mesh(config.params.alpha(), mesh);
        out.lemma1.rows.push_back({mesh.h(), std::abs(lemma1_quantity(root, mesh, params))});
        out.lemma2.rows.push_back({mesh.h(), lemma2_quantity(probe, mesh, params)});
    }
    out.lemma1.fit(thresholds::tail_drop);
    out.lemma2.fit(thresholds::tail_drop);
    return out;
}

inline std::vector<StudyReport> lemma_reports(const LemmaStudies& s) {
    const double sv = s.lemma1.params.s();
    const double a = s.lemma1.params.alpha();
    StudyReport l1 = detail::rate_report("lemma1", s.lemma1);
    const double b1 = 1.0 + sv - 6.0 * a - thresholds::lemma_order_slack;
    l1.checks.push_back({"order >= 1+s-6alpha-0.1", s.lemma1.fitted_order >= b1,
                         "order = " + detail::fmt(s.lemma1.fitted_order) + ", bound = " + detail::fmt(b1)});
    l1.checks.push_back({"r2 >= 0.9", s.lemma1.fit_r2 >= thresholds::lemma_r2, "r2 = " + detail::fmt(s.lemma1.fit_r2)});
    StudyReport l2 = detail::rate_report("lemma2", s.lemma2);
    const double b2 = sv - 5.0 * a - thresholds::lemma_order_slack;
    l2.checks.push_back({"order >= s-5alpha-0.1", s.lemma2.fitted_order >= b2,
                         "order = " + detail::fmt(s.lemma2.fitted_order) + ", bound = " + detail::fmt(b2)});
    l2.checks.push_back({"r2 >= 0.9", s.lemma2.fit_r2 >= thresholds::lemma_r2, "r2 = " + detail::fmt(s.lemma2.fit_r2)});
    l2.checks.push_back({"decreasing over the tail",
                         detail::strictly_decreasing(detail::column(s.lemma2), thresholds::tail_drop), ""});
    return {l1, l2};
}

// ---------------------------------------------------------------------------
// Recovery sequence: J_h^alpha(I_h v) - J(v).

struct RecoveryStudy {
    RateStudy root_gap;
    std::vector<double> identity_gap;
    std::vector<bool> identity_unclamped; ///< J_h^alpha(I_h x) == J(I_h x) bit for bit
    ReferenceEnergy root_reference{0.0, 0.0};
    ReferenceEnergy identity_reference{0.0, 0.0};
};

inline RecoveryStudy run_recovery_study(const ExperimentConfig& config) {
    config.validate();
    const ScalarFunction root = ScalarFunction::power(1.0 / 3.0);
    const ScalarFunction identity = ScalarFunction::identity();
    RecoveryStudy out{{StudyTarget::recovery_gap, config.params, config.mesh_sizes, {}, {}, 0.0, 0.0, 0}, {}, {}, {}, {}};
    const std::size_t finest = config.mesh_sizes.back();
    out.root_reference = reference_energy(root, finest);
    out.identity_reference = reference_energy(identity, finest);
    std::vector<double> clamps;
    for (std::size_t n : config.mesh_sizes) {
        const Mesh1D mesh(n);
        const CutoffParams params = CutoffParams::for_mesh(config.params.alpha(), mesh);
        out.root_gap.rows.push_back({mesh.h(), recovery_gap(root, mesh, params, out.root_reference.value)});
        out.identity_gap.push_back(recovery_gap(identity, mesh, params, out.identity_reference.value));
        const FeFunction ih = nodal_interpolant(mesh, identity.value);
        out.identity_unclamped.push_back(energy_enhanced(ih, params) == energy_mania(ih));
        clamps.push_back(params.clamp());
    }
    out.root_gap.extra = {{"identity_gap", out.identity_gap}, {"clamp", clamps}};
    out.root_gap.fit(0);
    return out;
}

inline StudyReport recovery_report(const RecoveryStudy& s) {
    StudyReport r = detail::rate_report("recovery", s.root_gap);
    const auto v = detail::column(s.root_gap);
    r.checks.push_back({"J_h(I_h x^(1/3)) <= 1e-3 on finest mesh", v.back() <= thresholds::recovery_final_max,
                        "final = " + detail::fmt(v.back())});
    r.checks.push_back({"recovery gap decreasing over the ladder", detail::strictly_decreasing(v), ""});
    bool zero = true;
    for (double g : s.identity_gap) {
        zero = zero && std::abs(g) <= thresholds::identity_gap_tol;
    }
    r.checks.push_back({"identity gap zero (|gap| <= 1e-14)", zero, ""});
    r.checks.push_back({"identity never clamped",
                        std::all_of(s.identity_unclamped.begin(), s.identity_unclamped.end(), [](bool b) { return b; }),
                        ""});
    const auto ref_ok = [](const ReferenceEnergy& e) {
        return std::abs(e.value) < 1e-14 || e.relative_change < thresholds::reference_rel_change;
    };
    r.checks.push_back({"reference energies resolved (change < 1%)", ref_ok(s.root_reference) && ref_ok(s.identity_reference),
                        "J(x^(1/3)) = " + detail::fmt(s.root_reference.value) +
                            ", J(x) = " + detail::fmt(s.identity_reference.value)});
    return r;
}

// ---------------------------------------------------------------------------

struct ReportBundle {
    std::vector<StudyReport> reports;
    bool partial = false;

    bool pass() const {
        return !partial && std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass(); });
    }
};

inline StudyReport failed_report(const std::string& name, const std::string& what) {
    StudyReport r;
    r.name = name;
    r.valid = false;
    r.error = what;
    return r;
}

namespace detail {

template <class F>
std::vector<StudyReport> guarded(const std::vector<std::string>& names, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        std::vector<StudyReport> out;
        for (const auto& n : names) {
            out.push_back(failed_report(n, e.what()));
        }
        return out;
    }
}

} // namespace detail

/// Named study groups, each producing one or more reports.
inline std::vector<StudyReport> run_study(const std::string& which, const ExperimentConfig& config) {
    if (which == "gap") {
        return detail::guarded({"gap"}, [&] { return std::vector{gap_report(run_gap_demo(config))}; });
    }
    if (which == "converge") {
        return detail::guarded({"converge"}, [&] { return std::vector{converge_report(run_min_convergence(config))}; });
    }
    if (which == "interp") {
        return detail::guarded({"interp_lp", "interp_w1p"}, [&] { return interp_reports(run_interp_study(config)); });
    }
    if (which == "inverse") {
        return detail::guarded({"inverse", "inverse_p2"}, [&] { return inverse_reports(run_inverse_study(config)); });
    }
    if (which == "lemmas") {
        return detail::guarded({"lemma1", "lemma2"}, [&] { return lemma_reports(run_lemma_study(config)); });
    }
    if (which == "recovery") {
        return detail::guarded({"recovery"}, [&] { return std::vector{recovery_report(run_recovery_study(config))}; });
    }
    throw ParameterError("unknown study: " + which);
}

inline const std::vector<std::string>& study_names() {
    static const std::vector<std::string> names{"gap", "converge", "interp", "inverse", "lemmas", "recovery"};
    return names;
}

/// Every study; concurrent unless `config.reproducible`. Reports come back in a fixed order.
inline ReportBundle run_all(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::future<std::vector<StudyReport>>> jobs;
    for (const auto& name : study_names()) {
        jobs.push_back(detail::run_maybe_async(!config.reproducible, [&config, name] { return run_study(name, config); }));
    }
    ReportBundle bundle;
    for (auto& job : jobs) {
        for (auto& r : job.get()) {
            bundle.partial = bundle.partial || !r.valid;
            bundle.reports.push_back(std::move(r));
        }
    }
    return bundle;
}

} // namespace mania
