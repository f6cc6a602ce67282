#pragma once

#include "mania/errors.hpp"
#include "mania/fractional.hpp"
#include "mania/functionals.hpp"
#include "mania/mesh.hpp"
#include "mania/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace mania {

enum class StudyTarget { lp_error, w1p_error, seminorm_growth, lemma1_qty, lemma2_qty, recovery_gap, min_energy };

inline const char* to_string(StudyTarget t) {
    switch (t) {
    case StudyTarget::lp_error: return "lp_error";
    case StudyTarget::w1p_error: return "w1p_error";
    case StudyTarget::seminorm_growth: return "seminorm_growth";
    case StudyTarget::lemma1_qty: return "lemma1_qty";
    case StudyTarget::lemma2_qty: return "lemma2_qty";
    case StudyTarget::recovery_gap: return "recovery_gap";
    case StudyTarget::min_energy: return "min_energy";
    }
    return "?";
}

struct RateRow {
    double h;
    double value;
};

struct OrderFit {
    double order;
    double r2;
};

/// Least-squares slope of log(value) against log(h), with R^2.
/// Rows with value < 1e-14 count as converged to zero and are dropped.
inline OrderFit fit_order(const std::vector<RateRow>& rows) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        if (r.value >= 1e-14 && r.h > 0.0) {
            pts.emplace_back(std::log(r.h), std::log(r.value));
        }
    }
    if (pts.size() < 3) {
        throw StudyError("fit_order: need at least 3 rows with positive values");
    }
    const double n = static_cast<double>(pts.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) {
        throw StudyError("fit_order: all rows share the same h");
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (const auto& [x, y] : pts) {
        const double e = y - (my + slope * (x - mx));
        ss_res += e * e;
    }
    // A flat sequence is fitted perfectly by slope 0.
    const double r2 = syy <= 1e-28 * n ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    return {slope, r2};
}

/// Rows of a convergence study plus the fitted order on its tail.
struct RateStudy {
    StudyTarget target;
    AdmissibleParams params;
    std::vector<std::size_t> mesh_sizes;
    std::vector<RateRow> rows;
    /// Extra per-row diagnostics, written as additional CSV columns.
    std::vector<std::pair<std::string, std::vector<double>>> extra;
    double fitted_order = 0.0;
    double fit_r2 = 0.0;
    std::size_t dropped_coarse = 0;

    /// Fit on rows[drop..]; the default drop of 2 removes the pre-asymptotic coarse meshes.
    void fit(std::size_t drop = 2) {
        dropped_coarse = drop;
        const std::vector<RateRow> tail(rows.begin() + static_cast<std::ptrdiff_t>(std::min(drop, rows.size())),
                                        rows.end());
        const OrderFit f = fit_order(tail);
        fitted_order = f.order;
        fit_r2 = f.r2;
    }
};

namespace detail {

inline double interp_on_element(double a, double b, double va, double vb, double x) {
    return va + (x - a) / (b - a) * (vb - va);
}

} // namespace detail

/// ||v - f||_{L^p} (order 0) or ||v - f||_{W^{1,p}} (order 1) for a piecewise-linear f,
/// with graded study quadrature on each element.
inline double fe_error(const FeFunction& f, const ScalarFunction& v, double p, int order,
                       const GradedQuadrature& quad = {}) {
    if (order != 0 && order != 1) {
        throw ParameterError("fe_error: order must be 0 or 1");
    }
    if (!(p >= 1.0)) {
        throw ParameterError("fe_error: p must be >= 1");
    }
    const Mesh1D& mesh = f.mesh();
    double sum = 0.0;
    for (std::size_t k = 0; k < mesh.n_elements(); ++k) {
        const double a = mesh.node(k);
        const double b = mesh.node(k + 1);
        const double va = f[k];
        const double vb = f[k + 1];
        const double slope = derivative_on_element(f, k);
        sum += integrate_study_element(
            quad, [&](double x) { return std::pow(std::abs(v(x) - detail::interp_on_element(a, b, va, vb, x)), p); },
            a, b);
        if (order == 1) {
            sum += integrate_study_element(
                quad, [&](double x) { return std::pow(std::abs(v.derivative(x) - slope), p); }, a, b);
        }
    }
    return std::pow(sum, 1.0 / p);
}

/// Interpolation error with the nodal interpolant as K_h: ||v - I_h v|| in L^p or W^{1,p}.
inline double interp_error(const ScalarFunction& v, const Mesh1D& mesh, double p, int order,
                           const GradedQuadrature& quad = {}) {
    return fe_error(nodal_interpolant(mesh, v.value), v, p, order, quad);
}

/// int_0^1 chi((I_h v)')^6 [((I_h v)^3 - x)^2 - (v^3 - x)^2] dx.
inline double lemma1_quantity(const ScalarFunction& v, const Mesh1D& mesh, const CutoffParams& params,
                              const GradedQuadrature& quad = {}) {
    const FeFunction ih = nodal_interpolant(mesh, v.value);
    double sum = 0.0;
    for (std::size_t k = 0; k < mesh.n_elements(); ++k) {
        const double a = mesh.node(k);
        const double b = mesh.node(k + 1);
        const double va = ih[k];
        const double vb = ih[k + 1];
        const double factor = std::pow(cutoff(params, derivative_on_element(ih, k)), 6);
        sum += factor * integrate_study_element(
                            quad,
                            [&](double x) {
                                const double w = detail::interp_on_element(a, b, va, vb, x);
                                const double r_h = w * w * w - x;
                                const double vx = v(x);
                                const double r = vx * vx * vx - x;
                                return r_h * r_h - r * r;
                            },
                            a, b);
    }
    return sum;
}

/// int_0^1 |chi((I_h v)')^6 - chi(v')^6| (v^3 - x)^2 dx; always >= 0.
inline double lemma2_quantity(const ScalarFunction& v, const Mesh1D& mesh, const CutoffParams& params,
                              const GradedQuadrature& quad = {}) {
    const FeFunction ih = nodal_interpolant(mesh, v.value);
    double sum = 0.0;
    for (std::size_t k = 0; k < mesh.n_elements(); ++k) {
        const double factor = std::pow(cutoff(params, derivative_on_element(ih, k)), 6);
        sum += integrate_study_element(
            quad,
            [&](double x) {
                const double vx = v(x);
                const double r = vx * vx * vx - x;
                return std::abs(factor - std::pow(cutoff(params, v.derivative(x)), 6)) * r * r;
            },
            mesh.node(k), mesh.node(k + 1));
    }
    return detail::checked_energy(sum, "lemma2_quantity");
}

/// J_h^alpha(I_h v) - J(v) for the recovery sequence of nodal interpolants.
inline double recovery_gap(const ScalarFunction& v, const Mesh1D& mesh, const CutoffParams& params,
                           double reference) {
    return energy_enhanced(nodal_interpolant(mesh, v.value), params) - reference;
}

/// J(v) on a study mesh `refine`x finer than `finest`, with the relative change
/// against half that resolution reported for a Richardson-style sanity check.
struct ReferenceEnergy {
    double value;
    double relative_change;
};

inline ReferenceEnergy reference_energy(const ScalarFunction& v, std::size_t finest, std::size_t refine = 8,
                                        const GradedQuadrature& quad = {}) {
    const double fine = energy_mania_general(v, Mesh1D(finest * refine), quad);
    const double coarse = energy_mania_general(v, Mesh1D(finest * refine / 2), quad);
    const double rel = fine == 0.0 ? std::abs(coarse) : std::abs(fine - coarse) / std::abs(fine);
    return {fine, rel};
}

} // namespace mania
