#pragma once

#include "mania/errors.hpp"
#include "mania/mesh.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace mania {

/// Gauss-Legendre rule on the reference interval [-1,1].
struct QuadRule {
    std::vector<double> points;
    std::vector<double> weights;
    int degree_exact = 0;

    std::size_t size() const noexcept { return points.size(); }
};

namespace detail {

// Newton iteration on P_m (m >= 2) from the Chebyshev-like initial guess.
inline QuadRule compute_gauss_rule(int m) {
    QuadRule rule;
    rule.points.assign(static_cast<std::size_t>(m), 0.0);
    rule.weights.assign(static_cast<std::size_t>(m), 0.0);
    rule.degree_exact = 2 * m - 1;
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= m; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(m - 1 - i);
        rule.points[lo] = -x;
        rule.points[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (m % 2 == 1) {
        rule.points[static_cast<std::size_t>(m / 2)] = 0.0;
    }
    return rule;
}

inline constexpr int kMaxGaussPoints = 32;

inline const std::array<QuadRule, kMaxGaussPoints>& gauss_table() {
    static const std::array<QuadRule, kMaxGaussPoints> table = [] {
        std::array<QuadRule, kMaxGaussPoints> t;
        t[0] = QuadRule{{0.0}, {2.0}, 1};
        for (int m = 2; m <= kMaxGaussPoints; ++m) {
            t[static_cast<std::size_t>(m - 1)] = compute_gauss_rule(m);
        }
        return t;
    }();
    return table;
}

} // namespace detail

/// m-point Gauss-Legendre rule, 1 <= m <= 32; exact for polynomials of degree 2m-1.
inline const QuadRule& gauss_rule(int m) {
    if (m < 1 || m > detail::kMaxGaussPoints) {
        throw ParameterError("gauss_rule: number of points must be in [1, 32], got " + std::to_string(m));
    }
    return detail::gauss_table()[static_cast<std::size_t>(m - 1)];
}

/// Affine-mapped quadrature of g over (a, b).
template <class F>
double integrate_element(const QuadRule& rule, F&& g, double a, double b) {
    if (!(a < b)) {
        throw DomainError("integrate_element: require a < b");
    }
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double gx = g(mid + half * rule.points[i]);
        if (!std::isfinite(gx)) {
            throw EvaluationError("integrate_element: non-finite integrand value");
        }
        sum += rule.weights[i] * gx;
    }
    return sum * half;
}

/// Sum of element integrals over a uniform mesh.
template <class F>
double integrate_composite(const QuadRule& rule, F&& g, const Mesh1D& mesh) {
    double sum = 0.0;
    for (std::size_t k = 0; k < mesh.n_elements(); ++k) {
        sum += integrate_element(rule, g, mesh.node(k), mesh.node(k + 1));
    }
    return sum;
}

/// Settings for integrating functions with an integrable singularity at x = 0.
struct GradedQuadrature {
    int points = 8;        ///< Gauss points per sub-interval
    int refine = 8;        ///< sub-intervals per mesh element
    int grading_levels = 20;  ///< first element split at h*2^-j, j = 0..grading_levels
};

/// Integral of g over (a, b) where g may be singular at a = 0: the interval is
/// split at a + (b-a)*2^-j for j = 1..levels, and each piece gets the rule.
template <class F>
double integrate_graded_near_zero(const QuadRule& rule, F&& g, double a, double b, int levels) {
    double sum = 0.0;
    double right = b;
    for (int j = 1; j <= levels + 1; ++j) {
        const double left = a + (b - a) * std::ldexp(1.0, -j);
        sum += integrate_element(rule, g, left, right);
        right = left;
    }
    sum += integrate_element(rule, g, a, right);
    return sum;
}

/// Integral over (a, b) split into `cfg.refine` equal pieces; the piece touching
/// x = 0 is additionally graded toward the origin.
template <class F>
double integrate_study_element(const GradedQuadrature& cfg, F&& g, double a, double b) {
    const QuadRule& rule = gauss_rule(cfg.points);
    const double step = (b - a) / cfg.refine;
    double sum = 0.0;
    for (int i = 0; i < cfg.refine; ++i) {
        const double lo = a + i * step;
        const double hi = (i + 1 == cfg.refine) ? b : a + (i + 1) * step;
        if (lo == 0.0) {
            sum += integrate_graded_near_zero(rule, g, lo, hi, cfg.grading_levels);
        } else {
            sum += integrate_element(rule, g, lo, hi);
        }
    }
    return sum;
}

/// Composite graded study quadrature over all elements of `mesh`.
template <class F>
double integrate_study(const GradedQuadrature& cfg, F&& g, const Mesh1D& mesh) {
    double sum = 0.0;
    for (std::size_t k = 0; k < mesh.n_elements(); ++k) {
        sum += integrate_study_element(cfg, g, mesh.node(k), mesh.node(k + 1));
    }
    return sum;
}

} // namespace mania
