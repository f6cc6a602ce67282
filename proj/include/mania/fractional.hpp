#pragma once

#include "mania/errors.hpp"
#include "mania/functionals.hpp"
#include "mania/mesh.hpp"
#include "mania/quadrature.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace mania {

/// Fractional index (s, p) with the regime flags used by the estimates.
struct FractionalIndex {
    double s;
    double p;

    FractionalIndex(double s_, double p_) : s(s_), p(p_) {
        if (!(s > 0.0 && s < 1.0)) {
            throw RegimeError("0 < s < 1 violated");
        }
        if (!(p >= 1.0) || !std::isfinite(p)) {
            throw RegimeError("p >= 1 violated");
        }
    }

    double sp() const noexcept { return s * p; }
    /// sp < 1: piecewise-linear functions have finite W^{1+s,p} seminorm.
    bool inverse_regime() const noexcept { return sp() < 1.0; }
    /// (2/3 + s) p < 1: the cube-root minimizer lies in W^{1+s,p}.
    bool minimizer_regime() const noexcept { return (2.0 / 3.0 + s) * p < 1.0; }
};

/// Piecewise-constant function on a uniform mesh, one value per element.
struct PiecewiseConstant {
    Mesh1D mesh;
    std::vector<double> values;

    PiecewiseConstant(Mesh1D m, std::vector<double> v) : mesh(m), values(std::move(v)) {
        if (values.size() != mesh.n_elements()) {
            throw ParameterError("PiecewiseConstant: expected one value per element");
        }
    }

    /// Element slopes of a piecewise-linear function.
    static PiecewiseConstant derivative_of(const FeFunction& f) { return {f.mesh(), element_slopes(f)}; }
};

enum class SeminormMethod { closed_form, quadrature, monte_carlo };

struct SeminormResult {
    double value = 0.0;
    double s = 0.0;
    double p = 0.0;
    SeminormMethod method = SeminormMethod::closed_form;
    double est_error = 0.0;
};

namespace detail {

inline void require_sp_below_one(double s, double p, const char* who) {
    if (!(s > 0.0 && s < 1.0) || !(p >= 1.0)) {
        throw RegimeError(std::string(who) + ": require 0 < s < 1 and p >= 1");
    }
    if (!(s * p < 1.0)) {
        throw RegimeError(std::string(who) + ": sp < 1 violated");
    }
}

} // namespace detail

/// Kernel mass K = int_a^b int_c^d |x - y|^-(1+sigma) dy dx for b <= c and 0 < sigma < 1.
///
/// With Phi(t) = t^(1-sigma) / (sigma (1-sigma)) the double antiderivative gives
///   K = Phi(c-a) + Phi(d-b) - Phi(c-b) - Phi(d-a),
/// finite for touching intervals because Phi(0) = 0.
inline double pair_kernel(double a, double b, double c, double d, double sigma) {
    if (!(a < b && b <= c && c < d)) {
        throw DomainError("pair_kernel: require a < b <= c < d");
    }
    const double q = 1.0 - sigma;
    const auto phi = [q](double t) { return t > 0.0 ? std::pow(t, q) : 0.0; };
    const double k = (phi(c - a) + phi(d - b) - phi(c - b) - phi(d - a)) / (sigma * q);
    return k;
}

/// Kernel masses for element pairs at index distance m = 1..N-1 on a uniform mesh.
///
/// K_m = h^(1-sigma) [2 m^q - (m-1)^q - (m+1)^q] / (sigma q), with the second
/// difference evaluated through expm1/log1p so that far pairs keep full precision.
inline std::vector<double> uniform_pair_kernels(const Mesh1D& mesh, double sigma) {
    const std::size_t n = mesh.n_elements();
    const double q = 1.0 - sigma;
    const double scale = std::pow(mesh.h(), q) / (sigma * q);
    std::vector<double> k(n, 0.0);
    for (std::size_t m = 1; m < n; ++m) {
        const double md = static_cast<double>(m);
        double second_diff;
        if (m == 1) {
            second_diff = 2.0 - std::pow(2.0, q);
        } else {
            const double up = std::expm1(q * std::log1p(1.0 / md));
            const double dn = std::expm1(q * std::log1p(-1.0 / md));
            second_diff = -std::pow(md, q) * (up + dn);
        }
        k[m] = scale * second_diff;
    }
    return k;
}

/// Gagliardo seminorm [g]_{W^{s,p}(0,1)} of a piecewise constant, in closed form:
///   [g]^p = sum_{i != j} |g_i - g_j|^p K(I_i, I_j).
inline SeminormResult gagliardo_pc(const PiecewiseConstant& g, double s, double p) {
    detail::require_sp_below_one(s, p, "gagliardo_pc");
    const std::vector<double> kernel = uniform_pair_kernels(g.mesh, s * p);
    const std::size_t n = g.values.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double diff = std::abs(g.values[i] - g.values[j]);
            if (diff != 0.0) {
                row += std::pow(diff, p) * kernel[j - i];
            }
        }
        sum += row;
    }
    sum *= 2.0;
    if (sum < 0.0 || !std::isfinite(sum)) {
        throw ConsistencyError("gagliardo_pc: invalid seminorm accumulation");
    }
    return {std::pow(sum, 1.0 / p), s, p, SeminormMethod::closed_form, 0.0};
}

/// [f]_{W^{1+s,p}} = Gagliardo seminorm of f'.
inline SeminormResult seminorm_w1sp(const FeFunction& f, double s, double p) {
    return gagliardo_pc(PiecewiseConstant::derivative_of(f), s, p);
}

/// Monte-Carlo estimate of the Gagliardo double integral of a piecewise constant.
///
/// Pairs are drawn as y = x + r with the gap r importance-sampled from a density
/// proportional to r^-gamma, gamma = min(0.999, sigma + 1/2). Under uniform
/// sampling of the square the estimator has infinite variance (the integrand
/// behaves like r^-(1+sigma) at shared nodes); with gamma > 2 sigma the
/// variance is finite whenever sigma < 1/2. Same-element pairs contribute 0.
/// est_error is the standard error of the seminorm, propagated through the p-th root.
inline SeminormResult gagliardo_oracle_mc(const PiecewiseConstant& g, double s, double p, std::uint64_t n_samples,
                                          std::uint64_t seed = 20240607) {
    detail::require_sp_below_one(s, p, "gagliardo_oracle_mc");
    if (n_samples < 10000) {
        throw ParameterError("gagliardo_oracle_mc: need at least 1e4 samples");
    }
    const double sigma = s * p;
    const double gamma = std::min(0.999, sigma + 0.5);
    const double inv = 1.0 / (1.0 - gamma);
    const std::size_t n = g.values.size();
    const double nd = static_cast<double>(n);
    // |g_i - g_j|^p, tabulated for small meshes.
    std::vector<double> table;
    if (n <= 256) {
        table.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                table[i * n + j] = std::pow(std::abs(g.values[i] - g.values[j]), p);
            }
        }
    }
    const auto jump = [&](std::size_t i, std::size_t j) {
        return table.empty() ? std::pow(std::abs(g.values[i] - g.values[j]), p) : table[i * n + j];
    };
    // kernel / density = r^(gamma - 1 - sigma) (1 - r) / (1 - gamma)
    const double exponent = gamma - 1.0 - sigma;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        // 1 - U keeps r strictly positive.
        const double r = std::pow(1.0 - unif(rng), inv);
        const double x = unif(rng) * (1.0 - r);
        const double y = x + r;
        const auto ex = std::min(static_cast<std::size_t>(x * nd), n - 1);
        const auto ey = std::min(static_cast<std::size_t>(y * nd), n - 1);
        double w = 0.0;
        if (ex != ey) {
            const double jp = jump(ex, ey);
            if (jp != 0.0) {
                w = 2.0 * jp * std::pow(r, exponent) * (1.0 - r) * inv;
            }
        }
        const double delta = w - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (w - mean);
    }
    const double ns = static_cast<double>(n_samples);
    const double se_integral = std::sqrt(m2 / (ns - 1.0) / ns);
    const double value = mean > 0.0 ? std::pow(mean, 1.0 / p) : 0.0;
    // d(I^{1/p}) = I^{1/p - 1} dI / p
    const double se = mean > 0.0 ? value / (p * mean) * se_integral : 0.0;
    return {value, s, p, SeminormMethod::monte_carlo, se};
}

/// Exact int_a^b |v|^p for v linear from v0 to v1.
inline double linear_abs_power_integral(double v0, double v1, double length, double p) {
    const double a0 = std::abs(v0);
    const double a1 = std::abs(v1);
    if ((v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0)) {
        return length * (std::pow(a0, p + 1.0) + std::pow(a1, p + 1.0)) / ((p + 1.0) * (a0 + a1));
    }
    const double hi = std::max(a0, a1);
    const double lo = std::min(a0, a1);
    if (hi - lo <= 1e-6 * hi) {
        // Nearly constant |v|: the closed form cancels, Gauss is accurate here.
        const QuadRule& rule = gauss_rule(8);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double t = 0.5 * (1.0 + rule.points[i]);
            sum += rule.weights[i] * std::pow(std::abs(v0 + t * (v1 - v0)), p);
        }
        return 0.5 * length * sum;
    }
    return length * (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / ((p + 1.0) * (hi - lo));
}

/// ||f||_{W^{k,p}} for k in {0, 1}, integrated exactly element by element.
inline double norm_wkp(const FeFunction& f, int k, double p) {
    if (k != 0 && k != 1) {
        throw ParameterError("norm_wkp: k must be 0 or 1");
    }
    if (!(p >= 1.0)) {
        throw ParameterError("norm_wkp: p must be >= 1");
    }
    const Mesh1D& mesh = f.mesh();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        sum += linear_abs_power_integral(f[e], f[e + 1], mesh.h(), p);
        if (k == 1) {
            sum += mesh.h() * std::pow(std::abs(derivative_on_element(f, e)), p);
        }
    }
    return std::pow(sum, 1.0 / p);
}

/// ||v||_{W^{k,p}} for a general function by graded composite quadrature over `study_mesh`.
inline double norm_wkp(const ScalarFunction& v, int k, double p, const Mesh1D& study_mesh,
                       const GradedQuadrature& quad = {}) {
    if (k != 0 && k != 1) {
        throw ParameterError("norm_wkp: k must be 0 or 1");
    }
    if (!(p >= 1.0)) {
        throw ParameterError("norm_wkp: p must be >= 1");
    }
    double sum = integrate_study(quad, [&](double x) { return std::pow(std::abs(v(x)), p); }, study_mesh);
    if (k == 1) {
        sum += integrate_study(quad, [&](double x) { return std::pow(std::abs(v.derivative(x)), p); }, study_mesh);
    }
    return std::pow(sum, 1.0 / p);
}

/// Full norm ||f||_{W^{1+s,p}} = (||f||^p_{W^{1,p}} + [f']^p_{W^{s,p}})^{1/p}.
inline double norm_w1sp(const FeFunction& f, double s, double p) {
    const double lower = norm_wkp(f, 1, p);
    const double semi = seminorm_w1sp(f, s, p).value;
    return std::pow(std::pow(lower, p) + std::pow(semi, p), 1.0 / p);
}

} // namespace mania
