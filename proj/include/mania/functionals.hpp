#pragma once

#include "mania/errors.hpp"
#include "mania/mesh.hpp"
#include "mania/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mania {

/// Scalar function on [0,1] together with its derivative (which may blow up at 0).
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    double operator()(double x) const { return value(x); }

    /// x^q, with derivative q x^(q-1). q = 1/3 gives the exact minimizer.
    static ScalarFunction power(double q) {
        if (q == 1.0 / 3.0) {
            return {[](double x) { return std::cbrt(x); },
                    [](double x) { return 1.0 / (3.0 * std::cbrt(x * x)); }};
        }
        return {[q](double x) { return std::pow(x, q); },
                [q](double x) { return q * std::pow(x, q - 1.0); }};
    }

    static ScalarFunction identity() {
        return {[](double x) { return x; }, [](double) { return 1.0; }};
    }
};

/// Clamp level h^-alpha for the derivative cutoff.
///
/// `tied()` parameters must be used with a mesh of the same h; `decoupled`
/// parameters skip that check and are meant for studies where the cutoff
/// level is set independently of the function being measured.
class CutoffParams {
public:
    CutoffParams(double alpha, double h) : CutoffParams(alpha, h, true) {}

    static CutoffParams decoupled(double alpha, double h) { return CutoffParams(alpha, h, false); }

    /// Tied to the mesh size of `mesh`.
    static CutoffParams for_mesh(double alpha, const Mesh1D& mesh) { return CutoffParams(alpha, mesh.h()); }

    double alpha() const noexcept { return alpha_; }
    double h() const noexcept { return h_; }
    double clamp() const noexcept { return clamp_; }
    bool tied() const noexcept { return tied_; }

private:
    CutoffParams(double alpha, double h, bool tied) : alpha_(alpha), h_(h), tied_(tied) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw ParameterError("CutoffParams: alpha must be positive");
        }
        if (!(h > 0.0 && h <= 1.0)) {
            throw ParameterError("CutoffParams: h must lie in (0, 1]");
        }
        clamp_ = std::exp(-alpha_ * std::log(h_));
    }

    double alpha_;
    double h_;
    double clamp_ = 1.0;
    bool tied_;
};

/// Parameter triple (s, p, alpha) inside the regime where the convergence
/// argument applies:
///   0 < s < 1/3, 1 <= p < 3/2, (2/3 + s) p < 1, s p < 1,
///   0 < alpha < min{(1+s)/6, s/5}.
/// The checked constructor throws RegimeError naming every violated inequality.
class AdmissibleParams {
public:
    AdmissibleParams(double s, double p, double alpha) : s_(s), p_(p), alpha_(alpha) {
        const auto v = violations(s, p, alpha);
        if (!v.empty()) {
            std::string msg = "parameters outside the admissible regime:";
            for (const auto& item : v) {
                msg += " " + item + " violated;";
            }
            msg.pop_back();
            throw RegimeError(msg);
        }
    }

    /// Skips validation; for deliberately out-of-regime experiments.
    static AdmissibleParams unchecked(double s, double p, double alpha) {
        return AdmissibleParams(s, p, alpha, Unchecked{});
    }

    /// Names of the violated inequalities, empty when admissible.
    static std::vector<std::string> violations(double s, double p, double alpha) {
        std::vector<std::string> out;
        if (!(s > 0.0 && s < 1.0 / 3.0)) {
            out.emplace_back("0 < s < 1/3");
        }
        if (!(p >= 1.0 && p < 1.5)) {
            out.emplace_back("1 <= p < 3/2");
        }
        if (!((2.0 / 3.0 + s) * p < 1.0)) {
            out.emplace_back("(2/3+s)p < 1");
        }
        if (!(s * p < 1.0)) {
            out.emplace_back("sp < 1");
        }
        if (!(alpha > 0.0)) {
            out.emplace_back("alpha > 0");
        }
        if (!(alpha < std::min((1.0 + s) / 6.0, s / 5.0))) {
            out.emplace_back("alpha < min{(1+s)/6, s/5}");
        }
        return out;
    }

    double s() const noexcept { return s_; }
    double p() const noexcept { return p_; }
    double alpha() const noexcept { return alpha_; }
    bool admissible() const { return violations(s_, p_, alpha_).empty(); }

private:
    struct Unchecked {};
    AdmissibleParams(double s, double p, double alpha, Unchecked) : s_(s), p_(p), alpha_(alpha) {}

    double s_;
    double p_;
    double alpha_;
};

/// sgn(t) min{|t|, clamp}.
inline double cutoff(const CutoffParams& params, double t) noexcept {
    return std::copysign(std::min(std::abs(t), params.clamp()), t);
}

/// 1 strictly inside the unclamped band, 0 on the clamped branch and at |t| = clamp.
inline double cutoff_derivative(const CutoffParams& params, double t) noexcept {
    return std::abs(t) < params.clamp() ? 1.0 : 0.0;
}

namespace detail {

inline constexpr double kNegativeEnergyTolerance = 1e-14;

inline double checked_energy(double e, const char* who) {
    if (!std::isfinite(e)) {
        throw NumericalError(std::string(who) + ": non-finite energy");
    }
    if (e < -kNegativeEnergyTolerance) {
        throw ConsistencyError(std::string(who) + ": negative energy " + std::to_string(e));
    }
    return std::max(e, 0.0);
}

inline void require_xh(const FeFunction& f, const char* who) {
    if (!f.in_xh()) {
        throw ContractError(std::string(who) + ": function must satisfy v(0) = 0 and v(1) = 1");
    }
}

inline void require_matching_h(const FeFunction& f, const CutoffParams& params, const char* who) {
    if (params.tied() && std::abs(params.h() - f.mesh().h()) > 1e-12 * f.mesh().h()) {
        throw ContractError(std::string(who) + ": cutoff h does not match mesh h");
    }
}

/// Exact element integrals of the weight (v^3 - x)^2 on X_h (degree-6 integrands, 4-point Gauss).
struct ElementWeight {
    double weight;  ///< int (v^3 - x)^2
    double d_left;  ///< d/du_k of the weight
    double d_right; ///< d/du_{k+1} of the weight
};

inline ElementWeight element_weight(double a, double b, double u0, double u1, bool with_gradient) {
    const QuadRule& rule = gauss_rule(4);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    ElementWeight out{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double xi = rule.points[i];
        const double phi0 = 0.5 * (1.0 - xi);
        const double phi1 = 0.5 * (1.0 + xi);
        const double x = mid + half * xi;
        const double v = u0 * phi0 + u1 * phi1;
        const double r = v * v * v - x;
        const double w = rule.weights[i] * half;
        out.weight += w * r * r;
        if (with_gradient) {
            const double g = 6.0 * v * v * r;
            out.d_left += w * g * phi0;
            out.d_right += w * g * phi1;
        }
    }
    return out;
}

/// Energy sum_k F(d_k) int_{I_k} (v^3 - x)^2 for a slope factor F with derivative dF.
template <class Factor>
double assemble_energy(const FeFunction& f, Factor&& factor) {
    const Mesh1D& mesh = f.mesh();
    const auto& u = f.nodal_values();
    const double h = mesh.h();
    double e = 0.0;
    for (std::size_t k = 0; k < mesh.n_elements(); ++k) {
        const double d = (u[k + 1] - u[k]) / h;
        const double fac = factor(d).first;
        if (fac == 0.0) {
            continue;
        }
        e += fac * element_weight(mesh.node(k), mesh.node(k + 1), u[k], u[k + 1], false).weight;
    }
    return e;
}

template <class Factor>
std::vector<double> assemble_gradient(const FeFunction& f, Factor&& factor) {
    const Mesh1D& mesh = f.mesh();
    const std::size_t n = mesh.n_elements();
    const auto& u = f.nodal_values();
    const double h = mesh.h();
    // Full nodal gradient; boundary entries dropped at the end.
    std::vector<double> g(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = (u[k + 1] - u[k]) / h;
        const auto [fac, dfac] = factor(d);
        const ElementWeight ew = element_weight(mesh.node(k), mesh.node(k + 1), u[k], u[k + 1], true);
        const double slope_term = dfac * ew.weight / h;
        g[k] += fac * ew.d_left - slope_term;
        g[k + 1] += fac * ew.d_right + slope_term;
    }
    return {g.begin() + 1, g.end() - 1};
}

inline std::pair<double, double> raw_factor(double d) {
    const double d2 = d * d;
    const double d5 = d2 * d2 * d;
    return {d5 * d, 6.0 * d5};
}

inline auto enhanced_factor(const CutoffParams& params) {
    return [params](double d) {
        const double c = cutoff(params, d);
        const double c2 = c * c;
        const double c5 = c2 * c2 * c;
        return std::pair<double, double>{c5 * c, 6.0 * c5 * cutoff_derivative(params, d)};
    };
}

} // namespace detail

/// Energy J(v) = int_0^1 v'^6 (v^3 - x)^2 dx, integrated exactly on X_h.
inline double energy_mania(const FeFunction& f) {
    detail::require_xh(f, "energy_mania");
    return detail::checked_energy(detail::assemble_energy(f, detail::raw_factor), "energy_mania");
}

/// Cutoff energy J_h^alpha(v) = int_0^1 chi(v')^6 (v^3 - x)^2 dx on X_h.
inline double energy_enhanced(const FeFunction& f, const CutoffParams& params) {
    detail::require_xh(f, "energy_enhanced");
    detail::require_matching_h(f, params, "energy_enhanced");
    return detail::checked_energy(detail::assemble_energy(f, detail::enhanced_factor(params)),
                                  "energy_enhanced");
}

/// Gradient of J_h^alpha with respect to the interior nodal values v_1..v_{N-1}.
inline std::vector<double> gradient_enhanced(const FeFunction& f, const CutoffParams& params) {
    detail::require_xh(f, "gradient_enhanced");
    detail::require_matching_h(f, params, "gradient_enhanced");
    return detail::assemble_gradient(f, detail::enhanced_factor(params));
}

/// Gradient of J with respect to the interior nodal values.
inline std::vector<double> gradient_mania(const FeFunction& f) {
    detail::require_xh(f, "gradient_mania");
    return detail::assemble_gradient(f, detail::raw_factor);
}

/// J_h^alpha for a general function by graded composite quadrature over `study_mesh`.
inline double energy_enhanced_general(const ScalarFunction& v, const CutoffParams& params,
                                      const Mesh1D& study_mesh, const GradedQuadrature& quad = {}) {
    const double e = integrate_study(
        quad,
        [&](double x) {
            const double c = cutoff(params, v.derivative(x));
            const double r = std::pow(v(x), 3) - x;
            return std::pow(c, 6) * r * r;
        },
        study_mesh);
    return detail::checked_energy(e, "energy_enhanced_general");
}

/// J for a general function by the same graded quadrature.
inline double energy_mania_general(const ScalarFunction& v, const Mesh1D& study_mesh,
                                   const GradedQuadrature& quad = {}) {
    const double e = integrate_study(
        quad,
        [&](double x) {
            const double r = std::pow(v(x), 3) - x;
            return std::pow(v.derivative(x), 6) * r * r;
        },
        study_mesh);
    return detail::checked_energy(e, "energy_mania_general");
}

} // namespace mania
