#pragma once

#include "mania/errors.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mania {

/// Uniform partition of [0,1] into N elements with nodes x_j = j/N.
class Mesh1D {
public:
    explicit Mesh1D(std::size_t n_elements) : n_(n_elements) {
        if (n_ == 0) {
            throw ParameterError("Mesh1D: number of elements must be positive");
        }
        h_ = 1.0 / static_cast<double>(n_);
    }

    std::size_t n_elements() const noexcept { return n_; }
    std::size_t n_nodes() const noexcept { return n_ + 1; }
    double h() const noexcept { return h_; }

    /// Node coordinate; the last node is exactly 1.
    double node(std::size_t j) const {
        if (j > n_) {
            throw IndexError("Mesh1D::node: index " + std::to_string(j) + " out of range");
        }
        if (j == n_) {
            return 1.0;
        }
        return static_cast<double>(j) / static_cast<double>(n_);
    }

    std::vector<double> nodes() const {
        std::vector<double> x(n_nodes());
        for (std::size_t j = 0; j <= n_; ++j) {
            x[j] = node(j);
        }
        return x;
    }

    friend bool operator==(const Mesh1D& a, const Mesh1D& b) noexcept { return a.n_ == b.n_; }

private:
    std::size_t n_;
    double h_;
};

/// Element I_k = (x_k, x_{k+1}) holding a point y, with L(y) = lower and U(y) = upper.
struct ElementRef {
    std::size_t index;
    double lower;
    double upper;
};

/// Element containing y. Interior nodes belong to the element on their right;
/// y = 1 belongs to the last element.
inline ElementRef locate(const Mesh1D& mesh, double y) {
    if (!(y >= 0.0 && y <= 1.0)) {
        throw DomainError("locate: point outside [0,1]");
    }
    const std::size_t n = mesh.n_elements();
    auto k = static_cast<std::size_t>(std::floor(y * static_cast<double>(n)));
    // floor(y*N) can land one element off when y is within rounding of a node.
    if (k > 0 && mesh.node(k) > y) {
        --k;
    }
    if (k + 1 < n && mesh.node(k + 1) <= y) {
        ++k;
    }
    if (k >= n) {
        k = n - 1;
    }
    return {k, mesh.node(k), mesh.node(k + 1)};
}

/// Continuous piecewise-linear function stored by its nodal values.
///
/// When `in_xh()` is true the function satisfies v(0) = 0 and v(1) = 1 exactly
/// and is a member of the finite element space X_h used by the energies.
class FeFunction {
public:
    FeFunction(Mesh1D mesh, std::vector<double> nodal_values)
        : mesh_(mesh), values_(std::move(nodal_values)) {
        if (values_.size() != mesh_.n_nodes()) {
            throw ParameterError("FeFunction: expected " + std::to_string(mesh_.n_nodes()) +
                                 " nodal values, got " + std::to_string(values_.size()));
        }
        bc_ = values_.front() == 0.0 && values_.back() == 1.0;
    }

    /// Member of X_h from interior values only; boundary values are pinned to 0 and 1.
    static FeFunction from_interior(Mesh1D mesh, const std::vector<double>& interior) {
        if (interior.size() + 1 != mesh.n_elements()) {
            throw ParameterError("FeFunction::from_interior: expected " +
                                 std::to_string(mesh.n_elements() - 1) + " interior values");
        }
        std::vector<double> v(mesh.n_nodes());
        v.front() = 0.0;
        v.back() = 1.0;
        std::copy(interior.begin(), interior.end(), v.begin() + 1);
        return FeFunction(mesh, std::move(v));
    }

    const Mesh1D& mesh() const noexcept { return mesh_; }
    const std::vector<double>& nodal_values() const noexcept { return values_; }
    double operator[](std::size_t j) const { return values_.at(j); }
    bool in_xh() const noexcept { return bc_; }

    std::vector<double> interior() const {
        return {values_.begin() + 1, values_.end() - 1};
    }

private:
    Mesh1D mesh_;
    std::vector<double> values_;
    bool bc_;
};

/// Hat-basis evaluation; exact at nodes.
inline double evaluate(const FeFunction& f, double y) {
    const ElementRef e = locate(f.mesh(), y);
    const double v0 = f[e.index];
    const double v1 = f[e.index + 1];
    if (y == e.lower) {
        return v0;
    }
    if (y == e.upper) {
        return v1;
    }
    const double t = (y - e.lower) / (e.upper - e.lower);
    return v0 + t * (v1 - v0);
}

/// Constant slope of f on element k.
inline double derivative_on_element(const FeFunction& f, std::size_t k) {
    if (k >= f.mesh().n_elements()) {
        throw IndexError("derivative_on_element: element " + std::to_string(k) + " out of range");
    }
    return (f[k + 1] - f[k]) / f.mesh().h();
}

/// All element slopes, in element order.
inline std::vector<double> element_slopes(const FeFunction& f) {
    std::vector<double> d(f.mesh().n_elements());
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = derivative_on_element(f, k);
    }
    return d;
}

/// Nodal interpolant I_h v: the piecewise-linear function with I_h v(x_j) = v(x_j) at all N+1 nodes.
inline FeFunction nodal_interpolant(const Mesh1D& mesh, const std::function<double(double)>& v) {
    std::vector<double> values(mesh.n_nodes());
    for (std::size_t j = 0; j < values.size(); ++j) {
        values[j] = v(mesh.node(j));
        if (!std::isfinite(values[j])) {
            throw EvaluationError("nodal_interpolant: non-finite value at node " + std::to_string(j));
        }
    }
    return FeFunction(mesh, std::move(values));
}

} // namespace mania
