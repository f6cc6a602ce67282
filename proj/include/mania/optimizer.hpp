#pragma once

#include "mania/errors.hpp"
#include "mania/functionals.hpp"
#include "mania/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace mania {

enum class Initializer {
    linear_ramp,         ///< v_j = x_j, the basin of the Lipschitz pseudo-minimizer
    interp_root,         ///< v_j = x_j^(1/3), the basin of the true minimizer
    coarse_continuation, ///< solve on N/2 and prolongate, bottoming out at interp_root
};

inline const char* to_string(Initializer init) {
    switch (init) {
    case Initializer::linear_ramp: return "linear_ramp";
    case Initializer::interp_root: return "interp_root";
    case Initializer::coarse_continuation: return "coarse_continuation";
    }
    return "?";
}

struct SolveConfig {
    double grad_tol = 1e-9;     ///< max-norm of the interior gradient
    long max_iters = 100000;
    double step_shrink = 0.5;
    double armijo_c = 1e-4;
    bool continuation = true;
    Initializer initializer = Initializer::coarse_continuation;
    bool diagonal_scaling = true; ///< precondition the gradient by 1/h
    bool record_history = false;

    void validate() const {
        if (!(grad_tol > 0.0)) {
            throw ParameterError("SolveConfig: grad_tol must be positive");
        }
        if (max_iters <= 0) {
            throw ParameterError("SolveConfig: max_iters must be positive");
        }
        if (!(step_shrink > 0.0 && step_shrink < 1.0)) {
            throw ParameterError("SolveConfig: step_shrink must lie in (0, 1)");
        }
        if (!(armijo_c > 0.0 && armijo_c <= 0.5)) {
            throw ParameterError("SolveConfig: armijo_c must lie in (0, 1/2]");
        }
    }
};

struct SolveResult {
    FeFunction minimizer;
    double energy = 0.0;
    double grad_norm = 0.0;
    long iters = 0;
    bool converged = false;
    std::vector<std::pair<long, double>> history;
};

inline double max_norm(const std::vector<double>& g) {
    double m = 0.0;
    for (double x : g) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

/// Nodal interpolant of a coarse function on a nested finer mesh.
inline FeFunction prolongate(const FeFunction& coarse, const Mesh1D& fine_mesh) {
    const std::size_t nc = coarse.mesh().n_elements();
    const std::size_t nf = fine_mesh.n_elements();
    if (nf % nc != 0) {
        throw ParameterError("prolongate: fine mesh is not nested in the coarse mesh");
    }
    const std::size_t ratio = nf / nc;
    std::vector<double> v(fine_mesh.n_nodes());
    for (std::size_t j = 0; j <= nf; ++j) {
        const std::size_t k = std::min(j / ratio, nc - 1);
        const std::size_t r = j - k * ratio;
        const double t = static_cast<double>(r) / static_cast<double>(ratio);
        v[j] = r == 0 ? coarse[k] : coarse[k] + t * (coarse[k + 1] - coarse[k]);
    }
    return FeFunction(fine_mesh, std::move(v));
}

/// Starting iterate in X_h for a non-continuation initializer.
inline FeFunction initial_guess(const Mesh1D& mesh, Initializer init) {
    if (init == Initializer::linear_ramp) {
        return nodal_interpolant(mesh, [](double x) { return x; });
    }
    return nodal_interpolant(mesh, [](double x) { return std::cbrt(x); });
}

/// Objective over X_h: energy and interior gradient of one functional.
struct Objective {
    std::function<double(const FeFunction&)> energy;
    std::function<std::vector<double>(const FeFunction&)> gradient;
};

/// Armijo-backtracked gradient descent over the interior nodal values.
/// Boundary values stay pinned at 0 and 1; energies along the history never increase.
inline SolveResult descend(const Objective& obj, FeFunction start, const SolveConfig& config) {
    config.validate();
    if (!start.in_xh()) {
        throw ContractError("descend: starting iterate must satisfy the boundary conditions");
    }
    const Mesh1D mesh = start.mesh();
    const double scale = config.diagonal_scaling ? 1.0 / mesh.h() : 1.0;

    FeFunction current = std::move(start);
    double energy = obj.energy(current);
    if (!std::isfinite(energy)) {
        throw NumericalError("descend: non-finite initial energy");
    }
    SolveResult result{current, energy, 0.0, 0, false, {}};
    if (config.record_history) {
        result.history.emplace_back(0, energy);
    }
    if (mesh.n_elements() < 2) {
        result.converged = true;
        return result;
    }

    std::vector<double> grad = obj.gradient(current);
    double gnorm = max_norm(grad);
    double step = 1.0;
    std::vector<double> u = current.interior();
    std::vector<double> trial(u.size());
    long it = 0;
    while (gnorm > config.grad_tol && it < config.max_iters) {
        double slope = 0.0;
        for (double gi : grad) {
            slope -= scale * gi * gi;
        }
        bool accepted = false;
        double t = std::min(step / config.step_shrink, 1e12);
        double trial_energy = energy;
        while (t > 1e-30) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                trial[i] = u[i] - t * scale * grad[i];
            }
            FeFunction candidate = FeFunction::from_interior(mesh, trial);
            trial_energy = obj.energy(candidate);
            if (std::isfinite(trial_energy) && trial_energy <= energy + config.armijo_c * t * slope &&
                trial_energy < energy) {
                current = std::move(candidate);
                accepted = true;
                break;
            }
            t *= config.step_shrink;
        }
        if (!accepted) {
            break;
        }
        ++it;
        step = t;
        u.swap(trial);
        energy = trial_energy;
        grad = obj.gradient(current);
        gnorm = max_norm(grad);
        if (config.record_history) {
            result.history.emplace_back(it, energy);
        }
    }
    result.minimizer = std::move(current);
    result.energy = energy;
    result.grad_norm = gnorm;
    result.iters = it;
    result.converged = gnorm <= config.grad_tol;
    return result;
}

namespace detail {

inline Objective enhanced_objective(const CutoffParams& params) {
    return {[params](const FeFunction& f) { return energy_enhanced(f, params); },
            [params](const FeFunction& f) { return gradient_enhanced(f, params); }};
}

inline Objective raw_objective() {
    return {[](const FeFunction& f) { return energy_mania(f); },
            [](const FeFunction& f) { return gradient_mania(f); }};
}

// Solves on mesh N, seeding from the solve on N/2 when continuation is on.
template <class MakeObjective>
SolveResult solve_with_continuation(const Mesh1D& mesh, const SolveConfig& config, MakeObjective&& make) {
    const std::size_t n = mesh.n_elements();
    const bool chain = config.continuation || config.initializer == Initializer::coarse_continuation;
    if (chain && n > 2 && n % 2 == 0) {
        const Mesh1D coarse(n / 2);
        SolveResult coarse_result = solve_with_continuation(coarse, config, make);
        return descend(make(mesh), prolongate(coarse_result.minimizer, mesh), config);
    }
    const Initializer base =
        config.initializer == Initializer::coarse_continuation ? Initializer::interp_root : config.initializer;
    return descend(make(mesh), initial_guess(mesh, base), config);
}

} // namespace detail

/// Local minimizer of J_h^alpha over X_h with h tied to `mesh`.
inline SolveResult minimize_enhanced(const Mesh1D& mesh, double alpha, const SolveConfig& config = {}) {
    return detail::solve_with_continuation(mesh, config, [alpha](const Mesh1D& m) {
        return detail::enhanced_objective(CutoffParams::for_mesh(alpha, m));
    });
}

inline SolveResult minimize_enhanced(const Mesh1D& mesh, const CutoffParams& params,
                                     const SolveConfig& config = {}) {
    if (params.tied() && std::abs(params.h() - mesh.h()) > 1e-12 * mesh.h()) {
        throw ContractError("minimize_enhanced: cutoff h does not match mesh h");
    }
    return minimize_enhanced(mesh, params.alpha(), config);
}

/// Descent on J_h^alpha from a caller-supplied starting iterate.
inline SolveResult minimize_enhanced_from(const FeFunction& start, const CutoffParams& params,
                                          const SolveConfig& config = {}) {
    return descend(detail::enhanced_objective(params), start, config);
}

/// Local minimizer of the raw functional J over X_h (standard finite elements).
inline SolveResult minimize_raw(const Mesh1D& mesh, const SolveConfig& config = {}) {
    return detail::solve_with_continuation(mesh, config, [](const Mesh1D&) { return detail::raw_objective(); });
}

inline SolveResult minimize_raw_from(const FeFunction& start, const SolveConfig& config = {}) {
    return descend(detail::raw_objective(), start, config);
}

/// Seeded multi-start on J_h^alpha: `starts` runs from linear_ramp plus uniform
/// perturbations of amplitude `amplitude` on the interior values. Starts run
/// concurrently; the lowest energy wins, ties broken by start index.
inline SolveResult minimize_enhanced_multistart(const Mesh1D& mesh, const CutoffParams& params,
                                                SolveConfig config, std::uint64_t seed, int starts = 16,
                                                double amplitude = 0.2) {
    config.continuation = false;
    std::vector<FeFunction> seeds;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    const FeFunction ramp = initial_guess(mesh, Initializer::linear_ramp);
    for (int s = 0; s < starts; ++s) {
        std::vector<double> interior = ramp.interior();
        for (double& x : interior) {
            x += dist(rng);
        }
        seeds.push_back(FeFunction::from_interior(mesh, interior));
    }
    std::vector<std::future<SolveResult>> jobs;
    for (const auto& start : seeds) {
        jobs.push_back(std::async(std::launch::async,
                                  [&, start] { return minimize_enhanced_from(start, params, config); }));
    }
    std::optional<SolveResult> best;
    for (auto& job : jobs) {
        SolveResult r = job.get();
        if (!best || r.energy < best->energy) {
            best = std::move(r);
        }
    }
    return std::move(*best);
}

} // namespace mania
