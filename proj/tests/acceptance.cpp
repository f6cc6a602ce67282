// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "mania/cli.hpp"
#include "mania/experiments.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mania;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

const StudyReport& find(const std::vector<StudyReport>& reports, const std::string& name) {
    for (const auto& r : reports) {
        if (r.name == name) {
            return r;
        }
    }
    throw std::runtime_error("missing report " + name);
}

std::vector<double> col(const StudyReport& r, const std::string& name) {
    const auto it = std::find(r.columns.begin(), r.columns.end(), name);
    if (it == r.columns.end()) {
        throw std::runtime_error("missing column " + name + " in " + r.name);
    }
    const auto k = static_cast<std::size_t>(it - r.columns.begin());
    std::vector<double> out;
    for (const auto& row : r.rows) {
        out.push_back(row[k]);
    }
    return out;
}

std::vector<RateRow> rate_rows(const StudyReport& r, std::size_t drop = 0) {
    const auto h = col(r, "h");
    const auto v = col(r, "value");
    std::vector<RateRow> rows;
    for (std::size_t i = drop; i < h.size(); ++i) {
        rows.push_back({h[i], v[i]});
    }
    return rows;
}

Outcome min_convergence(const std::vector<StudyReport>& reports) {
    const StudyReport& r = find(reports, "converge");
    if (!r.valid) {
        return {false, r.error};
    }
    const auto v = col(r, "value");
    const auto interp = col(r, "interp_energy");
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
        ok = ok && std::isfinite(v[i]) && v[i] >= 0.0 && v[i] <= interp[i];
        if (i > 0) {
            ok = ok && v[i] <= v[i - 1];
        }
    }
    ok = ok && v.back() <= 0.1 * v.front();
    return {ok, "N=8: " + num(v.front()) + ", N=1024: " + num(v.back())};
}

double grid_min_raw(std::size_t n) {
    const Mesh1D mesh(n);
    double best = std::numeric_limits<double>::infinity();
    const int count = 651; // [-0.1, 1.2] step 2e-3
    for (int i = 0; i < count; ++i) {
        const double a = -0.1 + 2e-3 * i;
        if (n == 2) {
            best = std::min(best, energy_mania(FeFunction(mesh, {0.0, a, 1.0})));
            continue;
        }
        for (int j = 0; j < count; ++j) {
            best = std::min(best, energy_mania(FeFunction(mesh, {0.0, a, -0.1 + 2e-3 * j, 1.0})));
        }
    }
    return best;
}

Outcome gap(const std::vector<StudyReport>& reports) {
    const StudyReport& r = find(reports, "gap");
    if (!r.valid) {
        return {false, r.error};
    }
    const auto ramp = col(r, "raw_from_linear_ramp");
    const auto root = col(r, "raw_from_interp_root");
    const auto enh = col(r, "enhanced_min");
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ramp.size(); ++i) {
        floor = std::min({floor, ramp[i], root[i]});
    }
    bool ok = floor >= 1e-3 && enh.back() < floor;
    std::string detail = "raw_floor " + num(floor) + ", enhanced N=1024 " + num(enh.back());
    SolveConfig direct;
    direct.continuation = false;
    for (std::size_t n : {std::size_t{2}, std::size_t{3}}) {
        double solver = std::numeric_limits<double>::infinity();
        for (Initializer init : {Initializer::linear_ramp, Initializer::interp_root}) {
            direct.initializer = init;
            solver = std::min(solver, minimize_raw(Mesh1D(n), direct).energy);
        }
        const double grid = grid_min_raw(n);
        ok = ok && std::abs(grid - solver) <= 1e-3;
        detail += ", N=" + std::to_string(n) + " scan/solver " + num(grid) + "/" + num(solver);
    }
    return {ok, detail};
}

Outcome interpolation(const std::vector<StudyReport>& reports) {
    const OrderFit lp = fit_order(rate_rows(find(reports, "interp_lp"), 2));
    const OrderFit w = fit_order(rate_rows(find(reports, "interp_w1p"), 2));
    const bool ok = lp.order >= 1.15 && w.order >= 0.15 && lp.r2 >= 0.95 && w.r2 >= 0.95;
    return {ok, "L^p order " + num(lp.order) + " (r2 " + num(lp.r2) + "), W^{1,p} order " + num(w.order) + " (r2 " +
                    num(w.r2) + ")"};
}

Outcome inverse(const std::vector<StudyReport>& reports) {
    bool ok = true;
    std::string detail;
    for (const char* name : {"inverse", "inverse_p2"}) {
        auto v = col(find(reports, name), "value");
        const double mx = *std::max_element(v.begin(), v.end());
        std::sort(v.begin(), v.end());
        const double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        ok = ok && std::isfinite(mx) && mx <= 1.5 * med;
        detail += std::string(detail.empty() ? "" : ", ") + name + " max/median " + num(mx / med);
    }
    return {ok, detail};
}

Outcome lemmas(const std::vector<StudyReport>& reports, const AdmissibleParams& params) {
    const double s = params.s();
    const double a = params.alpha();
    const auto t1 = rate_rows(find(reports, "lemma1"), 2);
    const auto t2 = rate_rows(find(reports, "lemma2"), 2);
    const OrderFit f1 = fit_order(t1);
    const OrderFit f2 = fit_order(t2);
    bool decreasing = true;
    for (std::size_t i = 1; i < t2.size(); ++i) {
        decreasing = decreasing && t2[i].value < t2[i - 1].value;
    }
    const bool ok = f1.order >= 1.0 + s - 6.0 * a - 0.1 && f2.order >= s - 5.0 * a - 0.1 && decreasing &&
                    f1.r2 >= 0.9 && f2.r2 >= 0.9;
    return {ok, "lemma1 order " + num(f1.order) + " (r2 " + num(f1.r2) + "), lemma2 order " + num(f2.order) + " (r2 " +
                    num(f2.r2) + ")"};
}

Outcome recovery(const std::vector<StudyReport>& reports, const ExperimentConfig& config) {
    const StudyReport& r = find(reports, "recovery");
    if (!r.valid) {
        return {false, r.error};
    }
    const auto v = col(r, "value");
    bool ok = v.back() <= 1e-3;
    for (std::size_t i = 1; i < v.size(); ++i) {
        ok = ok && v[i] < v[i - 1];
    }
    // identity: recompute J_h^alpha(I_h x) - J(x) against the exact 8/105
    double worst = 0.0;
    for (std::size_t n : config.mesh_sizes) {
        const Mesh1D mesh(n);
        const CutoffParams params = CutoffParams::for_mesh(config.params.alpha(), mesh);
        ok = ok && params.clamp() >= 1.0;
        worst = std::max(worst, std::abs(recovery_gap(ScalarFunction::identity(), mesh, params, 8.0 / 105.0)));
    }
    ok = ok && worst <= 1e-14;
    return {ok, "N=1024 gap " + num(v.back()) + ", identity max |gap| " + num(worst)};
}

Outcome seminorm_oracles() {
    std::mt19937_64 values(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t sizes[] = {2, 4, 8};
    double worst_z = 0.0;
    bool ok = true;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = sizes[t % 3];
        std::vector<double> v(n);
        for (double& x : v) {
            x = u(values);
        }
        const PiecewiseConstant g(Mesh1D(n), v);
        const double exact = gagliardo_pc(g, 0.2, 1.1).value;
        const SeminormResult mc = gagliardo_oracle_mc(g, 0.2, 1.1, 10000000, 1000 + t);
        const double z = std::abs(exact - mc.value) / mc.est_error;
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 3.0;
    }
    double worst_rel = 0.0;
    for (std::size_t n : {8u, 32u}) {
        const Mesh1D mesh(n);
        for (double sigma : {0.22, 0.5, 0.9}) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 2; j < n; ++j) {
                    const double exact = pair_kernel(mesh.node(i), mesh.node(i + 1), mesh.node(j), mesh.node(j + 1), sigma);
                    const double quad = oracle::kernel_by_quadrature(mesh.node(i), mesh.node(i + 1), mesh.node(j),
                                                                     mesh.node(j + 1), sigma, false);
                    worst_rel = std::max(worst_rel, std::abs(exact - quad) / quad);
                }
            }
        }
    }
    ok = ok && worst_rel <= 1e-10;
    return {ok, "max |z| " + num(worst_z) + " over 50 functions, non-adjacent kernel rel err " + num(worst_rel)};
}

Outcome gradients() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (std::size_t n : {4u, 16u, 64u}) {
        const Mesh1D mesh(n);
        const CutoffParams params = CutoffParams::for_mesh(0.035, mesh);
        for (int t = 0; t < 100; ++t) {
            const FeFunction f = oracle::random_xh(rng, mesh, params.clamp(), 1e-3);
            const auto g = gradient_enhanced(f, params);
            const auto fd = oracle::fd_gradient([&](const FeFunction& w) { return energy_enhanced(w, params); }, f, 1e-6);
            double gmax = 0.0;
            double diff = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j) {
                gmax = std::max(gmax, std::abs(g[j]));
                diff = std::max(diff, std::abs(g[j] - fd[j]));
            }
            worst = std::max(worst, diff / (1.0 + gmax));
        }
    }
    return {worst <= 1e-6, "max scaled deviation " + num(worst)};
}

Outcome quadrature() {
    std::mt19937_64 rng(105);
    std::uniform_int_distribution<int> sizes(1, 64);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const FeFunction f = oracle::random_xh(rng, Mesh1D(static_cast<std::size_t>(sizes(rng))), 1e9, 0.0, 3.0);
        const double a = energy_mania(f);
        const double b = oracle::mania_energy_gauss8(f);
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
    const double v = integrate_composite(
        gauss_rule(4),
        [](double x) {
            const double r = x * x * x - x;
            return r * r;
        },
        Mesh1D(1));
    const double err = std::abs(v - 8.0 / 105.0);
    return {worst <= 1e-13 && err <= 1e-14, "m4 vs m8 rel " + num(worst) + ", 8/105 err " + num(err)};
}

Outcome regime() {
    bool ok = true;
    const auto rejected = [](double s, double p, double a, const std::string& name) {
        try {
            AdmissibleParams(s, p, a);
            return false;
        } catch (const RegimeError& e) {
            return std::string(e.what()).find(name + " violated") != std::string::npos;
        }
    };
    ok = ok && rejected(0.3, 1.4, 0.01, "(2/3+s)p < 1");
    ok = ok && rejected(0.2, 1.25, 0.01, "(2/3+s)p < 1");
    ok = ok && rejected(0.2, 1.1, 0.04, "alpha < min{(1+s)/6, s/5}");
    ok = ok && rejected(0.2, 1.1, 0.2, "alpha < min{(1+s)/6, s/5}");
    // sp >= 1 cannot occur with s < 1/3 and p < 3/2; the check is still named.
    const auto sp = AdmissibleParams::violations(0.9, 1.2, 0.01);
    ok = ok && std::find(sp.begin(), sp.end(), "sp < 1") != sp.end();
    ok = ok && rejected(0.9, 1.2, 0.01, "sp < 1");
    try {
        (void)gagliardo_pc(PiecewiseConstant(Mesh1D(2), {1.0, 0.0}), 0.5, 2.0);
        ok = false;
    } catch (const RegimeError&) {
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main_entry({"converge", "--set", "s=0.3", "--set", "p=1.4"}, out, err);
    ok = ok && code == 2 && err.str().find("(2/3+s)p < 1 violated") != std::string::npos;
    return {ok, "CLI exit " + std::to_string(code)};
}

} // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const ExperimentConfig config;
    const auto t0 = clock::now();
    const ReportBundle bundle = run_all(config);
    const double study_secs = std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("studies finished in %.1f s\n", study_secs);
    const auto& reports = bundle.reports;

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"minimum-value convergence", [&] { return min_convergence(reports); }},
        {"gap between raw and cutoff minima", [&] { return gap(reports); }},
        {"interpolation rates", [&] { return interpolation(reports); }},
        {"fractional inverse inequality", [&] { return inverse(reports); }},
        {"error-splitting rates", [&] { return lemmas(reports, config.params); }},
        {"recovery sequence", [&] { return recovery(reports, config); }},
        {"seminorm oracle agreement", seminorm_oracles},
        {"gradient finite differences", gradients},
        {"quadrature exactness", quadrature},
        {"regime validation", regime},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
