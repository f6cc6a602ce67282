#include "mania/errors.hpp"
#include "mania/studies.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mania;

namespace {

const std::vector<std::size_t> kLadder{8, 16, 32, 64, 128, 256, 512, 1024};

std::vector<RateRow> rows_for(const std::function<double(const Mesh1D&)>& q) {
    std::vector<RateRow> rows;
    for (std::size_t n : kLadder) {
        const Mesh1D mesh(n);
        rows.push_back({mesh.h(), q(mesh)});
    }
    return rows;
}

std::vector<RateRow> tail(const std::vector<RateRow>& rows) { return {rows.begin() + 2, rows.end()}; }

} // namespace

TEST(FitOrder, ExactPowerLaw) {
    const OrderFit f = fit_order({{0.25, 1.0 / 16}, {0.125, 1.0 / 64}, {0.0625, 1.0 / 256}});
    EXPECT_NEAR(f.order, 2.0, 1e-14);
    EXPECT_NEAR(f.r2, 1.0, 1e-14);
}

TEST(FitOrder, FlatSequence) {
    const OrderFit f = fit_order({{0.5, 0.3}, {0.25, 0.3}, {0.125, 0.3}, {0.0625, 0.3}});
    EXPECT_EQ(f.order, 0.0);
    EXPECT_EQ(f.r2, 1.0);
}

TEST(FitOrder, NoisyPowerLaw) {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);
    std::vector<RateRow> rows;
    for (std::size_t n : kLadder) {
        const double h = 1.0 / static_cast<double>(n);
        rows.push_back({h, std::pow(h, 1.2) * (1.0 + 0.01 * noise(rng))});
    }
    const OrderFit f = fit_order(rows);
    EXPECT_GE(f.order, 1.1);
    EXPECT_LE(f.order, 1.3);
    EXPECT_GE(f.r2, 0.0);
    EXPECT_LE(f.r2, 1.0);
}

TEST(FitOrder, TooFewRowsThrows) {
    EXPECT_THROW(fit_order({{0.5, 1.0}, {0.25, 0.5}}), StudyError);
    // zero rows count as converged and are dropped
    EXPECT_THROW(fit_order({{0.5, 1.0}, {0.25, 0.5}, {0.125, 0.0}}), StudyError);
}

TEST(RateStudy, FitDropsCoarseRows) {
    RateStudy s{StudyTarget::lp_error, AdmissibleParams(0.2, 1.1, 0.035), {4, 8, 16, 32, 64}, {}, {}, 0.0, 0.0, 0};
    // two pre-asymptotic rows followed by an exact h^3 tail
    s.rows = {{0.25, 5.0}, {0.125, 0.1}, {1.0 / 16, std::pow(1.0 / 16, 3)}, {1.0 / 32, std::pow(1.0 / 32, 3)},
              {1.0 / 64, std::pow(1.0 / 64, 3)}};
    s.fit();
    EXPECT_EQ(s.dropped_coarse, 2u);
    EXPECT_NEAR(s.fitted_order, 3.0, 1e-12);
    EXPECT_NEAR(s.fit_r2, 1.0, 1e-12);
}

TEST(InterpError, LinearIsReproduced) {
    const ScalarFunction line{[](double x) { return 2.0 * x - 0.5; }, [](double) { return 2.0; }};
    for (std::size_t n : {1u, 8u}) {
        EXPECT_NEAR(interp_error(line, Mesh1D(n), 1.1, 0), 0.0, 1e-15);
        EXPECT_NEAR(interp_error(line, Mesh1D(n), 1.1, 1), 0.0, 1e-14);
    }
}

TEST(InterpError, QuadraticOnOneElement) {
    // x - x^2 >= 0 on (0,1): L^1 error 1/6, W^{1,1} part int |1 - 2x| = 1/2
    const ScalarFunction sq{[](double x) { return x * x; }, [](double x) { return 2.0 * x; }};
    EXPECT_NEAR(interp_error(sq, Mesh1D(1), 1.0, 0), 1.0 / 6.0, 1e-14);
    EXPECT_NEAR(interp_error(sq, Mesh1D(1), 1.0, 1), 1.0 / 6.0 + 0.5, 1e-12);
    EXPECT_NEAR(interp_error(sq, Mesh1D(1), 2.0, 0), std::sqrt(1.0 / 30.0), 1e-14);
}

TEST(InterpError, RootRates) {
    const auto root = ScalarFunction::power(1.0 / 3.0);
    const auto lp = rows_for([&](const Mesh1D& m) { return interp_error(root, m, 1.1, 0); });
    const auto w1p = rows_for([&](const Mesh1D& m) { return interp_error(root, m, 1.1, 1); });
    for (std::size_t i = 1; i < lp.size(); ++i) {
        EXPECT_LT(lp[i].value, lp[i - 1].value);
        EXPECT_LT(w1p[i].value, w1p[i - 1].value);
    }
    const OrderFit a = fit_order(tail(lp));
    const OrderFit b = fit_order(tail(w1p));
    EXPECT_GE(a.order, 1.15);
    EXPECT_GE(b.order, 0.15);
    EXPECT_GE(a.r2, 0.95);
    EXPECT_GE(b.r2, 0.95);
    // the singular element fixes the sharp orders 1/3 + 1/p and 1/3 + 1/p - 1
    EXPECT_NEAR(a.order, 1.0 / 3.0 + 1.0 / 1.1, 0.02);
    EXPECT_NEAR(b.order, 1.0 / 3.0 + 1.0 / 1.1 - 1.0, 0.02);
}

TEST(Lemma1, IdentityVanishes) {
    for (std::size_t n : {4u, 64u}) {
        EXPECT_NEAR(lemma1_quantity(ScalarFunction::identity(), Mesh1D(n), CutoffParams::decoupled(0.035, 1.0 / n)), 0.0,
                    1e-15);
    }
}

TEST(Lemma1, RootRate) {
    const auto root = ScalarFunction::power(1.0 / 3.0);
    const auto rows = rows_for([&](const Mesh1D& m) {
        return std::abs(lemma1_quantity(root, m, CutoffParams::for_mesh(0.035, m)));
    });
    const OrderFit f = fit_order(tail(rows));
    EXPECT_GE(f.order, 1.0 + 0.2 - 6 * 0.035 - 0.1);
    EXPECT_GE(f.r2, 0.9);
}

TEST(Lemma2, Examples) {
    const Mesh1D mesh(16);
    const CutoffParams c = CutoffParams::for_mesh(0.035, mesh);
    // the weight (v^3 - x)^2 is zero up to the rounding of cbrt
    EXPECT_LE(lemma2_quantity(ScalarFunction::power(1.0 / 3.0), mesh, c), 1e-30);
    EXPECT_NEAR(lemma2_quantity(ScalarFunction::identity(), mesh, c), 0.0, 1e-15);
}

TEST(Lemma2, ProbeRate) {
    const auto probe = ScalarFunction::power(0.45);
    const auto rows = rows_for([&](const Mesh1D& m) { return lemma2_quantity(probe, m, CutoffParams::for_mesh(0.035, m)); });
    const auto t = tail(rows);
    for (std::size_t i = 1; i < t.size(); ++i) {
        EXPECT_LT(t[i].value, t[i - 1].value);
        EXPECT_GE(t[i].value, 0.0);
    }
    const OrderFit f = fit_order(t);
    EXPECT_GE(f.order, 0.2 - 5 * 0.035 - 0.1);
    EXPECT_GE(f.r2, 0.9);
}

TEST(Recovery, IdentityGapIsZero) {
    const auto id = ScalarFunction::identity();
    for (std::size_t n : kLadder) {
        const Mesh1D mesh(n);
        EXPECT_LE(std::abs(recovery_gap(id, mesh, CutoffParams::for_mesh(0.035, mesh), 8.0 / 105.0)), 1e-14);
    }
}

TEST(Recovery, RootGapDecays) {
    const auto root = ScalarFunction::power(1.0 / 3.0);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : kLadder) {
        const Mesh1D mesh(n);
        const double g = recovery_gap(root, mesh, CutoffParams::for_mesh(0.035, mesh), 0.0);
        EXPECT_GE(g, 0.0);
        EXPECT_LT(g, prev);
        prev = g;
    }
    EXPECT_LE(prev, 1e-3);
}

TEST(ReferenceEnergy, StableUnderRefinement) {
    const ReferenceEnergy id = reference_energy(ScalarFunction::identity(), 64);
    EXPECT_NEAR(id.value, 8.0 / 105.0, 1e-13);
    EXPECT_LT(id.relative_change, 1e-12);
    const ReferenceEnergy root = reference_energy(ScalarFunction::power(1.0 / 3.0), 64);
    EXPECT_LE(root.value, 1e-20);
}
