#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "swistab/chattering.hpp"
#include "swistab/errors.hpp"
#include "swistab/grid.hpp"
#include "swistab/synthesis.hpp"

using namespace swistab;
using namespace swistab::chatter;
using swistab::testing::Rng;
using swistab::testing::sys_a;
using swistab::testing::vec;

TEST(BuildPure, EqualWeightsSplitEachSubinterval) {
    const PureSignal p = build_pure(RelaxedSignal::constant(vec({0.5, 0.5}), 1.0), 0.25, 1.0);
    ASSERT_EQ(p.num_intervals(), 8u);
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_EQ(p.modes()[k], k % 2);
        EXPECT_NEAR(p.breakpoints()[k + 1] - p.breakpoints()[k], 0.125, 1e-15);
    }
    EXPECT_EQ(p.breakpoints().back(), 1.0);
}

TEST(BuildPure, VertexWeightsGiveSingleMode) {
    const PureSignal p = build_pure(RelaxedSignal::constant(vec({1.0, 0.0}), 2.0), 0.3, 2.0);
    ASSERT_EQ(p.num_intervals(), 1u);
    EXPECT_EQ(p.modes()[0], 0u);
    EXPECT_EQ(p.breakpoints().back(), 2.0);
}

TEST(BuildPure, ThreeModesInIndexOrder) {
    const PureSignal p = build_pure(RelaxedSignal::constant(vec({0.2, 0.3, 0.5}), 1.0), 1.0, 1.0);
    ASSERT_EQ(p.num_intervals(), 3u);
    EXPECT_EQ(p.modes(), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_NEAR(p.breakpoints()[1], 0.2, 1e-15);
    EXPECT_NEAR(p.breakpoints()[2], 0.5, 1e-15);
    EXPECT_EQ(p.breakpoints()[3], 1.0);
}

TEST(BuildPure, TruncatedLastSubintervalScalesSlots) {
    const ChatterPlan plan = build_plan(RelaxedSignal::constant(vec({0.5, 0.5}), 1.0), 0.4, 1.0);
    ASSERT_EQ(plan.slot_times.size(), 3u);
    EXPECT_NEAR(plan.slot_times[2][1], 0.9, 1e-15);
    EXPECT_EQ(plan.slot_times[2][2], 1.0);
}

TEST(BuildPure, InvalidArguments) {
    const RelaxedSignal s = RelaxedSignal::constant(vec({0.5, 0.5}), 1.0);
    EXPECT_THROW(build_pure(s, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(build_pure(s, 0.1, 0.0), InvalidArgument);
    EXPECT_THROW(build_pure(s, 0.1, 2.0), InvalidArgument);
}

TEST(ChatterError, VertexHasNoError) {
    EXPECT_LE(chatter_error(sys_a(), RelaxedSignal::constant(vec({1.0, 0.0}), 1.0), 0.1, 1.0,
                            vec({1.0, 1.0})),
              1e-12);
}

TEST(ChatterError, ZeroInitialState) {
    EXPECT_EQ(chatter_error(sys_a(), RelaxedSignal::constant(vec({0.5, 0.5}), 1.0), 0.1, 1.0,
                            vec({0.0, 0.0})),
              0.0);
}

TEST(ChatterError, ShrinksWithStep) {
    const RelaxedSignal s = RelaxedSignal::constant(vec({0.5, 0.5}), 2.0);
    const double coarse = chatter_error(sys_a(), s, 0.2, 2.0, vec({1.0, 1.0}));
    const double fine = chatter_error(sys_a(), s, 0.05, 2.0, vec({1.0, 1.0}));
    EXPECT_TRUE(std::isfinite(coarse));
    EXPECT_LT(fine, coarse);
}

TEST(ChatterError, FrozenFirstAxisValue) {
    // Along the first axis SYS-A is scalar: mode 1 rate -1, mode 2 rate 0.5,
    // relaxed rate -0.25. The gap peaks at the end of the first mode-1 slot.
    const double err = chatter_error(sys_a(), RelaxedSignal::constant(vec({0.5, 0.5}), 1.0),
                                      0.25, 1.0, vec({1.0, 0.0}));
    EXPECT_NEAR(err, std::exp(-1.0 / 32.0) - std::exp(-1.0 / 8.0), 1e-12);
}

TEST(RequiredH, PlugIn) {
    EXPECT_NEAR(required_h(sys_a(), 1.0, 1.0, std::exp(1.0)), 0.5, 1e-15);
}

TEST(RequiredH, LinearInEpsilon) {
    EXPECT_NEAR(required_h(sys_a(), 1.5, 2.0, 0.2), 2.0 * required_h(sys_a(), 1.5, 2.0, 0.1),
                1e-18);
}

TEST(RequiredH, DecreasingInHorizon) {
    double prev = required_h(sys_a(), 0.5, 1.0, 0.1);
    for (double t : {1.0, 2.0, 4.0}) {
        const double h = required_h(sys_a(), t, 1.0, 0.1);
        EXPECT_LT(h, prev);
        prev = h;
    }
}

TEST(RequiredH, NonPositiveArguments) {
    EXPECT_THROW(required_h(sys_a(), 0.0, 1.0, 0.1), InvalidArgument);
    EXPECT_THROW(required_h(sys_a(), 1.0, -1.0, 0.1), InvalidArgument);
    EXPECT_THROW(required_h(sys_a(), 1.0, 1.0, 0.0), InvalidArgument);
}

TEST(ErrorBound, InverseOfRequiredH) {
    const double h = required_h(sys_a(), 2.0, 1.5, 0.3);
    EXPECT_NEAR(error_bound(sys_a(), 2.0, 1.5, h), 0.3, 1e-14);
}

TEST(LoglogSlope, ExactPowerLaw) {
    const std::vector<double> h{0.2, 0.1, 0.05, 0.025};
    std::vector<double> e;
    for (double x : h) {
        e.push_back(3.0 * x * x);
    }
    EXPECT_NEAR(loglog_slope(h, e), 2.0, 1e-12);
    EXPECT_THROW(loglog_slope({0.1}, {1.0}), InvalidArgument);
    EXPECT_THROW(loglog_slope({0.1, 0.2}, {0.0, 1.0}), InvalidArgument);
}

namespace {

RelaxedSignal random_relaxed(Rng& rng, std::size_t modes, double horizon) {
    const std::size_t count = 1 + rng.index(6);
    std::vector<double> bp{0.0};
    for (std::size_t k = 1; k < count; ++k) {
        bp.push_back(horizon * static_cast<double>(k) / static_cast<double>(count) +
                     rng.uniform(-0.05, 0.05));
    }
    bp.push_back(horizon);
    std::vector<Vector> w;
    for (std::size_t k = 0; k < count; ++k) {
        Vector a(static_cast<Eigen::Index>(modes));
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a(i) = rng.index(4) == 0 ? 0.0 : rng.uniform(0.0, 1.0);
        }
        if (a.sum() == 0.0) {
            a(0) = 1.0;
        }
        w.push_back(a / a.sum());
    }
    return RelaxedSignal(bp, w);
}

}  // namespace

TEST(ChatterProperty, MeasurePreservation) {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = 2 + rng.index(3);
        const double horizon = rng.uniform(0.5, 3.0);
        const double h = rng.uniform(0.05, 0.7);
        const RelaxedSignal s = random_relaxed(rng, m, horizon);
        const ChatterPlan plan = build_plan(s, h, horizon);
        for (std::size_t k = 0; k < plan.slot_times.size(); ++k) {
            const auto& slots = plan.slot_times[k];
            const double start = static_cast<double>(k) * h;
            const double end = std::min(static_cast<double>(k + 1) * h, horizon);
            EXPECT_EQ(slots.front(), start);
            EXPECT_EQ(slots.back(), end);
            for (std::size_t i = 0; i < m; ++i) {
                EXPECT_NEAR(slots[i + 1] - slots[i], s.integral(i, start, end), 1e-12);
            }
        }
        // Occupation time of the pure signal per mode, per subinterval.
        const PureSignal p = build_pure(s, h, horizon);
        for (std::size_t k = 0; k < plan.slot_times.size(); ++k) {
            const double start = static_cast<double>(k) * h;
            const double end = std::min(static_cast<double>(k + 1) * h, horizon);
            std::vector<double> occ(m, 0.0);
            for (std::size_t j = 0; j < p.num_intervals(); ++j) {
                const double a = std::max(p.breakpoints()[j], start);
                const double b = std::min(p.breakpoints()[j + 1], end);
                if (b > a) {
                    occ[p.modes()[j]] += b - a;
                }
            }
            for (std::size_t i = 0; i < m; ++i) {
                EXPECT_NEAR(occ[i], s.integral(i, start, end), 1e-12);
            }
        }
    }
}

TEST(ChatterProperty, ScalesLinearlyInInitialState) {
    Rng rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        const auto gen = synth::gen_stabilizable(100 + trial, 2, 2, 0.1);
        const RelaxedSignal s = random_relaxed(rng, 2, 1.0);
        const Vector z = rng.vector(2);
        const double base = chatter_error(gen.system, s, 0.1, 1.0, z);
        for (double a : {0.5, 3.0, 10.0}) {
            EXPECT_NEAR(chatter_error(gen.system, s, 0.1, 1.0, a * z), a * base,
                        1e-9 * std::max(1.0, a * base));
        }
    }
}

namespace {

// Checks the guarantee for every unit initial state on a coarse circle grid
// and returns the worst error relative to epsilon.
double guarantee_ratio(const SwitchedLinearSystem& sys, double horizon, double epsilon) {
    const Vector w = Vector::Constant(static_cast<Eigen::Index>(sys.num_modes()),
                                      1.0 / static_cast<double>(sys.num_modes()));
    const RelaxedSignal s = RelaxedSignal::constant(w, horizon);
    const double c = relaxed_gain(sys, s, horizon);
    const double h = required_h(sys, horizon, c, epsilon) / 2.0;
    double worst = 0.0;
    for (const Vector& z : unit_grid(sys.dim(), 16)) {
        worst = std::max(worst, chatter_error(sys, s, h, horizon, z) / epsilon);
    }
    return worst;
}

}  // namespace

TEST(ChatterProperty, GuaranteeOnSysA) {
    for (double eps : {0.5, 0.1}) {
        EXPECT_LE(guarantee_ratio(sys_a(), 1.0, eps), 1.0) << "epsilon " << eps;
    }
}

TEST(ChatterProperty, GuaranteeOnGeneratedSystems) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto gen = synth::gen_stabilizable(seed, 2, 2, 0.1);
        for (double eps : {0.5, 0.1}) {
            EXPECT_LE(guarantee_ratio(gen.system, 1.0, eps), 1.0)
                << "seed " << seed << " epsilon " << eps;
        }
    }
}

TEST(ChatterProperty, FirstOrderConvergence) {
    const std::vector<double> h{0.2, 0.1, 0.05, 0.025};
    const RelaxedSignal s = RelaxedSignal::constant(vec({0.5, 0.5}), 2.0);
    std::vector<double> err;
    for (const auto& row : error_sweep(sys_a(), s, 2.0, vec({1.0, 1.0}), h, 1.0)) {
        err.push_back(row.sup_error);
    }
    EXPECT_GE(loglog_slope(h, err), 0.8);
}

TEST(ErrorSweep, RowsFollowInputOrder) {
    const std::vector<double> h{0.1, 0.4, 0.2};
    const auto rows = error_sweep(sys_a(), RelaxedSignal::constant(vec({0.5, 0.5}), 1.0), 1.0,
                                  vec({1.0, 0.0}), h, 1.0);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(rows[i].h, h[i]);
        EXPECT_LE(rows[i].sup_error, rows[i].bound);
    }
}
