#include <cmath>

#include <gtest/gtest.h>

#include "attracta/box.hpp"
#include "attracta/errors.hpp"
#include "attracta/integrator.hpp"
#include "attracta/model_zoo.hpp"
#include "attracta/system.hpp"

using namespace attracta;

namespace {

DelaySystem scalar(Nonlinearity f, const DelayDistribution& d, Box domain = Box::unbounded(1)) {
    return DelaySystem({Rate::constant(1.0)}, std::move(f), uniform_grid(1, d), std::move(domain));
}

}  // namespace

TEST(Box, CenteredAndMargins) {
    const double c[] = {1.0, -1.0}, w[] = {0.5, 2.0};
    const Box b = Box::centered(c, w);
    EXPECT_EQ(b[0], (Interval{0.5, 1.5}));
    EXPECT_EQ(b[1], (Interval{-3.0, 1.0}));
    const double inside[] = {1.0, 0.0}, outside[] = {2.0, 0.0};
    EXPECT_NEAR(b.margin(inside), 0.5, 1e-15);
    EXPECT_NEAR(b.margin(outside), -0.5, 1e-15);
    EXPECT_TRUE(Box::unbounded(2).strictly_contains(b));
    EXPECT_FALSE(b.strictly_contains(b));
}

TEST(History, ConstantAndTable) {
    const auto h = HistoryFunction::constant({1.0, 2.0}, 3.0);
    EXPECT_EQ(h.t0(), 3.0);
    EXPECT_EQ(h.value(1, -100.0), 2.0);
    EXPECT_EQ(h.constant_value(0), 1.0);
    const auto tab = HistoryFunction::table({-2.0, 0.0}, {{0.0}, {4.0}});
    EXPECT_DOUBLE_EQ(tab.value(0, -1.0), 2.0);
    EXPECT_DOUBLE_EQ(tab.value(0, -5.0), 0.0);  // constant to the left
    EXPECT_FALSE(tab.constant_value(0));
}

TEST(RhsEval, PureLeakage) {
    const DelaySystem sys = scalar(Nonlinearity(1, [](std::size_t, std::span<const double>) { return 0.0; }),
                                   DelayDistribution::point_mass(Lag::constant(1.0)));
    const Trajectory traj(HistoryFunction::constant({2.0}));
    const double x[] = {2.0};
    EXPECT_DOUBLE_EQ(rhs_eval(sys, 0.0, x, traj)[0], -2.0);
}

TEST(RhsEval, SqrtPairAtEquilibrium) {
    const auto unit = DelayDistribution::point_mass(Lag::constant(1.0));
    const auto b = build_pair_example("sqrt_pair", unit, unit);
    const Trajectory traj(HistoryFunction::constant({1.0, 1.0}));
    const double x[] = {1.0, 1.0};
    const Vector r = rhs_eval(b.system, 0.0, x, traj);
    EXPECT_DOUBLE_EQ(r[0], 0.0);
    EXPECT_DOUBLE_EQ(r[1], 0.0);
}

TEST(RhsEval, UniformKernelOverLinearHistory) {
    const DelaySystem sys = scalar(Nonlinearity(1, [](std::size_t, std::span<const double> x) { return x[0]; }),
                                   DelayDistribution::uniform(2.0));
    const Trajectory traj(
        HistoryFunction::from_function(1, -1.0, 2.0, [](std::size_t, double t) { return t; }));
    const double x[] = {1.0};
    EXPECT_NEAR(rhs_eval(sys, 2.0, x, traj)[0], 0.0, 1e-10);
}

TEST(RhsEval, DomainExitReported) {
    const DelaySystem sys = scalar(
        Nonlinearity(1, [](std::size_t, std::span<const double> x) { return std::sqrt(x[0]); }),
        DelayDistribution::point_mass(Lag::constant(1.0)), Box::positive_orthant(1));
    const Trajectory traj(HistoryFunction::constant({-1.0}));
    const double x[] = {1.0};
    EXPECT_THROW(rhs_eval(sys, 0.0, x, traj), DomainExit);
}

TEST(RhsEval, HistoryGapReported) {
    // Histories continue constantly to the left, so a gap can only open to
    // the right of the last accepted step.
    const Trajectory traj(HistoryFunction::constant({1.0}));
    EXPECT_THROW(traj.value(0, 5.0), InsufficientHistory);
}

TEST(Admissibility, EmptyIntervalAndBadRates) {
    const DelaySystem sys = scalar(Nonlinearity(1, [](std::size_t, std::span<const double> x) { return x[0]; }),
                                   DelayDistribution::point_mass(Lag::constant(1.0)));
    try {
        check_admissible(sys, HistoryFunction::constant({1.0}, 5.0), 2.0);
        FAIL() << "expected InvalidConfig";
    } catch (const InvalidConfig& e) {
        EXPECT_NE(std::string(e.what()).find("empty integration interval"), std::string::npos);
    }
    EXPECT_THROW(Rate::constant(-1.0), InvalidParameter);
    EXPECT_THROW(Rate::oscillatory(0.0), InvalidParameter);
}

TEST(Admissibility, HistoryOutsideDomain) {
    const auto unit = DelayDistribution::point_mass(Lag::constant(1.0));
    const auto b = build_pair_example("sqrt_pair", unit, unit);
    EXPECT_ANY_THROW(check_admissible(b.system, HistoryFunction::constant({-0.5, 1.0}), 10.0));
}

TEST(System, ActiveLagsSkipIgnoredCoordinates) {
    const auto b = build_pair_example("sqrt_pair", DelayDistribution::point_mass(Lag::constant(1.5)),
                                      DelayDistribution::point_mass(Lag::constant(0.5)));
    double longest = 0.0;
    for (const auto& l : b.system.active_lags()) longest = std::max(longest, l.parameter());
    EXPECT_DOUBLE_EQ(longest, 1.5);
    EXPECT_DOUBLE_EQ(b.system.earliest_argument(10.0), 8.5);
}
