#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <tisp/errors.hpp>
#include <tisp/random.hpp>
#include <tisp/threshold.hpp>

#include "oracles.hpp"

using namespace tisp;

namespace {

struct Case
{
    ThresholdRule rule;
    oracle::Shape shape;
    double param;
};

std::vector<Case> all_rules()
{
    return {
        {ThresholdRule::soft(), oracle::Shape::Soft, 0.0},
        {ThresholdRule::ridge(0.7), oracle::Shape::Ridge, 0.7},
        {ThresholdRule::hard(), oracle::Shape::Hard, 0.0},
        {ThresholdRule::scad(3.7), oracle::Shape::Scad, 3.7},
        {ThresholdRule::firm(0.4), oracle::Shape::Firm, 0.4},
        {ThresholdRule::hard_ridge(0.5), oracle::Shape::HardRidge, 0.5},
    };
}

} // namespace

TEST(ThresholdScalar, Examples)
{
    EXPECT_DOUBLE_EQ(threshold_scalar(ThresholdRule::soft(), 3.0, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(threshold_scalar(ThresholdRule::hard_ridge(0.5), 3.0, 1.0), 2.0);
    EXPECT_NEAR(threshold_scalar(ThresholdRule::firm(0.4), 0.5, 1.0), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(threshold_scalar(ThresholdRule::scad(3.7), 3.0, 1.0), 2.5882, 1e-4);
}

TEST(ThresholdScalar, ScadMatchesGridMinimizer)
{
    const double t = 3.0;
    const double lambda = 1.0;
    const auto f = [&](double th) { return 0.5 * (t - th) * (t - th) + oracle::penalty(oracle::Shape::Scad, th, lambda, 3.7); };
    const double grid = oracle::grid_argmin(f, 0.0, 4.0, 1e-5);
    EXPECT_NEAR(threshold_scalar(ThresholdRule::scad(3.7), t, lambda), grid, 2e-5);
}

TEST(ThresholdScalar, TieKeepsBoundary)
{
    EXPECT_DOUBLE_EQ(threshold_scalar(ThresholdRule::hard(), 1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(threshold_scalar(ThresholdRule::hard_ridge(1.0), -1.0, 1.0), -0.5);
}

TEST(ThresholdScalar, LambdaZeroDegenerates)
{
    EXPECT_DOUBLE_EQ(threshold_scalar(ThresholdRule::soft(), -2.5, 0.0), -2.5);
    EXPECT_DOUBLE_EQ(threshold_scalar(ThresholdRule::hard(), 0.3, 0.0), 0.3);
    EXPECT_DOUBLE_EQ(threshold_scalar(ThresholdRule::hard_ridge(1.0), 3.0, 0.0), 1.5);
}

TEST(ThresholdRule, ParameterDomain)
{
    EXPECT_THROW(ThresholdRule::scad(2.0), ParameterError);
    EXPECT_THROW(ThresholdRule::firm(1.5), ParameterError);
    EXPECT_THROW(ThresholdRule::firm(-0.1), ParameterError);
    EXPECT_THROW(ThresholdRule::ridge(-1.0), ParameterError);
    EXPECT_THROW(ThresholdRule::hard_ridge(-1.0), ParameterError);
    EXPECT_THROW(threshold_scalar(ThresholdRule::soft(), 1.0, -1.0), ParameterError);
}

TEST(ThresholdScalar, ShrinkageProperties)
{
    CounterRng rng(11);
    for (const auto& c : all_rules()) {
        for (int i = 0; i < 200; ++i) {
            const double lambda = 3.0 * rng.uniform();
            const double t = 8.0 * rng.uniform() - 4.0;
            const double t2 = t + 2.0 * rng.uniform();
            const double v = threshold_scalar(c.rule, t, lambda);
            EXPECT_EQ(threshold_scalar(c.rule, -t, lambda), -v) << c.rule.name();
            EXPECT_LE(v, threshold_scalar(c.rule, t2, lambda)) << c.rule.name();
            if (t >= 0) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, t);
            }
        }
        EXPECT_EQ(threshold_scalar(c.rule, 0.0, 1.0), 0.0);
        EXPECT_GT(threshold_scalar(c.rule, 1e6, 1.0), 1e5) << c.rule.name();
    }
}

TEST(ThresholdVector, Examples)
{
    const Vector a = (Vector(2) << 3.0, 4.0).finished();
    const Vector out = threshold_vector(ThresholdRule::soft(), a, 1.0);
    EXPECT_NEAR(out(0), 2.4, 1e-15);
    EXPECT_NEAR(out(1), 3.2, 1e-15);
    for (const auto& c : all_rules()) {
        EXPECT_EQ(threshold_vector(c.rule, Vector::Zero(2), 2.0), Vector::Zero(2));
    }
    const Vector small = (Vector(2) << 0.3, 0.4).finished();
    EXPECT_EQ(threshold_vector(ThresholdRule::hard(), small, 1.0), Vector::Zero(2));
}

TEST(ThresholdVector, NormMatchesScalar)
{
    for (const auto& c : all_rules()) {
        for (std::uint64_t s = 0; s < 30; ++s) {
            const Vector a = oracle::random_vector(4, s);
            const double lambda = 0.5 + 0.1 * static_cast<double>(s % 10);
            EXPECT_NEAR(threshold_vector(c.rule, a, lambda).norm(), threshold_scalar(c.rule, a.norm(), lambda), 1e-12);
        }
    }
}

TEST(Penalty, Examples)
{
    EXPECT_DOUBLE_EQ(penalty_value(ThresholdRule::hard(), 0.5, 1.0), 0.375);
    EXPECT_DOUBLE_EQ(penalty_value(ThresholdRule::hard(), 2.0, 1.0), 0.5);
    // 0.5 * 0.5 * 1 + 0.5 / 1.5
    EXPECT_NEAR(penalty_value(ThresholdRule::hard_ridge(0.5), 1.0, 1.0), 0.25 + 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(penalty_value(ThresholdRule::soft(), 2.0, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(penalty_value(ThresholdRule::soft(), -2.0, 1.0), 2.0);
}

TEST(Penalty, NumericConstructionExamples)
{
    EXPECT_NEAR(penalty_from_rule_numeric(ThresholdRule::hard(), 0.5, 1.0, 1e-4), 0.375, 1e-6);
    EXPECT_NEAR(penalty_from_rule_numeric(ThresholdRule::soft(), 3.0, 2.0, 1e-4), 6.0, 1e-6);
    EXPECT_NEAR(penalty_from_rule_numeric(ThresholdRule::ridge(1.0), 2.0, 0.0, 1e-4), 2.0, 1e-6);
}

TEST(Penalty, ClosedFormMatchesOracleFormulas)
{
    CounterRng rng(5);
    for (const auto& c : all_rules()) {
        for (int i = 0; i < 50; ++i) {
            const double theta = 6.0 * rng.uniform() - 3.0;
            const double lambda = 2.0 * rng.uniform();
            EXPECT_NEAR(penalty_value(c.rule, theta, lambda), oracle::penalty(c.shape, theta, lambda, c.param), 1e-12)
                << c.rule.name();
        }
    }
}

TEST(Penalty, ContinuousNondecreasingZeroAtOrigin)
{
    for (const auto& c : all_rules()) {
        EXPECT_EQ(penalty_value(c.rule, 0.0, 1.3), 0.0);
        double prev = 0.0;
        for (int i = 1; i <= 4000; ++i) {
            const double v = penalty_value(c.rule, 1e-3 * i, 1.3);
            EXPECT_GE(v, prev - 1e-15) << c.rule.name();
            EXPECT_LE(v - prev, 1.3e-3 * (1.0 + c.param) * 4 + 1e-12) << c.rule.name();
            prev = v;
        }
    }
}

TEST(Curvature, Constants)
{
    EXPECT_EQ(curvature_constant(ThresholdRule::soft()).l_theta, 0.0);
    EXPECT_EQ(curvature_constant(ThresholdRule::ridge(2.0)).l_theta, 0.0);
    EXPECT_EQ(curvature_constant(ThresholdRule::hard()).l_theta, 1.0);
    EXPECT_NEAR(curvature_constant(ThresholdRule::scad(3.7)).l_theta, 1.0 / 2.7, 1e-15);
    EXPECT_EQ(curvature_constant(ThresholdRule::firm(0.4)).l_theta, 0.4);
    EXPECT_EQ(curvature_constant(ThresholdRule::hard_ridge(0.3)).l_theta, 1.0);
}

TEST(Curvature, FirmSlopeFromNumericInverse)
{
    // s(u) = Theta^{-1}(u) - u on (0, lambda) has slope -alpha.
    const auto rule = ThresholdRule::firm(0.4);
    const double lambda = 1.0;
    for (double u : {0.1, 0.3, 0.5, 0.8}) {
        const double h = 1e-4;
        const double sp = (threshold_inverse(rule, u + h, lambda) - (u + h)) - (threshold_inverse(rule, u - h, lambda) - (u - h));
        EXPECT_NEAR(sp / (2 * h), -0.4, 1e-6);
    }
}

TEST(Curvature, BoundsNumericSlope)
{
    for (const auto& c : all_rules()) {
        const double L = curvature_constant(c.rule).l_theta;
        const double lambda = 1.0;
        const double h = 1e-3;
        for (int i = 1; i < 5000; ++i) {
            const double u = 1e-3 * i;
            const double s0 = threshold_inverse(c.rule, u, lambda) - u;
            const double s1 = threshold_inverse(c.rule, u + h, lambda) - (u + h);
            EXPECT_GE((s1 - s0) / h, -L - 1e-6) << c.rule.name() << " u=" << u;
        }
    }
}

TEST(KillThreshold, Values)
{
    EXPECT_DOUBLE_EQ(kill_threshold(ThresholdRule::soft(), 2.0), 2.0);
    EXPECT_DOUBLE_EQ(kill_threshold(ThresholdRule::hard(), 2.0), 2.0);
    EXPECT_DOUBLE_EQ(kill_threshold(ThresholdRule::firm(0.25), 2.0), 0.5);
    EXPECT_DOUBLE_EQ(kill_threshold(ThresholdRule::ridge(1.0), 2.0), 0.0);
}

TEST(Lemma, VectorThresholdMinimizesRadialProblem)
{
    // min 0.5 ||y - b||^2 + P(||b||): the minimizer lies on the ray of y, so
    // scan the radius on a fine grid.
    for (const auto& c : all_rules()) {
        for (std::uint64_t s = 0; s < 10; ++s) {
            const Vector y = oracle::random_vector(3, s + 100) * 1.5;
            const double lambda = 0.8;
            const double r = y.norm();
            if (std::abs(r - lambda) < 1e-2) continue;
            const auto f = [&](double rho) {
                return 0.5 * (r - rho) * (r - rho) + oracle::penalty(c.shape, rho, lambda, c.param);
            };
            const double best = oracle::grid_argmin(f, 0.0, r + 1.0, 1e-4);
            const Vector b = threshold_vector(c.rule, y, lambda);
            EXPECT_NEAR(b.norm(), best, 2e-4) << c.rule.name();
        }
    }
}

TEST(Lemma, HardMinimizesL0Problem)
{
    CounterRng rng(9);
    for (int i = 0; i < 200; ++i) {
        const double y = 6.0 * rng.uniform() - 3.0;
        const double lambda = 0.2 + 2.0 * rng.uniform();
        if (std::abs(std::abs(y) - lambda) < 1e-3) continue;
        const auto f = [&](double th) { return 0.5 * (y - th) * (y - th) + (std::abs(th) > 1e-9 ? 0.5 * lambda * lambda : 0.0); };
        // The grid contains 0 exactly and y to within a step.
        const double best = oracle::grid_argmin(f, -4.0, 4.0, 1e-4);
        const double th = threshold_scalar(ThresholdRule::hard(), y, lambda);
        EXPECT_NEAR(th, best, 1e-3);
    }
}
