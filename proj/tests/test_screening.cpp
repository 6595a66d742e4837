#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include <tisp/errors.hpp>
#include <tisp/linalg.hpp>
#include <tisp/screening.hpp>
#include <tisp/simulation.hpp>

#include "oracles.hpp"

using namespace tisp;

namespace {

bool contains(const Support& s, Index j)
{
    return std::find(s.begin(), s.end(), j) != s.end();
}

} // namespace

TEST(Screening, OrderStatisticCut)
{
    const Vector mags = (Vector(4) << 5.0, 3.0, 1.0, 0.5).finished();
    const auto c = proportional_cut(mags, 2);
    EXPECT_EQ(c.kept, (std::vector<Index>{0, 1}));
    EXPECT_GT(c.cut, 1.0);
    EXPECT_LE(c.cut, 3.0);
    EXPECT_EQ(c.cut, 2.0);

    const Vector tied = (Vector(4) << 1.0, 2.0, 2.0, 2.0).finished();
    EXPECT_EQ(proportional_cut(tied, 2).kept, (std::vector<Index>{1, 2}));
    EXPECT_EQ(proportional_cut(mags, 4).kept.size(), 4u);
}

TEST(Screening, FirstIterateIsMarginalRanking)
{
    const Matrix X = oracle::random_matrix(40, 30, 1);
    const Vector y = X.col(3) - X.col(7) + oracle::random_vector(40, 2);
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(30),
                                        ThresholdRule::hard_ridge(0.1), 0.0);
    const ScreenResult r = screen_proportional(pr, 0.2, ThresholdRule::hard_ridge(0.1));
    const Vector marg = (X.transpose() * y).cwiseAbs();
    std::vector<Index> order(30);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return marg(a) > marg(b); });
    Support top(order.begin(), order.begin() + 8);
    std::sort(top.begin(), top.end());
    EXPECT_EQ(r.first_kept, top);
}

TEST(Screening, BernoulliFirstIterateUsesCentredScores)
{
    const Matrix X = oracle::random_matrix(60, 20, 3);
    Vector y(60);
    for (Index i = 0; i < 60; ++i) y(i) = X(i, 2) > 0.3 ? 1.0 : 0.0;
    const Problem pr = Problem::uniform(X, y, GlmFamily::BernoulliLogit, GroupSpec::singletons(20),
                                        ThresholdRule::hard(), 0.0);
    const ScreenResult r = screen_proportional(pr, 0.05, ThresholdRule::hard());
    const Vector marg = (X.transpose() * (y.array() - 0.5).matrix()).cwiseAbs();
    std::vector<Index> order(20);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return marg(a) > marg(b); });
    Support top(order.begin(), order.begin() + 3);
    std::sort(top.begin(), top.end());
    EXPECT_EQ(r.first_kept, top);
}

TEST(Screening, FullAlphaKeepsEverything)
{
    const Problem pr = Problem::uniform(oracle::random_matrix(10, 10, 4), oracle::random_vector(10, 5),
                                        GlmFamily::GaussianIdentity, GroupSpec::singletons(10), ThresholdRule::hard(), 0.0);
    const ScreenResult r = screen_proportional(pr, 1.0, ThresholdRule::hard());
    EXPECT_EQ(r.kept.size(), 10u);
}

TEST(Screening, ExactCardinality)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Matrix X = oracle::random_matrix(30, 50, 10 + s);
        const Problem pr = Problem::uniform(X, oracle::random_vector(30, 20 + s), GlmFamily::GaussianIdentity,
                                            GroupSpec::singletons(50), ThresholdRule::soft(), 0.0);
        const ScreenResult r = screen_proportional(pr, 0.3, ThresholdRule::soft());
        EXPECT_EQ(r.kept.size(), 9u);
        EXPECT_EQ((r.final_beta.array() != 0.0).count(), 9);
        for (Index j : r.kept) EXPECT_NE(r.final_beta(j), 0.0);
    }
}

TEST(Screening, GroupsCountAsUnits)
{
    const Matrix X = oracle::random_matrix(10, 12, 30);
    const GroupSpec g = GroupSpec::from_blocks({{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}, {10, 11}}, 12);
    const Problem pr = Problem::uniform(X, oracle::random_vector(10, 31), GlmFamily::GaussianIdentity, g,
                                        ThresholdRule::hard(), 0.0);
    const ScreenResult r = screen_proportional(pr, 0.3, ThresholdRule::hard());
    EXPECT_EQ(r.kept_groups.size(), 3u);
    EXPECT_EQ(r.kept.size(), 6u);
}

TEST(Screening, Errors)
{
    const Problem pr = Problem::uniform(oracle::random_matrix(20, 5, 40), oracle::random_vector(20, 41),
                                        GlmFamily::GaussianIdentity, GroupSpec::singletons(5), ThresholdRule::hard(), 0.0);
    EXPECT_THROW(screen_proportional(pr, 0.5, ThresholdRule::hard()), ParameterError);
    EXPECT_THROW(screen_proportional(pr, 0.0, ThresholdRule::hard()), ParameterError);
    EXPECT_THROW(screen_proportional(pr, 1.5, ThresholdRule::hard()), ParameterError);
    EXPECT_THROW(screen_proportional(pr, 0.1, ThresholdRule::ridge(1.0)), ParameterError);
}

TEST(Screening, CorrelatedDesignMovesBeyondMarginalRanking)
{
    const Ar1Design d{50, 40, 0.9, 1.0, 1};
    const GlmDataset ds = gen_ar1_glm(d, GlmFamily::GaussianIdentity, 50);
    Vector beta = Vector::Zero(40);
    beta(10) = 2.0;
    beta(11) = -2.0;
    beta(30) = 1.0;
    CounterRng rng(1, 5);
    Vector y = ds.X * beta;
    for (Index i = 0; i < 50; ++i) y(i) += 0.5 * rng.normal();
    Matrix X = ds.X;
    normalize_columns(X);
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(40),
                                        ThresholdRule::hard_ridge(0.01), 0.0);
    const ScreenResult r = screen_proportional(pr, 0.2, ThresholdRule::hard_ridge(0.01));
    EXPECT_TRUE(r.converged);
    EXPECT_NE(r.kept, r.first_kept);
    // The canceling pair is invisible marginally but found after iterating.
    EXPECT_FALSE(contains(r.first_kept, 10));
    EXPECT_FALSE(contains(r.first_kept, 11));
    EXPECT_TRUE(contains(r.kept, 10));
    EXPECT_TRUE(contains(r.kept, 11));
}
