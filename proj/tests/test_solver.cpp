#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <tisp/errors.hpp>
#include <tisp/linalg.hpp>
#include <tisp/simulation.hpp>
#include <tisp/solver.hpp>

#include "oracles.hpp"

using namespace tisp;

namespace {

Problem orthonormal(const ThresholdRule& rule)
{
    return Problem::uniform(Matrix::Identity(2, 2), (Vector(2) << 3.0, 0.5).finished(),
                            GlmFamily::GaussianIdentity, GroupSpec::singletons(2), rule, 1.0);
}

SolverOptions unit_k0()
{
    SolverOptions o;
    o.k0 = 1.0;
    return o;
}

double gaussian_constant(Index n)
{
    return 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

Vector bernoulli_response(const Matrix& X, const Vector& beta, std::uint64_t seed)
{
    CounterRng rng(seed, 9);
    const Vector eta = X * beta;
    Vector y(eta.size());
    for (Index i = 0; i < eta.size(); ++i) y(i) = sample_response(GlmFamily::BernoulliLogit, eta(i), rng);
    return y;
}

} // namespace

TEST(GroupSpec, Validation)
{
    EXPECT_NO_THROW(GroupSpec::from_blocks({{0, 2}, {1}}, 3));
    EXPECT_THROW(GroupSpec::from_blocks({{0, 1}, {1, 2}}, 3), ParameterError);
    EXPECT_THROW(GroupSpec::from_blocks({{0}, {2}}, 3), ParameterError);
    EXPECT_THROW(GroupSpec::from_blocks({{0, 1, 2}, {}}, 3), ParameterError);
    EXPECT_THROW(GroupSpec::from_blocks({{0, 1, 3}}, 3), ParameterError);
    EXPECT_EQ(GroupSpec::singletons(4).size(), 4);
}

TEST(Solver, OrthonormalSoftOneStep)
{
    const Problem pr = orthonormal(ThresholdRule::soft());
    const Vector b1 = tisp_step(Vector::Zero(2), pr);
    EXPECT_EQ(b1, (Vector(2) << 2.0, 0.0).finished());
    const FitResult fit = tisp_fit(pr, unit_k0());
    EXPECT_TRUE(fit.converged);
    EXPECT_EQ(fit.beta, (Vector(2) << 2.0, 0.0).finished());
    EXPECT_EQ(fit.fixed_point_residual, 0.0);
    EXPECT_EQ(fit.k0_used, 1.0);
}

TEST(Solver, OrthonormalHard)
{
    const FitResult fit = tisp_fit(orthonormal(ThresholdRule::hard()), unit_k0());
    EXPECT_EQ(fit.beta, (Vector(2) << 3.0, 0.0).finished());
}

TEST(Solver, StepExamples)
{
    const Matrix X = oracle::random_matrix(10, 4, 1);
    const Vector y = oracle::random_vector(10, 2);
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(4),
                                        ThresholdRule::soft(), 0.7);
    const Vector xty = X.transpose() * y;
    const Vector step = tisp_step(Vector::Zero(4), pr);
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(step(j), threshold_scalar(ThresholdRule::soft(), xty(j), 0.7));

    // A two-column group whose surrogate block is (3, 4).
    Problem grp = Problem::uniform(Matrix::Identity(2, 2), (Vector(2) << 3.0, 4.0).finished(),
                                   GlmFamily::GaussianIdentity, GroupSpec::from_blocks({{0, 1}}, 2),
                                   ThresholdRule::soft(), 1.0);
    const Vector g = tisp_step(Vector::Zero(2), grp);
    EXPECT_NEAR(g(0), 2.4, 1e-15);
    EXPECT_NEAR(g(1), 3.2, 1e-15);
}

TEST(Solver, RelaxedStepIsStationaryAtFixedPoint)
{
    const Problem pr = orthonormal(ThresholdRule::soft());
    const Vector beta = (Vector(2) << 2.0, 0.0).finished();
    Vector xi = surrogate(pr, beta);
    const Vector s = xi;
    const Vector next = tisp_step_relaxed(beta, pr, 0.0, 2.0, xi);
    EXPECT_EQ(xi, s);
    EXPECT_EQ(next, beta);
}

TEST(Solver, ObjectiveExamples)
{
    const Index n = 6;
    Vector y(n);
    y << 1, 0, 1, 1, 0, 0;
    const Problem b = Problem::uniform(oracle::random_matrix(n, 2, 3), y, GlmFamily::BernoulliLogit,
                                       GroupSpec::singletons(2), ThresholdRule::soft(), 1.0);
    EXPECT_NEAR(objective(b, Vector::Zero(2)), n * std::log(2.0), 1e-12);

    const Problem soft = orthonormal(ThresholdRule::soft());
    const Vector b2 = (Vector(2) << 2.0, 0.0).finished();
    EXPECT_NEAR(objective(soft, b2) - gaussian_constant(2), 0.5 * (soft.y - b2).squaredNorm() + 2.0, 1e-12);

    const Problem hard = orthonormal(ThresholdRule::hard());
    const Vector b3 = (Vector(2) << 3.0, 0.0).finished();
    const double negL = -log_likelihood(GlmFamily::GaussianIdentity, hard.y, b3);
    EXPECT_NEAR(objective(hard, b3), negL + 0.5, 1e-12);
}

TEST(Solver, FixedPointResidualExamples)
{
    const Problem pr = orthonormal(ThresholdRule::soft());
    EXPECT_EQ(fixed_point_residual(pr, (Vector(2) << 2.0, 0.0).finished()), 0.0);

    const Matrix X = oracle::random_matrix(15, 5, 4);
    const Vector y = oracle::random_vector(15, 5);
    const double top = (X.transpose() * y).lpNorm<Eigen::Infinity>();
    const Problem big = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(5),
                                         ThresholdRule::hard(), top * 1.01);
    EXPECT_EQ(fixed_point_residual(big, Vector::Zero(5)), 0.0);
}

TEST(Solver, SoftMatchesCoordinateDescent)
{
    const Matrix X = oracle::random_matrix(20, 8, 31);
    const Vector y = X.leftCols(3).rowwise().sum() + oracle::random_vector(20, 32);
    const double k0 = spectral_norm(X).norm / std::sqrt(2.0);
    const double lambda = 0.5;
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(8),
                                        ThresholdRule::soft(), lambda);
    SolverOptions o;
    o.k0 = k0;
    o.omega = 1;
    o.tol = 1e-12;
    o.max_iter = 200000;
    const FitResult fit = tisp_fit(pr, o);
    const Matrix Xs = X / k0;
    const Vector ref = oracle::lasso_cd(Xs, y, lambda, 1e-14);
    const double f_ref = oracle::lasso_objective(Xs, y, ref, lambda);
    const double f_fit = objective(pr.scaled(k0), fit.beta_scaled) - gaussian_constant(20);
    EXPECT_NEAR(f_fit / f_ref, 1.0, 1e-6);
}

TEST(Solver, ZeroLambdaGivesLeastSquares)
{
    const Matrix X = oracle::random_matrix(50, 5, 41);
    const Vector y = oracle::random_vector(50, 42);
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(5),
                                        ThresholdRule::soft(), 0.0);
    // At the boundary k0 = ||X|| / sqrt(2) the top direction does not contract.
    SolverOptions o;
    o.k0 = spectral_norm(X).norm;
    o.tol = 1e-12;
    o.max_iter = 100000;
    const FitResult fit = tisp_fit(pr, o);
    const Vector ls = X.colPivHouseholderQr().solve(y);
    EXPECT_LE((fit.beta - ls).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Solver, DescentAndFixedPointOnRandomProblems)
{
    const std::vector<ThresholdRule> rules = {ThresholdRule::soft(), ThresholdRule::hard(), ThresholdRule::scad(),
                                              ThresholdRule::firm(0.5), ThresholdRule::hard_ridge(0.3),
                                              ThresholdRule::ridge(0.5)};
    for (std::uint64_t s = 0; s < 6; ++s) {
        for (GlmFamily f : {GlmFamily::GaussianIdentity, GlmFamily::BernoulliLogit}) {
            const Matrix X = oracle::random_matrix(30, 12, 600 + s);
            const Vector beta = ar1_true_beta(12, 1.0);
            const Vector y = f == GlmFamily::GaussianIdentity ? Vector(X * beta + oracle::random_vector(30, 700 + s))
                                                              : bernoulli_response(X, beta, 800 + s);
            for (const auto& r : rules) {
                Problem pr = Problem::uniform(X, y, f, GroupSpec::singletons(12), r, 0.05);
                SolverOptions o;
                o.omega = 1;
                const FitResult fit = tisp_fit(pr, o);
                for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
                    ASSERT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-9) << r.name();
                }
                if (fit.converged) {
                    EXPECT_LE(fit.fixed_point_residual, 1e-6);
                }
            }
        }
    }
}

TEST(Solver, InterceptOnlyBernoulli)
{
    Vector y = Vector::Zero(8);
    y(0) = 1.0;
    y(5) = 1.0;
    const Problem pr = Problem::uniform(oracle::random_matrix(8, 3, 51), y, GlmFamily::BernoulliLogit,
                                        GroupSpec::singletons(3), ThresholdRule::hard(), 1e6, true);
    const FitResult fit = tisp_fit(pr);
    EXPECT_EQ(fit.beta, Vector::Zero(3));
    EXPECT_NEAR(fit.intercept, std::log(0.25 / 0.75), 1e-10);
}

TEST(Solver, InterceptGaussianMatchesCentredFit)
{
    const Matrix X = oracle::random_matrix(40, 4, 61);
    const Vector y = (X * Vector::Ones(4)).array() + 5.0;
    const Problem pr = Problem::uniform(X, Vector(y + 0.1 * oracle::random_vector(40, 62)), GlmFamily::GaussianIdentity,
                                        GroupSpec::singletons(4), ThresholdRule::soft(), 0.0, true);
    SolverOptions o;
    o.tol = 1e-12;
    o.max_iter = 100000;
    const FitResult fit = tisp_fit(pr, o);
    Matrix Z(40, 5);
    Z << X, Vector::Ones(40);
    const Vector ls = Z.colPivHouseholderQr().solve(pr.y);
    EXPECT_LE((fit.beta - ls.head(4)).lpNorm<Eigen::Infinity>(), 1e-6);
    EXPECT_NEAR(fit.intercept, ls(4), 1e-6);
}

TEST(Solver, PoissonWithInterceptDescends)
{
    const Matrix X = oracle::random_matrix(60, 6, 71) * 0.4;
    Vector beta = Vector::Zero(6);
    beta(0) = 0.8;
    beta(3) = -0.5;
    CounterRng rng(72);
    const Vector eta = (X * beta).array() + 0.5;
    Vector y(60);
    for (Index i = 0; i < 60; ++i) y(i) = sample_response(GlmFamily::PoissonLog, eta(i), rng);
    const Problem pr = Problem::uniform(X, y, GlmFamily::PoissonLog, GroupSpec::singletons(6),
                                        ThresholdRule::soft(), 0.05, true);
    const FitResult fit = tisp_fit(pr);
    EXPECT_TRUE(fit.k0_heuristic);
    EXPECT_TRUE(fit.converged);
    EXPECT_FALSE(fit.warnings.empty());
}

TEST(Solver, TooSmallK0Fails)
{
    const Matrix X = oracle::random_matrix(30, 10, 81);
    const Vector y = oracle::random_vector(30, 82);
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(10),
                                        ThresholdRule::soft(), 0.0);
    SolverOptions o;
    o.k0 = 0.2 * spectral_norm(X).norm;
    try {
        tisp_fit(pr, o);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("rho"), std::string::npos);
    }
}

TEST(Solver, InvalidInputs)
{
    Problem pr = orthonormal(ThresholdRule::soft());
    SolverOptions o;
    o.omega = 3;
    EXPECT_THROW(tisp_fit(pr, o), ParameterError);
    Problem bad = pr;
    bad.lambdas(0) = -1.0;
    EXPECT_THROW(tisp_fit(bad), ParameterError);
    Problem nan = pr;
    nan.y(1) = std::nan("");
    EXPECT_THROW(tisp_fit(nan), DataError);
    Problem rows = pr;
    rows.y = Vector::Zero(3);
    EXPECT_THROW(tisp_fit(rows), ParameterError);
}

TEST(Solver, ZeroColumnsStayZero)
{
    Matrix X = oracle::random_matrix(25, 5, 91);
    X.col(2).setZero();
    const Problem pr = Problem::uniform(X, oracle::random_vector(25, 92), GlmFamily::GaussianIdentity,
                                        GroupSpec::singletons(5), ThresholdRule::soft(), 0.0);
    const FitResult fit = tisp_fit(pr);
    EXPECT_EQ(fit.beta(2), 0.0);
    EXPECT_FALSE(fit.warnings.empty());
}

TEST(Solver, WeightZeroLeavesGroupUnpenalized)
{
    const Matrix X = oracle::random_matrix(30, 3, 95);
    const Vector y = oracle::random_vector(30, 96) * 0.01;
    Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(3),
                                  ThresholdRule::hard(), 100.0);
    pr.weights = (Vector(3) << 0.0, 1.0, 1.0).finished();
    const FitResult fit = tisp_fit(pr);
    EXPECT_NE(fit.beta(0), 0.0);
    EXPECT_EQ(fit.beta(1), 0.0);
    EXPECT_EQ(fit.beta(2), 0.0);
}

TEST(Solver, GroupPermutationInvariance)
{
    const Matrix X = oracle::random_matrix(40, 6, 101);
    const Vector y = X.col(0) + 0.5 * X.col(1) - X.col(4) + 0.3 * oracle::random_vector(40, 102);
    const GroupSpec g = GroupSpec::from_blocks({{0, 1}, {2, 3}, {4, 5}}, 6);
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, g, ThresholdRule::hard_ridge(0.1), 0.3);
    SolverOptions o;
    o.k0 = spectral_norm(X).norm;
    const FitResult base = tisp_fit(pr, o);

    // Swap within the first group, and reverse the group order.
    const std::vector<Index> perm = {5, 4, 3, 2, 1, 0};
    Matrix Xp(40, 6);
    for (Index j = 0; j < 6; ++j) Xp.col(j) = X.col(perm[static_cast<std::size_t>(j)]);
    const GroupSpec gp = GroupSpec::from_blocks({{0, 1}, {2, 3}, {4, 5}}, 6);
    const Problem pp = Problem::uniform(Xp, y, GlmFamily::GaussianIdentity, gp, ThresholdRule::hard_ridge(0.1), 0.3);
    const FitResult permuted = tisp_fit(pp, o);
    for (Index j = 0; j < 6; ++j) {
        const double a = base.beta(perm[static_cast<std::size_t>(j)]);
        const double b = permuted.beta(j);
        EXPECT_EQ(a == 0.0, b == 0.0);
        EXPECT_NEAR(a, b, 1e-10);
    }
}

TEST(Solver, HardLimitIsRestrictedMle)
{
    const Matrix X = oracle::random_matrix(60, 8, 111);
    const Vector truth = ar1_true_beta(8, 1.0);
    const Vector y = bernoulli_response(X, truth, 112);
    const Problem pr = Problem::uniform(X, y, GlmFamily::BernoulliLogit, GroupSpec::singletons(8),
                                        ThresholdRule::hard(), 0.15, true);
    SolverOptions o;
    o.tol = 1e-11;
    o.max_iter = 100000;
    const FitResult fit = tisp_fit(pr, o);
    ASSERT_TRUE(fit.converged);
    const CalibrationResult cal = calibrate(pr, fit.support());
    const Vector eta_fit = (X * fit.beta).array() + fit.intercept;
    const Vector eta_cal = (X * cal.beta).array() + cal.intercept;
    const double l_fit = log_likelihood(pr.family, y, eta_fit);
    const double l_cal = log_likelihood(pr.family, y, eta_cal);
    EXPECT_LE(std::abs(l_fit - l_cal), 1e-6 * std::abs(l_cal));
}

TEST(Solver, RelaxationFallbackIsReported)
{
    const Matrix X = oracle::random_matrix(30, 10, 121);
    const Problem pr = Problem::uniform(X, oracle::random_vector(30, 122), GlmFamily::GaussianIdentity,
                                        GroupSpec::singletons(10), ThresholdRule::hard(), 0.2);
    const FitResult fit = tisp_fit(pr);
    EXPECT_EQ(fit.omega_used, fit.relaxation_fallback ? 1 : 2);
    EXPECT_GE(fit.total_iterations, fit.iterations);
}

TEST(Calibrate, Examples)
{
    const Matrix X = oracle::random_matrix(30, 4, 131);
    const Vector y = oracle::random_vector(30, 132);
    const Problem pr = Problem::uniform(X, y, GlmFamily::GaussianIdentity, GroupSpec::singletons(4),
                                        ThresholdRule::soft(), 0.0);
    const CalibrationResult all = calibrate(pr, {0, 1, 2, 3});
    EXPECT_TRUE(all.converged);
    EXPECT_LE((all.beta - Vector(X.colPivHouseholderQr().solve(y))).norm(), 1e-9);

    const Problem ortho = Problem::uniform(Matrix::Identity(3, 3), (Vector(3) << 2.0, -1.0, 4.0).finished(),
                                           GlmFamily::GaussianIdentity, GroupSpec::singletons(3), ThresholdRule::soft(), 0.0);
    const CalibrationResult ridge = calibrate(ortho, {0, 2}, Calibration::ridge(1.0));
    EXPECT_NEAR(ridge.beta(0), 1.0, 1e-12);
    EXPECT_EQ(ridge.beta(1), 0.0);
    EXPECT_NEAR(ridge.beta(2), 2.0, 1e-12);

    Vector yb = Vector::Zero(8);
    yb(1) = 1.0;
    yb(6) = 1.0;
    const Problem b = Problem::uniform(oracle::random_matrix(8, 2, 133), yb, GlmFamily::BernoulliLogit,
                                       GroupSpec::singletons(2), ThresholdRule::soft(), 0.0, true);
    const CalibrationResult icpt = calibrate(b, {});
    EXPECT_NEAR(icpt.intercept, std::log(0.25 / 0.75), 1e-10);
    EXPECT_EQ(icpt.beta, Vector::Zero(2));
}

TEST(Calibrate, SeparationIsCapped)
{
    Matrix X(6, 1);
    X << -3, -2, -1, 1, 2, 3;
    Vector y(6);
    y << 0, 0, 0, 1, 1, 1;
    const Problem pr = Problem::uniform(X, y, GlmFamily::BernoulliLogit, GroupSpec::singletons(1),
                                        ThresholdRule::soft(), 0.0);
    CalibrateOptions o;
    o.coef_bound = 20.0;
    const CalibrationResult r = calibrate(pr, {0}, Calibration::mle(), o);
    EXPECT_TRUE(r.capped);
    EXPECT_LE(std::abs(r.beta(0)), 20.0);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Calibrate, WarnsWhenWiderThanTall)
{
    const Problem pr = Problem::uniform(oracle::random_matrix(3, 5, 141), oracle::random_vector(3, 142),
                                        GlmFamily::GaussianIdentity, GroupSpec::singletons(5), ThresholdRule::soft(), 0.0);
    const CalibrationResult r = calibrate(pr, {0, 1, 2, 3, 4}, Calibration::ridge(0.5));
    EXPECT_FALSE(r.warnings.empty());
}
