#pragma once

#include <optional>
#include <string>
#include <vector>

#include <tisp/glm.hpp>
#include <tisp/threshold.hpp>
#include <tisp/types.hpp>

namespace tisp {

// Partition of the columns into K nonempty, disjoint blocks.
struct GroupSpec
{
    std::vector<std::vector<Index>> blocks;

    static GroupSpec singletons(Index p);

    // Validates that blocks partition {0, ..., p-1}.
    static GroupSpec from_blocks(std::vector<std::vector<Index>> blocks, Index p);

    Index size() const { return static_cast<Index>(blocks.size()); }
    void validate(Index p) const;
};

/*
 * Penalized GLM fit input:
 *
 *     F(beta) = -L(beta, intercept) + sum_k P_k(||beta_k||_2; lambda_k w_k)
 *
 * with one threshold rule and one lambda per group. Optional weights
 * multiply the per-group lambdas. The intercept, when fitted, is not
 * penalized.
 */
struct Problem
{
    Matrix X;
    Vector y;
    GlmFamily family = GlmFamily::GaussianIdentity;
    GroupSpec groups;
    std::vector<ThresholdRule> rules;
    Vector lambdas;
    bool fit_intercept = false;
    std::optional<Vector> weights;
    // Recorded for the lambda-range heuristics in tuning.
    bool columns_normalized = false;

    // Same rule and lambda on every group.
    static Problem uniform(Matrix X, Vector y, GlmFamily family, GroupSpec groups,
                           const ThresholdRule& rule, double lambda,
                           bool fit_intercept = false);

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }
    Index num_groups() const { return groups.size(); }

    // Effective threshold of group k (lambda_k times its weight).
    double lambda(Index k) const;

    void validate() const;

    // Copy with X / k0.
    Problem scaled(double k0) const;

    // Copy with every lambda set to `lambda`.
    Problem with_lambda(double lambda) const;
};

struct SolverOptions
{
    // Design scaling; computed from scaling_bound when empty.
    std::optional<double> k0;
    // Relaxation factor, 1 (plain) or 2.
    int omega = 2;
    // Infinity-norm step tolerance on the scaled coefficients.
    double tol = 1e-8;
    int max_iter = 10000;
    // Objective increase tolerated before a step counts as a descent violation.
    double descent_slack = 1e-9;
    // Consecutive violations that declare divergence.
    int divergence_patience = 3;
    // A relaxed run whose objective and step size both stall over this many
    // iterations is treated as oscillating and restarted with omega = 1.
    int stall_window = 50;
    // One damped Newton step on the intercept every this many iterations.
    int intercept_every = 5;
    // Starting point on the scaled problem; zero when empty.
    std::optional<Vector> beta_start;
    double poisson_eta_cap = kPoissonEtaCap;
};

struct FitResult
{
    Vector beta;          // original scale
    Vector beta_scaled;   // coefficients on X / k0
    double intercept = 0.0;
    std::vector<double> objective_trace; // F on the scaled problem, from the start point
    double fixed_point_residual = 0.0;
    int iterations = 0;       // iterations of the returned run
    int total_iterations = 0; // including an abandoned relaxed run
    bool converged = false;
    double k0_used = 1.0;
    bool k0_heuristic = false;
    int descent_violations = 0;
    int omega_used = 1;
    bool relaxation_fallback = false;
    std::vector<std::string> warnings;

    Support support() const;
};

// Group TISP from the zero start (or options.beta_start). Lambdas refer to
// the scaled problem X / k0.
FitResult tisp_fit(const Problem& problem, const SolverOptions& options = {});

// beta + X^T (y - mu(X beta + intercept)) on the given (already scaled) problem.
Vector surrogate(const Problem& scaled, const Vector& beta, double intercept = 0.0);

// Group-wise multivariate thresholding of a surrogate vector.
Vector threshold_groups(const Problem& scaled, const Vector& xi);

// One synchronous update, omega = 1.
Vector tisp_step(const Vector& beta, const Problem& scaled, double intercept = 0.0);

// One relaxed update: xi <- (1 - omega) xi + omega s(beta), returns Theta(xi).
Vector tisp_step_relaxed(const Vector& beta, const Problem& scaled, double intercept,
                         double omega, Vector& xi);

double objective(const Problem& problem, const Vector& beta, double intercept = 0.0);

// || beta - tisp_step(beta) ||_inf
double fixed_point_residual(const Problem& scaled, const Vector& beta, double intercept = 0.0);

// MLE of the intercept with beta = 0, clipped away from the boundary.
double intercept_only_mle(GlmFamily family, const Vector& y);

// Damped Newton on the intercept with the linear offset held fixed.
double refit_intercept(GlmFamily family, const Vector& y, const Vector& offset,
                       double start, int max_steps = 50);

enum class CalibrationMode
{
    RestrictedMle,
    RestrictedRidge,
};

struct Calibration
{
    CalibrationMode mode = CalibrationMode::RestrictedMle;
    double eta = 0.0;

    static Calibration mle() { return {}; }
    static Calibration ridge(double eta) { return {CalibrationMode::RestrictedRidge, eta}; }
};

struct CalibrateOptions
{
    int max_iter = 100;
    double tol = 1e-10;
    // Coefficients are clipped to this magnitude when Newton runs away
    // (e.g. separable logistic folds).
    double coef_bound = 100.0;
};

struct CalibrationResult
{
    Vector beta;
    double intercept = 0.0;
    int iterations = 0;
    bool converged = false;
    bool capped = false;
    std::vector<std::string> warnings;
};

/*
 * Damped Newton-Raphson on the smooth problem restricted to `pattern`
 * (-L, or -L + eta/2 ||beta||^2), with the intercept when the problem fits
 * one. Coefficients outside the pattern are zero.
 */
CalibrationResult calibrate(const Problem& problem, const Support& pattern,
                            const Calibration& mode = Calibration::mle(),
                            const CalibrateOptions& options = {});

} // namespace tisp
