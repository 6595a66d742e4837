#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <tisp/glm.hpp>
#include <tisp/solver.hpp>
#include <tisp/types.hpp>

namespace tisp {

// Decreasing lambdas on the scaled problem X / k0.
struct LambdaGrid
{
    std::vector<double> values;
    double lambda_max = 0.0;
    double k0 = 1.0;
    std::vector<std::string> warnings;
};

// Largest group norm of X^T (y - mu0) / k0 over the rule's kill factor, with
// mu0 the intercept-only fit (or b'(0) without an intercept).
double lambda_max(const Problem& problem, double k0);

// The k0 that tisp_fit would compute for this design (Poisson: from the
// intercept-only predictor, flagged heuristic by the caller).
double default_k0(const Problem& problem);

LambdaGrid lambda_grid(const Problem& problem, int L, double min_ratio,
                       std::optional<double> k0 = std::nullopt);

struct PathPoint
{
    double lambda = 0.0;
    std::optional<FitResult> fit;
    bool failed = false;
    std::string error;
    Support pattern;
};

struct SolutionPath
{
    LambdaGrid grid;
    std::vector<PathPoint> points;
    // Index into unique_patterns per point; npos for failed points.
    std::vector<std::size_t> pattern_id;
    std::vector<Support> unique_patterns;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Independent zero-start fits at each grid value. Solver errors are recorded
// per point instead of aborting the path.
SolutionPath solution_path(const Problem& problem, const LambdaGrid& grid,
                           const SolverOptions& options = {}, int threads = 1);

struct DfValue
{
    double df = 0.0;
};

// Tr{(I + eta)^-1 I} from the eigenvalues of I; at eta = 0 this is the rank.
double df_from_eigenvalues(const Vector& eigenvalues, double eta);

// I = X_r^T W X_r at beta_r (and intercept).
DfValue df_ridge(GlmFamily family, const Matrix& X_restricted, const Vector& beta_restricted,
                 double eta, double intercept = 0.0);

// Tr{(I + diag(eta))^-1 I} for a per-coefficient ridge.
DfValue df_ridge_diag(const Matrix& info, const Vector& eta);

struct DfMatch
{
    double eta = 0.0;
    double df = 0.0;
    bool clamped = false; // target above the unpenalized df
    int iterations = 0;
};

DfMatch match_df(GlmFamily family, const Matrix& X_restricted, const Vector& beta_restricted,
                 double target_df, double intercept = 0.0, double tol = 1e-3);

// Same, from a precomputed Fisher information.
DfMatch match_df_info(const Matrix& info, double target_df, double tol = 1e-3);

// Fold label in [0, folds) per observation. Bernoulli responses are
// stratified by class.
std::vector<int> assign_folds(const Vector& y, GlmFamily family, int folds, std::uint64_t seed);

enum class ScvMode { Plain, Aic, Bic };
enum class RuleClass { L1OrL0, HardRidge };

std::string to_string(ScvMode mode);
ScvMode parse_scv_mode(const std::string& name);

// HardRidge when every group uses the hard-ridge rule.
RuleClass infer_rule_class(const Problem& problem);

// df of a converged fit: |support| for L1OrL0; for HardRidge the ridge trace
// on the scaled design at beta_scaled with each column's rule eta.
double fit_df(const Problem& problem, const FitResult& fit, RuleClass rule_class);

struct PatternRefit
{
    RuleClass rule_class = RuleClass::L1OrL0;
    double df_target = 0.0;
    Vector beta_full;       // full-data estimate (original scale), HardRidge only
    double intercept_full = 0.0;
    CalibrateOptions calibrate;
};

struct PatternScore
{
    std::vector<double> fold_nll;
    std::vector<double> eta_per_fold;
    bool failed = false;
    std::vector<std::string> notes;

    double total() const;
};

// Held-out negative log-likelihood per fold of the pattern refit on the
// remaining folds (restricted MLE, or df-matched restricted ridge).
PatternScore score_pattern(const Problem& problem, const Support& pattern,
                           const std::vector<int>& fold_of, int folds, const PatternRefit& refit);

struct ScvOptions
{
    int folds = 5;
    std::uint64_t seed = 1;
    ScvMode mode = ScvMode::Bic;
    std::optional<RuleClass> rule_class; // inferred from the rules when empty
    SolverOptions solver;
    CalibrateOptions calibrate;
    int threads = 1;
};

struct ScvRow
{
    double lambda = 0.0;
    Support pattern;
    double df = 0.0;
    double scv = 0.0;
    double scv_aic = 0.0;
    double scv_bic = 0.0;
    std::vector<double> fold_nll;
    std::vector<double> eta_per_fold;
    bool failed = false;
    // Row whose refits this row reuses (its own index when scored directly).
    std::size_t shared_with = 0;
    std::vector<std::string> notes;

    double criterion(ScvMode mode) const;
};

struct ScvReport
{
    std::vector<ScvRow> rows;
    ScvMode mode = ScvMode::Bic;
    RuleClass rule_class = RuleClass::L1OrL0;
    Index n = 0;
    int folds = 0;
    std::vector<int> fold_of;
    std::optional<std::size_t> selected_plain;
    std::optional<std::size_t> selected_aic;
    std::optional<std::size_t> selected_bic;
    SolutionPath path;

    std::optional<std::size_t> selected(ScvMode m) const;
    std::optional<std::size_t> selected() const { return selected(mode); }
};

// Plain: scv; Aic: 2 scv + 2 df; Bic: 2 scv + log(n) df.
double scv_criterion(double scv_value, double df, Index n, ScvMode mode);

// Index minimizing the criterion; ties go to smaller df, then larger lambda.
std::optional<std::size_t> select_row(const std::vector<ScvRow>& rows, ScvMode mode);

ScvReport scv(const Problem& problem, const LambdaGrid& grid, const ScvOptions& options = {});

// Steps 2-3 on an existing path.
ScvReport scv_from_path(const Problem& problem, SolutionPath path, const ScvOptions& options = {});

} // namespace tisp
