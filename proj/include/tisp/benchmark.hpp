#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <tisp/glm.hpp>
#include <tisp/metrics.hpp>
#include <tisp/simulation.hpp>
#include <tisp/solver.hpp>
#include <tisp/threshold.hpp>
#include <tisp/types.hpp>

namespace tisp {

/*
 * Validation-tuned fits.
 *
 * A Tuned holds the fit minimizing a validation loss together with the
 * parameters that produced it. Losses are mean squared error (Gaussian) or
 * mean negative log-likelihood (other families) on the validation rows.
 */
struct Tuned
{
    FitResult fit;
    double lambda = 0.0;
    double eta = 0.0;
    double loss = 0.0;
    int fits = 0;
    int failed_fits = 0;
};

double validation_loss(GlmFamily family, const Matrix& X_val, const Vector& y_val,
                       const Vector& beta, double intercept);

// One lambda path for a fixed rule; returns the validation minimizer.
Tuned tune_lambda_by_validation(const Problem& problem, const ThresholdRule& rule,
                                const Matrix& X_val, const Vector& y_val,
                                int grid_size, double min_ratio, const SolverOptions& options,
                                int threads = 1);

// Ridge parameter (scaled units) minimizing validation loss over a log grid.
double tune_ridge_by_validation(const Problem& problem, double k0, const Matrix& X_val,
                                const Vector& y_val, const std::vector<double>& eta_grid);

/*
 * Hard-ridge search over four paths: lambda paths at 0.5, 0.05 and 0.005
 * times the ridge optimum eta*, then an eta path at the best lambda.
 */
Tuned tune_hard_ridge_by_validation(const Problem& problem, const Matrix& X_val, const Vector& y_val,
                                    int grid_size, double min_ratio, const SolverOptions& options,
                                    int threads = 1);

enum class SpectralMethod { BasisPursuit, GroupLasso, HardRidge, GroupHardRidge };
enum class SpectralTuning { LargeValidation, ScvBic };

std::string to_string(SpectralMethod m);
std::string to_string(SpectralTuning t);
SpectralMethod parse_spectral_method(const std::string& name);
SpectralTuning parse_spectral_tuning(const std::string& name);

struct SpectralConfig
{
    TwinSineSpec spec;
    int runs = 20;
    SpectralTuning tuning = SpectralTuning::LargeValidation;
    std::vector<SpectralMethod> methods = {SpectralMethod::BasisPursuit, SpectralMethod::HardRidge,
                                           SpectralMethod::GroupLasso, SpectralMethod::GroupHardRidge};
    Index validation_size = 2000;
    Index test_size = 2000;
    int grid_size = 40;
    double min_ratio = 1e-3;
    int folds = 5;
    int threads = 1;
    SolverOptions solver;
};

struct SpectralRun
{
    int run = 0;
    double mse_star = 0.0;
    double lambda = 0.0;
    double eta = 0.0;
    std::vector<Index> selected_bins;
    SelectionStats exact;      // groups, exact bin
    SelectionStats within_one; // groups, within one bin
    SelectionStats columns;    // individual atoms
    bool converged = true;
};

// Percentages over runs (JD, M, S) and the median MSE*.
struct SpectralSummary
{
    SpectralMethod method = SpectralMethod::GroupHardRidge;
    SpectralTuning tuning = SpectralTuning::LargeValidation;
    double sigma2 = 1.0;
    double err = 0.0;
    double jd = 0.0, masking = 0.0, swamping = 0.0;
    double jd_within_one = 0.0, masking_within_one = 0.0, swamping_within_one = 0.0;
    double masking_columns = 0.0, swamping_columns = 0.0;
    std::vector<SpectralRun> runs;
};

// Bins of the two tones on the dictionary grid.
std::vector<Index> twinsine_true_bins(const TwinSineSpec& spec);

std::vector<SpectralSummary> run_spectral_benchmark(const SpectralConfig& config);

enum class Ar1Method { HardRidge, Scad };
std::string to_string(Ar1Method m);

struct Ar1StudyConfig
{
    Ar1Design design{100, 100, 0.5, 1.0, 1};
    GlmFamily family = GlmFamily::BernoulliLogit;
    int reps = 10;
    Index validation_size = 10000;
    Index test_size = 10000;
    int grid_size = 30;
    double min_ratio = 0.02;
    std::vector<Ar1Method> methods = {Ar1Method::HardRidge, Ar1Method::Scad};
    int threads = 1;
    SolverOptions solver;
};

struct Ar1Rep
{
    int rep = 0;
    double sde = 0.0;
    SelectionStats stats;
    double lambda = 0.0;
    double eta = 0.0;
    Support selected;
};

// Percentages for M, S, JD; SDE as the 40% trimmed mean.
struct Ar1Summary
{
    Ar1Method method = Ar1Method::HardRidge;
    double sde = 0.0;
    double masking = 0.0, swamping = 0.0, jd = 0.0;
    std::vector<Ar1Rep> reps;
};

std::vector<Ar1Summary> run_ar1_study(const Ar1StudyConfig& config);

} // namespace tisp
