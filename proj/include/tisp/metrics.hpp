#pragma once

#include <vector>

#include <tisp/glm.hpp>
#include <tisp/types.hpp>

namespace tisp {

// 100 (L(beta_hat) / L(beta_true) - 1) on test data, L the log-likelihood.
double scaled_deviance_error(GlmFamily family, const Vector& beta_hat, const Vector& beta_true,
                             const Matrix& X_test, const Vector& y_test,
                             double intercept_hat = 0.0, double intercept_true = 0.0);

struct SelectionStats
{
    double masking = 0.0;  // missed relevant / relevant
    double swamping = 0.0; // false alarms / irrelevant
    bool joint_detection = false;
};

// Supports hold 0-based indices in [0, p).
SelectionStats selection_stats(const Support& estimated, const Support& truth, Index p);

// Mean after removing floor(trim_fraction / 2 * N) values from each tail.
double trimmed_mean(std::vector<double> values, double trim_fraction);

// sum (y - x^T beta - intercept)^2 / N - sigma2.
double spectral_mse_star(const Vector& y_test, const Matrix& x_test, const Vector& beta_hat,
                         double intercept_hat, double sigma2);

/*
 * Tone detection on a frequency grid. A true bin counts as detected when some
 * selected bin lies within `tolerance_bins` of it; a selected bin is a false
 * alarm when no true bin lies within that distance. Masking and swamping are
 * taken over true bins and over the remaining num_bins - |true| bins.
 */
SelectionStats tone_selection_stats(const std::vector<Index>& selected_bins,
                                    const std::vector<Index>& true_bins,
                                    Index num_bins, Index tolerance_bins);

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

} // namespace tisp
