#pragma once

#include <span>
#include <string>

#include <tisp/threshold.hpp>
#include <tisp/types.hpp>

namespace tisp {

// Natural exponential families with canonical links. Gaussian uses unit
// dispersion so that b(t) = t^2/2.
enum class GlmFamily
{
    GaussianIdentity,
    BernoulliLogit,
    PoissonLog,
};

std::string to_string(GlmFamily family);
GlmFamily parse_family(const std::string& name);

// Scalar pieces of f(y; t) = exp(y t - b(t) + c(y)).
double cumulant(GlmFamily family, double t);        // b
double mean_function(GlmFamily family, double t);   // b'
double variance_function(GlmFamily family, double t); // b''
double link(GlmFamily family, double mu);           // g = (b')^{-1}
double log_base_measure(GlmFamily family, double y); // c

// Linear predictors above this are clipped before exp() in the Poisson mean.
inline constexpr double kPoissonEtaCap = 50.0;

struct MeanVector
{
    Vector mu;
    bool capped = false; // some Poisson predictor exceeded the cap
};

MeanVector mean_vector(GlmFamily family, const Vector& eta,
                       double poisson_eta_cap = kPoissonEtaCap);

// Throws DataError naming the first index outside the family support.
void check_support(GlmFamily family, const Vector& y);

// sum_i y_i eta_i - b(eta_i) + c(y_i)
double log_likelihood(GlmFamily family, const Vector& y, const Vector& eta);

// 2 (L_saturated - L)
double deviance(GlmFamily family, const Vector& y, const Vector& eta);

// X^T W X with W = diag(b''(X beta + intercept)).
struct FisherInfo
{
    Matrix matrix;
};

FisherInfo fisher_information(GlmFamily family, const Matrix& X,
                              const Vector& beta, double intercept = 0.0);

/*
 * Least design scaling k0 certifying the descent condition for the rules
 * in use: with X <- X / k0 the Fisher information norm is at most
 * sup b'' ||X||^2 / k0^2, which must not exceed max(1, 2 - L) where L is the
 * largest curvature constant among the rules. Hence
 *
 *     k0 = ||X||_2 sqrt(sup b'' / max(1, 2 - L)).
 *
 * Gaussian and Bernoulli have global bounds on b'' (1 and 1/4). Poisson has
 * none; the caller passes a bound on the reachable |eta| and the result is
 * multiplied by a safety factor and flagged heuristic.
 */
struct ScalingBound
{
    double k0 = 1.0;
    double spectral_norm = 0.0;
    double l_theta = 0.0;
    bool heuristic = false;
};

inline constexpr double kPoissonSafetyFactor = 2.0;

ScalingBound scaling_bound(GlmFamily family, const Matrix& X,
                           std::span<const ThresholdRule> rules,
                           double poisson_eta_bound = 0.0);

} // namespace tisp
