#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include <tisp/glm.hpp>
#include <tisp/random.hpp>
#include <tisp/solver.hpp>
#include <tisp/types.hpp>

namespace tisp {

// Rows x_i ~ MVN(0, Sigma) with Sigma_jk = rho^|j-k|.
struct Ar1Design
{
    Index n = 100;
    Index p = 20;
    double rho = 0.5;
    double b = 1.0;
    std::uint64_t seed = 1;
};

struct GlmDataset
{
    Matrix X;
    Vector y;
    Vector beta_true;
};

// (b, 0, b, b, 0, ..., 0) truncated to p entries.
Vector ar1_true_beta(Index p, double b);

// Lower-triangular factor of the recursion x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j,
// so that x = L z and L L^T = Sigma.
Matrix ar1_loading_matrix(Index p, double rho);

// One draw of y from the family at linear predictor eta.
double sample_response(GlmFamily family, double eta, CounterRng& rng);

// n_obs rows drawn on stream `stream` of the design seed (use distinct
// streams for training, validation and test sets).
GlmDataset gen_ar1_glm(const Ar1Design& design, GlmFamily family, Index n_obs,
                       std::uint64_t stream = 0);

struct TwinSineSpec
{
    Index n = 100;
    Index K = 250;
    double f_max = 0.5;
    double a1 = 2.0;
    double a2 = 3.0;
    double phi1 = std::numbers::pi / 3.0;
    double phi2 = std::numbers::pi / 5.0;
    double f1 = 0.25;
    double f2 = 0.252;
    double sigma2 = 1.0;
    std::uint64_t seed = 1;
};

struct TwinSineSample
{
    Vector y;
    Vector clean;
};

// t_i = i for i = 1..n.
Vector uniform_time_points(Index n);

// Two tones plus N(0, sigma2) noise drawn on stream `stream`.
TwinSineSample gen_twinsine(const TwinSineSpec& spec, const Vector& time_points,
                            std::uint64_t stream = 0);

// 10 log10((a1^2 + a2^2) / (2 sigma2)).
double twinsine_snr_db(const TwinSineSpec& spec);

struct Dictionary
{
    Matrix X;
    GroupSpec groups;
    Vector frequency;           // per column
    std::vector<Index> bin;     // frequency index k in 1..K per column
    std::vector<bool> is_sine;  // per column
    std::vector<Index> group_bin; // per group
    Index K = 0;
    double f_max = 0.0;
    bool last_sine_dropped = false;
};

// Cosine atoms for k = 1..K then sine atoms for k = 1..K (the sine at f_K is
// dropped when it vanishes on every time point), f_k = f_max k / K. Groups pair
// the cosine and sine at each frequency.
Dictionary build_dictionary(const Vector& time_points, Index K, double f_max);

// Evaluates the dictionary's atoms at other time points (same column layout).
Matrix dictionary_atoms(const Dictionary& dict, const Vector& time_points);

} // namespace tisp
