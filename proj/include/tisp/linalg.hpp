#pragma once

#include <cstdint>

#include <tisp/types.hpp>

namespace tisp {

struct PowerIterationOptions
{
    int max_iter = 1000;
    double rel_tol = 1e-10;
    std::uint64_t fallback_seed = 0x5eed;
    // Refine with a dense eigen solve when min(n, p) is at most this.
    Index dense_limit = 1000;
};

struct SpectralNormResult
{
    double norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Largest singular value of X by power iteration on X^T X, started from the
// all-ones vector, refined by a dense symmetric eigen solve for small
// matrices. Falls back to a seeded random start when the Rayleigh
// quotient of the ones vector vanishes.
SpectralNormResult spectral_norm(const Matrix& X,
                                 const PowerIterationOptions& opts = {});

// Scales every nonzero column to unit Euclidean norm in place and returns the
// original norms (zero columns keep scale 1 and stay zero).
Vector normalize_columns(Matrix& X);

// Columns with all entries exactly zero.
std::vector<bool> zero_columns(const Matrix& X);

} // namespace tisp
