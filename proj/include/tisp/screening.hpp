#pragma once

#include <optional>
#include <string>
#include <vector>

#include <tisp/solver.hpp>
#include <tisp/threshold.hpp>
#include <tisp/types.hpp>

namespace tisp {

struct ScreenOptions
{
    // Design scaling; scaling_bound of the shape rule when empty.
    std::optional<double> k0;
    int max_iter = 2000;
    // Stop once the support has been unchanged this many iterations and the
    // scaled coefficients move less than tol (infinity norm).
    int stable_iterations = 3;
    double tol = 1e-8;
};

struct ScreenResult
{
    Support kept;        // columns of the kept groups, sorted
    Support first_kept;  // same after the first iteration
    std::vector<Index> kept_groups;
    int iterations = 0;
    Vector final_beta;   // original scale
    double intercept = 0.0;
    double k0_used = 1.0;
    bool converged = false;   // support was stable at the end
    bool oscillation = false; // max_iter reached without a stable support
    std::vector<double> lambdas; // threshold used at each iteration (scaled problem)
    std::vector<std::string> warnings;
};

struct OrderStatisticCut
{
    std::vector<Index> kept; // positions of the m largest magnitudes, sorted
    double cut = 0.0;        // midpoint between the m-th and (m+1)-th largest
};

// Lower position wins ties at the m-th magnitude.
OrderStatisticCut proportional_cut(const Vector& magnitudes, Index m);

/*
 * Runs TISP where each iteration picks the threshold that keeps exactly
 * m = ceil(alpha n) groups (columns when the groups are singletons). The
 * rule's lambda is overridden per iteration so that its kill point lands on
 * the cut; the rule's other parameters give the shrink shape.
 */
ScreenResult screen_proportional(const Problem& problem, double alpha,
                                 const ThresholdRule& rule_shape,
                                 const ScreenOptions& options = {});

} // namespace tisp
