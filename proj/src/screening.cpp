#include <tisp/screening.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <tisp/errors.hpp>
#include <tisp/glm.hpp>

namespace tisp {

OrderStatisticCut proportional_cut(const Vector& magnitudes, Index m)
{
    const Index size = magnitudes.size();
    if (m < 0 || m > size) throw ParameterError("cannot keep " + std::to_string(m) + " of " + std::to_string(size) + " entries");
    std::vector<Index> order(static_cast<std::size_t>(size));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return magnitudes(a) > magnitudes(b);
    });
    OrderStatisticCut out;
    out.kept.assign(order.begin(), order.begin() + m);
    std::sort(out.kept.begin(), out.kept.end());
    const double upper = m > 0 ? magnitudes(order[static_cast<std::size_t>(m - 1)]) : magnitudes.maxCoeff();
    const double lower = m < size ? magnitudes(order[static_cast<std::size_t>(m)]) : 0.0;
    out.cut = 0.5 * (upper + lower);
    return out;
}

ScreenResult screen_proportional(const Problem& problem, double alpha,
                                 const ThresholdRule& rule_shape, const ScreenOptions& options)
{
    problem.validate();
    check_support(problem.family, problem.y);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("screening fraction alpha must lie in (0, 1]");
    if (rule_shape.is<rule::Ridge>()) throw ParameterError("ridge thresholding never zeroes a coefficient; use a thresholding rule for screening");

    const Index K = problem.num_groups();
    const auto m = static_cast<Index>(std::ceil(alpha * static_cast<double>(problem.n()) - 1e-12));
    if (m > K) {
        throw ParameterError("screening keeps ceil(alpha n) = " + std::to_string(m) + " but only " +
                             std::to_string(K) + " candidates exist");
    }
    const double kill_per_lambda = kill_threshold(rule_shape, 1.0);

    ScreenResult out;
    std::vector<ThresholdRule> shape(1, rule_shape);
    if (options.k0) {
        out.k0_used = *options.k0;
    } else {
        const double eta_bound = problem.family == GlmFamily::PoissonLog
            ? std::abs(intercept_only_mle(problem.family, problem.y)) + 1.0 : 0.0;
        out.k0_used = scaling_bound(problem.family, problem.X, shape, eta_bound).k0;
    }
    Problem sp = problem.scaled(out.k0_used);
    sp.rules.assign(static_cast<std::size_t>(K), rule_shape);

    Vector beta = Vector::Zero(problem.p());
    double intercept = problem.fit_intercept ? intercept_only_mle(problem.family, problem.y) : 0.0;

    std::vector<Index> previous;
    int same = 0;
    for (int it = 1; it <= options.max_iter; ++it) {
        out.iterations = it;
        const Vector s = surrogate(sp, beta, intercept);
        Vector norms(K);
        for (Index k = 0; k < K; ++k) {
            double sq = 0.0;
            for (Index j : sp.groups.blocks[static_cast<std::size_t>(k)]) sq += s(j) * s(j);
            norms(k) = std::sqrt(sq);
        }
        const auto cut = proportional_cut(norms, m);
        const double lambda = cut.cut / kill_per_lambda;
        out.lambdas.push_back(lambda);

        Vector next = Vector::Zero(problem.p());
        for (Index k : cut.kept) {
            const auto& block = sp.groups.blocks[static_cast<std::size_t>(k)];
            // An exact tie puts a kept group on the kill point; keep it unshrunk.
            const double norm = norms(k);
            double factor = 0.0;
            if (norm > 0.0) {
                const double shrunk = threshold_scalar(rule_shape, norm, lambda);
                factor = shrunk > 0.0 ? shrunk / norm : 1.0;
            }
            for (Index j : block) next(j) = s(j) * factor;
        }
        const double step = (next - beta).lpNorm<Eigen::Infinity>();
        beta.swap(next);
        if (problem.fit_intercept) {
            intercept = refit_intercept(sp.family, sp.y, sp.X * beta, intercept, 1);
        }

        if (it == 1) {
            for (Index k : cut.kept) {
                for (Index j : sp.groups.blocks[static_cast<std::size_t>(k)]) out.first_kept.push_back(j);
            }
            std::sort(out.first_kept.begin(), out.first_kept.end());
        }
        if (cut.kept == previous) {
            ++same;
        } else {
            same = 0;
            previous = cut.kept;
        }
        out.kept_groups = cut.kept;
        const bool stable = same + 1 >= options.stable_iterations && it >= options.stable_iterations;
        // A settled support with coefficients still moving may yet change.
        if (stable && (step <= options.tol || it == options.max_iter)) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) {
        out.oscillation = true;
        out.warnings.push_back("support did not settle within " + std::to_string(options.max_iter) +
                               " iterations; returning the last support");
    }
    for (Index k : out.kept_groups) {
        for (Index j : sp.groups.blocks[static_cast<std::size_t>(k)]) out.kept.push_back(j);
    }
    std::sort(out.kept.begin(), out.kept.end());
    out.final_beta = beta / out.k0_used;
    out.intercept = intercept;
    return out;
}

} // namespace tisp
