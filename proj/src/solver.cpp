#include <tisp/solver.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <tisp/errors.hpp>
#include <tisp/linalg.hpp>

namespace tisp {
namespace {

// -L without the support check; `base` is sum_i c(y_i).
double neg_loglik(GlmFamily family, const Vector& y, const Vector& eta, double base)
{
    double sum = 0.0;
    for (Index i = 0; i < y.size(); ++i) sum += cumulant(family, eta(i)) - y(i) * eta(i);
    return sum - base;
}

double base_measure_sum(GlmFamily family, const Vector& y)
{
    double sum = 0.0;
    for (Index i = 0; i < y.size(); ++i) sum += log_base_measure(family, y(i));
    return sum;
}

double penalty_sum(const Problem& problem, const Vector& beta)
{
    double sum = 0.0;
    for (Index k = 0; k < problem.num_groups(); ++k) {
        const auto& block = problem.groups.blocks[static_cast<std::size_t>(k)];
        double sq = 0.0;
        for (Index j : block) sq += beta(j) * beta(j);
        sum += penalty_value(problem.rules[static_cast<std::size_t>(k)], std::sqrt(sq), problem.lambda(k));
    }
    return sum;
}

// X beta + alpha, skipping zero coefficients when beta is sparse.
Vector predictor(const Matrix& X, const Vector& beta, double alpha)
{
    const Index nnz = (beta.array() != 0.0).count();
    if (4 * nnz >= beta.size()) return (X * beta).array() + alpha;
    Vector eta = Vector::Constant(X.rows(), alpha);
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta(j) != 0.0) eta.noalias() += beta(j) * X.col(j);
    }
    return eta;
}

// Damped Newton steps on the intercept; shifts eta in place.
double newton_intercept(GlmFamily family, const Vector& y, Vector& eta, double alpha,
                        int steps, double base)
{
    for (int s = 0; s < steps; ++s) {
        double g = 0.0;
        double h = 0.0;
        for (Index i = 0; i < eta.size(); ++i) {
            g += y(i) - mean_function(family, eta(i));
            h += variance_function(family, eta(i));
        }
        if (!(h > 0.0) || std::abs(g) <= 1e-13 * static_cast<double>(eta.size())) break;
        const double delta = g / h;
        const double f0 = neg_loglik(family, y, eta, base);
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 50; ++half, t *= 0.5) {
            const Vector trial = eta.array() + t * delta;
            if (neg_loglik(family, y, trial, base) <= f0) {
                eta = trial;
                alpha += t * delta;
                accepted = true;
                break;
            }
        }
        if (!accepted || std::abs(t * delta) < 1e-14 * (1.0 + std::abs(alpha))) break;
    }
    return alpha;
}

enum class RunStatus { Converged, MaxIterations, Diverged };

struct RunOutcome
{
    RunStatus status = RunStatus::MaxIterations;
    Vector beta;
    double intercept = 0.0;
    std::vector<double> trace;
    int iterations = 0;
    int violations = 0;
    double residual = std::numeric_limits<double>::infinity();
    bool mean_capped = false;
};

class Iteration
{
public:
    Iteration(const Problem& scaled, const SolverOptions& opts, std::vector<bool> zero_cols)
        : sp_(scaled), opts_(opts), zero_cols_(std::move(zero_cols)),
          base_(base_measure_sum(scaled.family, scaled.y))
    {}

    RunOutcome run(const Vector& beta0, double intercept0, int omega, int max_iter) const
    {
        RunOutcome out;
        Vector beta = beta0;
        double alpha = intercept0;
        Vector eta = predictor(sp_.X, beta, alpha);
        double f = value(eta, beta);
        out.trace.push_back(f);

        Vector xi;
        if (omega != 1) xi = surrogate_at(beta, eta, out.mean_capped);

        int consecutive = 0;
        std::vector<double> steps;
        for (int it = 1; it <= max_iter; ++it) {
            out.iterations = it;
            if (sp_.fit_intercept && (it - 1) % std::max(opts_.intercept_every, 1) == 0) {
                alpha = intercept_newton(eta, alpha, 1);
            }
            const Vector s = surrogate_at(beta, eta, out.mean_capped);
            if (omega == 1) xi = s;
            else xi = (1.0 - omega) * xi + omega * s;

            Vector next = threshold_groups(sp_, xi);
            mask(next);
            const double step = (next - beta).lpNorm<Eigen::Infinity>();
            Vector eta_next = predictor(sp_.X, next, alpha);
            const double f_next = value(eta_next, next);

            if (!std::isfinite(f_next) || !next.allFinite()) {
                out.status = RunStatus::Diverged;
                break;
            }
            if (f_next > f + opts_.descent_slack) {
                ++out.violations;
                ++consecutive;
            } else {
                consecutive = 0;
            }
            beta.swap(next);
            eta.swap(eta_next);
            f = f_next;
            out.trace.push_back(f);
            steps.push_back(step);

            if (consecutive >= opts_.divergence_patience) {
                out.status = RunStatus::Diverged;
                break;
            }
            if (omega != 1 && stalled(out.trace, steps)) {
                out.status = RunStatus::Diverged;
                break;
            }
            if (step < opts_.tol) {
                if (sp_.fit_intercept) {
                    alpha = intercept_newton(eta, alpha, 50);
                    f = value(eta, beta);
                    out.trace.back() = f;
                }
                out.residual = fixed_point_residual(sp_, beta, alpha);
                if (out.residual <= opts_.tol) {
                    out.status = RunStatus::Converged;
                    break;
                }
            }
        }
        if (out.status != RunStatus::Converged && out.status != RunStatus::Diverged) {
            out.residual = fixed_point_residual(sp_, beta, alpha);
        }
        out.beta = std::move(beta);
        out.intercept = alpha;
        return out;
    }

private:
    double value(const Vector& eta, const Vector& beta) const
    {
        return neg_loglik(sp_.family, sp_.y, eta, base_) + penalty_sum(sp_, beta);
    }

    Vector surrogate_at(const Vector& beta, const Vector& eta, bool& capped) const
    {
        auto mu = mean_vector(sp_.family, eta, opts_.poisson_eta_cap);
        capped = capped || mu.capped;
        return beta + sp_.X.transpose() * (sp_.y - mu.mu);
    }

    void mask(Vector& beta) const
    {
        for (std::size_t j = 0; j < zero_cols_.size(); ++j) {
            if (zero_cols_[j]) beta(static_cast<Index>(j)) = 0.0;
        }
    }

    double intercept_newton(Vector& eta, double alpha, int steps) const
    {
        return newton_intercept(sp_.family, sp_.y, eta, alpha, steps, base_);
    }

    bool stalled(const std::vector<double>& trace, const std::vector<double>& steps) const
    {
        const auto w = static_cast<std::size_t>(opts_.stall_window);
        if (w == 0 || steps.size() <= w) return false;
        const std::size_t now = steps.size() - 1;
        const bool no_descent = trace.back() > trace[trace.size() - 1 - w] - opts_.descent_slack;
        const bool steps_flat = steps[now] >= 0.5 * steps[now - w];
        return no_descent && steps_flat && steps[now] > opts_.tol;
    }

    const Problem& sp_;
    const SolverOptions& opts_;
    std::vector<bool> zero_cols_;
    double base_;
};

} // namespace

GroupSpec GroupSpec::singletons(Index p)
{
    GroupSpec g;
    g.blocks.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) g.blocks.push_back({j});
    return g;
}

GroupSpec GroupSpec::from_blocks(std::vector<std::vector<Index>> blocks, Index p)
{
    GroupSpec g{std::move(blocks)};
    g.validate(p);
    return g;
}

void GroupSpec::validate(Index p) const
{
    std::vector<int> seen(static_cast<std::size_t>(p), 0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (blocks[k].empty()) throw ParameterError("group " + std::to_string(k + 1) + " is empty");
        for (Index j : blocks[k]) {
            if (j < 0 || j >= p) {
                throw ParameterError("group " + std::to_string(k + 1) + " refers to column " +
                                     std::to_string(j + 1) + " outside 1.." + std::to_string(p));
            }
            if (seen[static_cast<std::size_t>(j)]++) {
                throw ParameterError("column " + std::to_string(j + 1) + " appears in more than one group");
            }
        }
    }
    for (Index j = 0; j < p; ++j) {
        if (!seen[static_cast<std::size_t>(j)]) {
            throw ParameterError("column " + std::to_string(j + 1) + " is not assigned to any group");
        }
    }
}

Problem Problem::uniform(Matrix X, Vector y, GlmFamily family, GroupSpec groups,
                         const ThresholdRule& rule, double lambda, bool fit_intercept)
{
    Problem pr;
    const Index k = groups.size();
    pr.X = std::move(X);
    pr.y = std::move(y);
    pr.family = family;
    pr.groups = std::move(groups);
    pr.rules.assign(static_cast<std::size_t>(k), rule);
    pr.lambdas = Vector::Constant(k, lambda);
    pr.fit_intercept = fit_intercept;
    return pr;
}

double Problem::lambda(Index k) const
{
    return weights ? lambdas(k) * (*weights)(k) : lambdas(k);
}

void Problem::validate() const
{
    if (X.rows() != y.size()) {
        throw ParameterError("design has " + std::to_string(X.rows()) + " rows but response has " +
                             std::to_string(y.size()) + " entries");
    }
    groups.validate(X.cols());
    const auto k = static_cast<std::size_t>(groups.size());
    if (rules.size() != k) throw ParameterError("need one threshold rule per group");
    if (static_cast<std::size_t>(lambdas.size()) != k) throw ParameterError("need one lambda per group");
    if (!(lambdas.array() >= 0.0).all() || !lambdas.allFinite()) {
        throw ParameterError("lambdas must be finite and nonnegative");
    }
    if (weights) {
        if (static_cast<std::size_t>(weights->size()) != k) throw ParameterError("need one weight per group");
        if (!(weights->array() >= 0.0).all() || !weights->allFinite()) {
            throw ParameterError("weights must be finite and nonnegative");
        }
    }
    if (!X.allFinite()) throw DataError("design matrix contains non-finite values");
}

Problem Problem::scaled(double k0) const
{
    if (!(k0 > 0.0) || !std::isfinite(k0)) throw ParameterError("scaling constant k0 must be positive");
    Problem out = *this;
    out.X /= k0;
    return out;
}

Problem Problem::with_lambda(double lambda) const
{
    Problem out = *this;
    out.lambdas.setConstant(lambda);
    return out;
}

Support FitResult::support() const
{
    Support s;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta(j) != 0.0) s.push_back(j);
    }
    return s;
}

Vector surrogate(const Problem& scaled, const Vector& beta, double intercept)
{
    const Vector eta = predictor(scaled.X, beta, intercept);
    return beta + scaled.X.transpose() * (scaled.y - mean_vector(scaled.family, eta).mu);
}

Vector threshold_groups(const Problem& scaled, const Vector& xi)
{
    Vector out(xi.size());
    for (Index k = 0; k < scaled.num_groups(); ++k) {
        const auto& block = scaled.groups.blocks[static_cast<std::size_t>(k)];
        const auto& rule = scaled.rules[static_cast<std::size_t>(k)];
        const double lambda = scaled.lambda(k);
        if (block.size() == 1) {
            out(block[0]) = threshold_scalar(rule, xi(block[0]), lambda);
            continue;
        }
        double sq = 0.0;
        for (Index j : block) sq += xi(j) * xi(j);
        const double norm = std::sqrt(sq);
        const double factor = norm > 0.0 ? threshold_scalar(rule, norm, lambda) / norm : 0.0;
        for (Index j : block) out(j) = xi(j) * factor;
    }
    return out;
}

Vector tisp_step(const Vector& beta, const Problem& scaled, double intercept)
{
    return threshold_groups(scaled, surrogate(scaled, beta, intercept));
}

Vector tisp_step_relaxed(const Vector& beta, const Problem& scaled, double intercept,
                         double omega, Vector& xi)
{
    const Vector s = surrogate(scaled, beta, intercept);
    if (xi.size() != s.size()) xi = s;
    else xi = (1.0 - omega) * xi + omega * s;
    return threshold_groups(scaled, xi);
}

double objective(const Problem& problem, const Vector& beta, double intercept)
{
    const Vector eta = predictor(problem.X, beta, intercept);
    return -log_likelihood(problem.family, problem.y, eta) + penalty_sum(problem, beta);
}

double fixed_point_residual(const Problem& scaled, const Vector& beta, double intercept)
{
    return (beta - tisp_step(beta, scaled, intercept)).lpNorm<Eigen::Infinity>();
}

double intercept_only_mle(GlmFamily family, const Vector& y)
{
    if (y.size() == 0) return 0.0;
    const double mean = y.mean();
    switch (family) {
    case GlmFamily::GaussianIdentity: return mean;
    case GlmFamily::BernoulliLogit: return link(family, std::clamp(mean, 1e-8, 1.0 - 1e-8));
    case GlmFamily::PoissonLog: return link(family, std::max(mean, 1e-8));
    }
    return 0.0;
}

double refit_intercept(GlmFamily family, const Vector& y, const Vector& offset,
                       double start, int max_steps)
{
    Vector eta = offset.array() + start;
    return newton_intercept(family, y, eta, start, max_steps, base_measure_sum(family, y));
}

FitResult tisp_fit(const Problem& problem, const SolverOptions& options)
{
    problem.validate();
    check_support(problem.family, problem.y);
    if (options.omega != 1 && options.omega != 2) throw ParameterError("omega must be 1 or 2");

    FitResult result;
    auto zero_cols = zero_columns(problem.X);
    const auto n_zero = std::count(zero_cols.begin(), zero_cols.end(), true);
    if (n_zero > 0) {
        result.warnings.push_back(std::to_string(n_zero) + " all-zero column(s) fixed at coefficient 0");
    }

    const double alpha0 = problem.fit_intercept ? intercept_only_mle(problem.family, problem.y) : 0.0;
    Vector beta0 = Vector::Zero(problem.p());
    if (options.beta_start) {
        if (options.beta_start->size() != problem.p()) throw ParameterError("beta_start has the wrong length");
        beta0 = *options.beta_start;
        for (std::size_t j = 0; j < zero_cols.size(); ++j) {
            if (zero_cols[j]) beta0(static_cast<Index>(j)) = 0.0;
        }
    }

    if (options.k0) {
        result.k0_used = *options.k0;
    } else if (problem.family == GlmFamily::PoissonLog) {
        // No global bound on b''. Size the reachable predictors with a short
        // preliminary run, then pad by the safety factor.
        const double eta0 = std::abs(alpha0) + 1.0;
        const double k_pre = scaling_bound(problem.family, problem.X, problem.rules, eta0).k0;
        const Problem pre_problem = problem.scaled(k_pre);
        SolverOptions pre_opts = options;
        pre_opts.divergence_patience = std::numeric_limits<int>::max();
        Iteration pre(pre_problem, pre_opts, zero_cols);
        const RunOutcome pre_run = pre.run(beta0, alpha0, 1, 5);
        const double beta_norm = (pre_run.beta / k_pre).norm();
        double max_row = 0.0;
        for (Index i = 0; i < problem.n(); ++i) max_row = std::max(max_row, problem.X.row(i).norm());
        const double bound = std::max(eta0, max_row * beta_norm + std::abs(pre_run.intercept));
        result.k0_used = scaling_bound(problem.family, problem.X, problem.rules, bound).k0;
        result.k0_heuristic = true;
        result.warnings.push_back("Poisson scaling constant is heuristic; descent is monitored at run time");
    } else {
        result.k0_used = scaling_bound(problem.family, problem.X, problem.rules).k0;
    }

    const Problem sp = problem.scaled(result.k0_used);
    Iteration iteration(sp, options, zero_cols);
    RunOutcome run = iteration.run(beta0, alpha0, options.omega, options.max_iter);
    result.omega_used = options.omega;
    result.total_iterations = run.iterations;

    if (run.status == RunStatus::Diverged && options.omega != 1) {
        result.relaxation_fallback = true;
        result.warnings.push_back("relaxed iteration (omega=2) stopped descending; restarted with omega=1");
        run = iteration.run(beta0, alpha0, 1, options.max_iter);
        result.omega_used = 1;
        result.total_iterations += run.iterations;
    }
    if (run.status == RunStatus::Diverged) {
        std::ostringstream os;
        os << "objective increased for " << options.divergence_patience
           << " consecutive iterations at k0 = " << result.k0_used
           << "; the Fisher-information bound on X/k0 (rho <= max(1, 2 - L)) is likely violated, use a larger k0";
        throw SolverError(os.str());
    }
    if (run.mean_capped) {
        result.warnings.push_back("Poisson mean was capped at exp(" + std::to_string(options.poisson_eta_cap) + ")");
    }

    result.beta_scaled = std::move(run.beta);
    result.beta = result.beta_scaled / result.k0_used;
    result.intercept = run.intercept;
    result.objective_trace = std::move(run.trace);
    result.fixed_point_residual = run.residual;
    result.iterations = run.iterations;
    result.converged = run.status == RunStatus::Converged;
    result.descent_violations = run.violations;
    return result;
}

CalibrationResult calibrate(const Problem& problem, const Support& pattern,
                            const Calibration& mode, const CalibrateOptions& options)
{
    check_support(problem.family, problem.y);
    for (Index j : pattern) {
        if (j < 0 || j >= problem.p()) throw ParameterError("pattern index out of range");
    }
    const double eta_pen = mode.mode == CalibrationMode::RestrictedRidge ? mode.eta : 0.0;
    if (!(eta_pen >= 0.0)) throw ParameterError("ridge calibration needs eta >= 0");

    CalibrationResult out;
    out.beta = Vector::Zero(problem.p());
    const auto m = static_cast<Index>(pattern.size());
    const Index cols = m + (problem.fit_intercept ? 1 : 0);
    if (cols == 0) {
        out.converged = true;
        return out;
    }
    if (cols > problem.n()) {
        out.warnings.push_back("restricted problem has more parameters than observations");
    }

    Matrix Z(problem.n(), cols);
    for (Index c = 0; c < m; ++c) Z.col(c) = problem.X.col(pattern[static_cast<std::size_t>(c)]);
    if (problem.fit_intercept) Z.col(m).setOnes();

    Vector theta = Vector::Zero(cols);
    if (problem.fit_intercept) theta(m) = intercept_only_mle(problem.family, problem.y);

    const double base = base_measure_sum(problem.family, problem.y);
    auto value = [&](const Vector& th) {
        const Vector eta = Z * th;
        return neg_loglik(problem.family, problem.y, eta, base) + 0.5 * eta_pen * th.head(m).squaredNorm();
    };

    double f = value(theta);
    for (int it = 1; it <= options.max_iter; ++it) {
        out.iterations = it;
        const Vector eta = Z * theta;
        Vector resid(eta.size());
        Vector w(eta.size());
        for (Index i = 0; i < eta.size(); ++i) {
            resid(i) = problem.y(i) - mean_function(problem.family, eta(i));
            w(i) = variance_function(problem.family, eta(i));
        }
        Vector grad = Z.transpose() * resid;
        grad.head(m) -= eta_pen * theta.head(m);
        Matrix H = Z.transpose() * w.asDiagonal() * Z;
        H.diagonal().head(m).array() += eta_pen;

        Vector delta;
        double jitter = 0.0;
        const double scale = std::max(H.diagonal().maxCoeff(), 1.0);
        for (int attempt = 0; attempt < 12; ++attempt) {
            Matrix Hj = H;
            Hj.diagonal().array() += jitter;
            Eigen::LDLT<Matrix> ldlt(Hj);
            if (ldlt.info() == Eigen::Success) {
                delta = ldlt.solve(grad);
                if (delta.allFinite() && (Hj * delta - grad).norm() <= 1e-6 * (grad.norm() + 1e-300) + 1e-12) break;
            }
            jitter = jitter == 0.0 ? 1e-12 * scale : jitter * 10.0;
            delta.resize(0);
        }
        if (delta.size() == 0) {
            out.warnings.push_back("Newton system could not be solved");
            break;
        }

        double t = 1.0;
        Vector next = theta + delta;
        double f_next = value(next);
        for (int half = 0; half < 60 && !(f_next <= f); ++half) {
            t *= 0.5;
            next = theta + t * delta;
            f_next = value(next);
        }
        if (!(f_next <= f)) {
            // No decrease along the Newton direction: at numerical optimum.
            out.converged = true;
            break;
        }
        const double step = (t * delta).lpNorm<Eigen::Infinity>();
        theta = std::move(next);
        f = f_next;

        if (theta.head(m).lpNorm<Eigen::Infinity>() > options.coef_bound) {
            theta.head(m) = theta.head(m).cwiseMax(-options.coef_bound).cwiseMin(options.coef_bound);
            out.capped = true;
            out.warnings.push_back("coefficients reached the bound; estimate clipped (possible separation)");
            break;
        }
        if (step < options.tol) {
            out.converged = true;
            break;
        }
    }
    for (Index c = 0; c < m; ++c) out.beta(pattern[static_cast<std::size_t>(c)]) = theta(c);
    if (problem.fit_intercept) out.intercept = theta(m);
    return out;
}

} // namespace tisp
