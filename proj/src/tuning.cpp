#include <tisp/tuning.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include <tisp/errors.hpp>
#include <tisp/random.hpp>

#include "parallel.hpp"

namespace tisp {
namespace {

Vector info_eigenvalues(const Matrix& info)
{
    if (info.rows() == 0) return Vector();
    Eigen::SelfAdjointEigenSolver<Matrix> es(info, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseMax(0.0);
}

Problem rows_of(const Problem& problem, const std::vector<Index>& rows)
{
    Problem out;
    out.X = problem.X(rows, Eigen::all);
    out.y = problem.y(rows);
    out.family = problem.family;
    out.groups = GroupSpec::singletons(problem.p());
    out.rules.assign(static_cast<std::size_t>(problem.p()), ThresholdRule::soft());
    out.lambdas = Vector::Zero(problem.p());
    out.fit_intercept = problem.fit_intercept;
    return out;
}

double heldout_nll(const Problem& test, const Vector& beta, double intercept)
{
    const Vector eta = (test.X * beta).array() + intercept;
    return -log_likelihood(test.family, test.y, eta);
}

} // namespace

double default_k0(const Problem& problem)
{
    if (problem.family == GlmFamily::PoissonLog) {
        const double a0 = problem.fit_intercept ? intercept_only_mle(problem.family, problem.y) : 0.0;
        return scaling_bound(problem.family, problem.X, problem.rules, std::abs(a0) + 1.0).k0;
    }
    return scaling_bound(problem.family, problem.X, problem.rules).k0;
}

double lambda_max(const Problem& problem, double k0)
{
    problem.validate();
    check_support(problem.family, problem.y);
    const double a0 = problem.fit_intercept ? intercept_only_mle(problem.family, problem.y) : 0.0;
    const Vector mu0 = Vector::Constant(problem.n(), mean_function(problem.family, a0));
    const Vector g = problem.X.transpose() * (problem.y - mu0) / k0;

    double best = 0.0;
    bool any = false;
    for (Index k = 0; k < problem.num_groups(); ++k) {
        const double kill = kill_threshold(problem.rules[static_cast<std::size_t>(k)], 1.0);
        const double w = problem.weights ? (*problem.weights)(k) : 1.0;
        if (!(kill > 0.0) || !(w > 0.0)) continue;
        any = true;
        double sq = 0.0;
        for (Index j : problem.groups.blocks[static_cast<std::size_t>(k)]) sq += g(j) * g(j);
        best = std::max(best, std::sqrt(sq) / (kill * w));
    }
    if (!any) throw ParameterError("no group can be thresholded to zero (ridge rules or zero weights); lambda grid is degenerate");
    return best;
}

LambdaGrid lambda_grid(const Problem& problem, int L, double min_ratio, std::optional<double> k0)
{
    if (L < 2) throw ParameterError("lambda grid needs at least 2 values");
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw ParameterError("min_ratio must lie in (0, 1)");
    LambdaGrid grid;
    grid.k0 = k0 ? *k0 : default_k0(problem);
    if (!problem.columns_normalized) {
        for (Index j = 0; j < problem.p(); ++j) {
            const double norm = problem.X.col(j).norm();
            if (norm > 0.0 && std::abs(norm - 1.0) > 1e-8) {
                grid.warnings.push_back("design columns are not normalized; the lambda range assumes unit-norm columns");
                break;
            }
        }
    }
    grid.lambda_max = lambda_max(problem, grid.k0);
    if (!(grid.lambda_max > 0.0)) {
        throw ParameterError("lambda_max is zero: the response is already explained by the null model");
    }
    grid.values.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        grid.values[static_cast<std::size_t>(l)] =
            grid.lambda_max * std::pow(min_ratio, static_cast<double>(l) / (L - 1));
    }
    // Nudge the top so rounding in the solver's surrogate cannot leave a
    // survivor, and hard-type rules (kill inclusive) start empty too.
    grid.values[0] *= 1.0 + 1e-12;
    return grid;
}

SolutionPath solution_path(const Problem& problem, const LambdaGrid& grid,
                           const SolverOptions& options, int threads)
{
    SolutionPath path;
    path.grid = grid;
    path.points.resize(grid.values.size());
    SolverOptions opts = options;
    opts.k0 = grid.k0;
    opts.beta_start.reset();

    detail::parallel_for(grid.values.size(), threads, [&](std::size_t l) {
        PathPoint& pt = path.points[l];
        pt.lambda = grid.values[l];
        try {
            pt.fit = tisp_fit(problem.with_lambda(pt.lambda), opts);
            pt.pattern = pt.fit->support();
        } catch (const Error& e) {
            pt.failed = true;
            pt.error = e.what();
        }
    });

    path.pattern_id.assign(path.points.size(), SolutionPath::npos);
    for (std::size_t l = 0; l < path.points.size(); ++l) {
        if (path.points[l].failed) continue;
        const auto it = std::find(path.unique_patterns.begin(), path.unique_patterns.end(), path.points[l].pattern);
        if (it == path.unique_patterns.end()) {
            path.pattern_id[l] = path.unique_patterns.size();
            path.unique_patterns.push_back(path.points[l].pattern);
        } else {
            path.pattern_id[l] = static_cast<std::size_t>(it - path.unique_patterns.begin());
        }
    }
    return path;
}

double df_from_eigenvalues(const Vector& eigenvalues, double eta)
{
    if (!(eta >= 0.0)) throw ParameterError("ridge parameter eta must be nonnegative");
    if (eigenvalues.size() == 0) return 0.0;
    const double top = eigenvalues.maxCoeff();
    if (!(top > 0.0)) return 0.0;
    const double floor = top * 1e-12 * static_cast<double>(eigenvalues.size());
    double df = 0.0;
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        const double d = eigenvalues(i);
        if (d <= floor) continue;
        df += eta == 0.0 ? 1.0 : d / (d + eta);
    }
    return df;
}

DfValue df_ridge(GlmFamily family, const Matrix& X_restricted, const Vector& beta_restricted,
                 double eta, double intercept)
{
    const Matrix info = fisher_information(family, X_restricted, beta_restricted, intercept).matrix;
    return {df_from_eigenvalues(info_eigenvalues(info), eta)};
}

DfValue df_ridge_diag(const Matrix& info, const Vector& eta)
{
    if (info.rows() != eta.size()) throw ParameterError("need one ridge parameter per coefficient");
    if (info.rows() == 0) return {0.0};
    if ((eta.array() == eta(0)).all()) return {df_from_eigenvalues(info_eigenvalues(info), eta(0))};
    Matrix A = info;
    A.diagonal() += eta;
    const Matrix S = A.ldlt().solve(info);
    return {S.trace()};
}

DfMatch match_df_info(const Matrix& info, double target_df, double tol)
{
    if (!(target_df > 0.0)) throw ParameterError("df target must be positive");
    const Vector d = info_eigenvalues(info);
    DfMatch out;
    const double df0 = df_from_eigenvalues(d, 0.0);
    if (target_df >= df0 - tol) {
        out.eta = 0.0;
        out.df = df0;
        out.clamped = target_df > df0 + tol;
        return out;
    }
    double hi = 1.0;
    while (df_from_eigenvalues(d, hi) >= target_df && hi < 1e300) hi *= 2.0;
    double lo = 0.0;
    double mid = hi;
    double df = df_from_eigenvalues(d, hi);
    for (int it = 1; it <= 500; ++it) {
        out.iterations = it;
        mid = 0.5 * (lo + hi);
        df = df_from_eigenvalues(d, mid);
        if (std::abs(df - target_df) <= tol) break;
        if (df > target_df) lo = mid;
        else hi = mid;
    }
    out.eta = mid;
    out.df = df;
    return out;
}

DfMatch match_df(GlmFamily family, const Matrix& X_restricted, const Vector& beta_restricted,
                 double target_df, double intercept, double tol)
{
    const Matrix info = fisher_information(family, X_restricted, beta_restricted, intercept).matrix;
    return match_df_info(info, target_df, tol);
}

std::vector<int> assign_folds(const Vector& y, GlmFamily family, int folds, std::uint64_t seed)
{
    const Index n = y.size();
    if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
    if (n < folds) throw ParameterError("fewer observations than folds");

    std::vector<std::vector<Index>> strata(1);
    if (family == GlmFamily::BernoulliLogit) {
        strata.assign(2, {});
        for (Index i = 0; i < n; ++i) strata[y(i) == 1.0 ? 1 : 0].push_back(i);
    } else {
        strata[0].resize(static_cast<std::size_t>(n));
        std::iota(strata[0].begin(), strata[0].end(), Index{0});
    }

    CounterRng rng(seed, 0xF01D5);
    std::vector<int> fold_of(static_cast<std::size_t>(n), 0);
    std::size_t position = 0;
    for (auto& stratum : strata) {
        for (std::size_t i = stratum.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(stratum[i - 1], stratum[j]);
        }
        for (Index idx : stratum) {
            fold_of[static_cast<std::size_t>(idx)] = static_cast<int>(position++ % static_cast<std::size_t>(folds));
        }
    }
    return fold_of;
}

std::string to_string(ScvMode mode)
{
    switch (mode) {
    case ScvMode::Plain: return "plain";
    case ScvMode::Aic: return "aic";
    case ScvMode::Bic: return "bic";
    }
    return "unknown";
}

ScvMode parse_scv_mode(const std::string& name)
{
    if (name == "plain" || name == "scv") return ScvMode::Plain;
    if (name == "aic") return ScvMode::Aic;
    if (name == "bic") return ScvMode::Bic;
    throw ParameterError("unknown SCV mode '" + name + "' (expected plain, aic or bic)");
}

RuleClass infer_rule_class(const Problem& problem)
{
    if (problem.rules.empty()) return RuleClass::L1OrL0;
    for (const auto& r : problem.rules) {
        if (!r.is<rule::HardRidge>()) return RuleClass::L1OrL0;
    }
    return RuleClass::HardRidge;
}

double fit_df(const Problem& problem, const FitResult& fit, RuleClass rule_class)
{
    const Support pattern = fit.support();
    if (rule_class == RuleClass::L1OrL0 || pattern.empty()) return static_cast<double>(pattern.size());

    std::vector<double> col_eta(static_cast<std::size_t>(problem.p()), 0.0);
    for (Index k = 0; k < problem.num_groups(); ++k) {
        const auto& r = problem.rules[static_cast<std::size_t>(k)];
        const double eta = r.is<rule::HardRidge>() || r.is<rule::Ridge>() ? r.eta() : 0.0;
        for (Index j : problem.groups.blocks[static_cast<std::size_t>(k)]) col_eta[static_cast<std::size_t>(j)] = eta;
    }
    const Matrix Xs = problem.X(Eigen::all, pattern) / fit.k0_used;
    const Vector bs = fit.beta_scaled(pattern);
    const Matrix info = fisher_information(problem.family, Xs, bs, fit.intercept).matrix;
    Vector eta(static_cast<Index>(pattern.size()));
    for (std::size_t c = 0; c < pattern.size(); ++c) eta(static_cast<Index>(c)) = col_eta[static_cast<std::size_t>(pattern[c])];
    return df_ridge_diag(info, eta).df;
}

double PatternScore::total() const
{
    return std::accumulate(fold_nll.begin(), fold_nll.end(), 0.0);
}

PatternScore score_pattern(const Problem& problem, const Support& pattern,
                           const std::vector<int>& fold_of, int folds, const PatternRefit& refit)
{
    if (fold_of.size() != static_cast<std::size_t>(problem.n())) throw ParameterError("fold labels do not match the data");
    PatternScore out;
    out.fold_nll.assign(static_cast<std::size_t>(folds), 0.0);
    if (refit.rule_class == RuleClass::HardRidge) out.eta_per_fold.assign(static_cast<std::size_t>(folds), 0.0);

    for (int k = 0; k < folds; ++k) {
        std::vector<Index> train;
        std::vector<Index> test;
        for (Index i = 0; i < problem.n(); ++i) {
            (fold_of[static_cast<std::size_t>(i)] == k ? test : train).push_back(i);
        }
        if (test.empty()) continue;
        const Problem tr = rows_of(problem, train);
        const Problem te = rows_of(problem, test);
        try {
            Vector beta = Vector::Zero(problem.p());
            double intercept = 0.0;
            if (pattern.empty()) {
                if (problem.fit_intercept) intercept = intercept_only_mle(problem.family, tr.y);
            } else {
                Calibration mode = Calibration::mle();
                if (refit.rule_class == RuleClass::HardRidge && refit.df_target > 0.0) {
                    const Matrix Xr = tr.X(Eigen::all, pattern);
                    const Vector br = refit.beta_full(pattern);
                    const DfMatch m = match_df(problem.family, Xr, br, refit.df_target, refit.intercept_full);
                    out.eta_per_fold[static_cast<std::size_t>(k)] = m.eta;
                    mode = Calibration::ridge(m.eta);
                    if (m.clamped) out.notes.push_back("fold " + std::to_string(k + 1) + ": df target above unpenalized df");
                }
                const CalibrationResult cr = calibrate(tr, pattern, mode, refit.calibrate);
                if (!cr.converged && !cr.capped) out.notes.push_back("fold " + std::to_string(k + 1) + ": refit did not converge");
                if (cr.capped) out.notes.push_back("fold " + std::to_string(k + 1) + ": refit coefficients clipped");
                beta = cr.beta;
                intercept = cr.intercept;
            }
            const double nll = heldout_nll(te, beta, intercept);
            if (!std::isfinite(nll)) throw SolverError("non-finite held-out likelihood");
            out.fold_nll[static_cast<std::size_t>(k)] = nll;
        } catch (const Error& e) {
            out.failed = true;
            out.notes.push_back("fold " + std::to_string(k + 1) + ": " + e.what());
        }
    }
    return out;
}

double scv_criterion(double scv_value, double df, Index n, ScvMode mode)
{
    switch (mode) {
    case ScvMode::Plain: return scv_value;
    case ScvMode::Aic: return 2.0 * scv_value + 2.0 * df;
    case ScvMode::Bic: return 2.0 * scv_value + std::log(static_cast<double>(n)) * df;
    }
    return scv_value;
}

double ScvRow::criterion(ScvMode mode) const
{
    switch (mode) {
    case ScvMode::Plain: return scv;
    case ScvMode::Aic: return scv_aic;
    case ScvMode::Bic: return scv_bic;
    }
    return scv;
}

std::optional<std::size_t> select_row(const std::vector<ScvRow>& rows, ScvMode mode)
{
    std::optional<std::size_t> best;
    for (std::size_t l = 0; l < rows.size(); ++l) {
        const ScvRow& r = rows[l];
        if (r.failed || !std::isfinite(r.criterion(mode))) continue;
        if (!best) {
            best = l;
            continue;
        }
        const ScvRow& b = rows[*best];
        const double c = r.criterion(mode);
        const double cb = b.criterion(mode);
        if (c < cb || (c == cb && (r.df < b.df || (r.df == b.df && r.lambda > b.lambda)))) best = l;
    }
    return best;
}

std::optional<std::size_t> ScvReport::selected(ScvMode m) const
{
    switch (m) {
    case ScvMode::Plain: return selected_plain;
    case ScvMode::Aic: return selected_aic;
    case ScvMode::Bic: return selected_bic;
    }
    return selected_bic;
}

ScvReport scv_from_path(const Problem& problem, SolutionPath path, const ScvOptions& options)
{
    ScvReport report;
    report.mode = options.mode;
    report.rule_class = options.rule_class ? *options.rule_class : infer_rule_class(problem);
    report.n = problem.n();
    report.folds = options.folds;
    report.fold_of = assign_folds(problem.y, problem.family, options.folds, options.seed);
    report.rows.resize(path.points.size());

    // Rows sharing a pattern (and df, for hard-ridge) are scored once.
    std::vector<std::size_t> owners;
    for (std::size_t l = 0; l < path.points.size(); ++l) {
        ScvRow& row = report.rows[l];
        const PathPoint& pt = path.points[l];
        row.lambda = pt.lambda;
        row.shared_with = l;
        if (pt.failed) {
            row.failed = true;
            row.notes.push_back(pt.error);
            continue;
        }
        row.pattern = pt.pattern;
        row.df = fit_df(problem, *pt.fit, report.rule_class);
        for (std::size_t o : owners) {
            if (report.rows[o].pattern == row.pattern && report.rows[o].df == row.df) {
                row.shared_with = o;
                break;
            }
        }
        if (row.shared_with == l) owners.push_back(l);
    }

    std::vector<PatternScore> scores(owners.size());
    detail::parallel_for(owners.size(), options.threads, [&](std::size_t i) {
        const std::size_t l = owners[i];
        PatternRefit refit;
        refit.rule_class = report.rule_class;
        refit.df_target = report.rows[l].df;
        refit.beta_full = path.points[l].fit->beta;
        refit.intercept_full = path.points[l].fit->intercept;
        refit.calibrate = options.calibrate;
        scores[i] = score_pattern(problem, report.rows[l].pattern, report.fold_of, options.folds, refit);
    });

    for (std::size_t l = 0; l < report.rows.size(); ++l) {
        ScvRow& row = report.rows[l];
        if (row.failed) continue;
        const auto owner = std::find(owners.begin(), owners.end(), row.shared_with);
        const PatternScore& s = scores[static_cast<std::size_t>(owner - owners.begin())];
        row.fold_nll = s.fold_nll;
        row.eta_per_fold = s.eta_per_fold;
        row.failed = s.failed;
        row.notes.insert(row.notes.end(), s.notes.begin(), s.notes.end());
        row.scv = s.total();
        row.scv_aic = scv_criterion(row.scv, row.df, problem.n(), ScvMode::Aic);
        row.scv_bic = scv_criterion(row.scv, row.df, problem.n(), ScvMode::Bic);
    }
    report.selected_plain = select_row(report.rows, ScvMode::Plain);
    report.selected_aic = select_row(report.rows, ScvMode::Aic);
    report.selected_bic = select_row(report.rows, ScvMode::Bic);
    report.path = std::move(path);
    return report;
}

ScvReport scv(const Problem& problem, const LambdaGrid& grid, const ScvOptions& options)
{
    if (options.folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
    if (problem.n() < options.folds) throw ParameterError("fewer observations than folds");
    SolutionPath path = solution_path(problem, grid, options.solver, options.threads);
    return scv_from_path(problem, std::move(path), options);
}

} // namespace tisp
