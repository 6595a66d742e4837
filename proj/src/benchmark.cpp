#include <tisp/benchmark.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include <tisp/errors.hpp>
#include <tisp/linalg.hpp>
#include <tisp/random.hpp>
#include <tisp/tuning.hpp>

#include "parallel.hpp"

namespace tisp {
namespace {

std::vector<double> log_space(double lo, double hi, int count)
{
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = count > 1 ? static_cast<double>(i) / (count - 1) : 0.0;
        out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, t);
    }
    return out;
}

Problem with_rule(const Problem& problem, const ThresholdRule& rule)
{
    Problem out = problem;
    out.rules.assign(static_cast<std::size_t>(problem.num_groups()), rule);
    return out;
}

// Centered ridge through the n x n Gram matrix; valid for p > n.
struct GaussianRidge
{
    Vector x_mean;
    double y_mean = 0.0;
    Matrix XcT_U;  // Xc^T U
    Vector lambda; // eigenvalues of Xc Xc^T
    Vector Uty;    // U^T yc
    double yc_norm2 = 0.0;
    bool intercept = true;

    GaussianRidge(const Matrix& Xs, const Vector& y, bool fit_intercept) : intercept(fit_intercept)
    {
        Matrix Xc = Xs;
        Vector yc = y;
        x_mean = Vector::Zero(Xs.cols());
        if (intercept) {
            x_mean = Xs.colwise().mean();
            y_mean = y.mean();
            Xc.rowwise() -= x_mean.transpose();
            yc.array() -= y_mean;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(Xc * Xc.transpose());
        lambda = es.eigenvalues().cwiseMax(0.0);
        XcT_U = Xc.transpose() * es.eigenvectors();
        Uty = es.eigenvectors().transpose() * yc;
        yc_norm2 = yc.squaredNorm();
    }

    // Coefficients on the scaled design.
    Vector beta(double eta) const
    {
        const Vector w = Uty.array() / (lambda.array() + eta);
        return XcT_U * w;
    }

    double intercept_for(const Vector& b) const { return intercept ? y_mean - x_mean.dot(b) : 0.0; }

    double gcv(double eta, Index n) const
    {
        double rss = yc_norm2 - Uty.squaredNorm();
        double df = intercept ? 1.0 : 0.0;
        for (Index i = 0; i < lambda.size(); ++i) {
            const double shrink = eta / (lambda(i) + eta);
            rss += shrink * shrink * Uty(i) * Uty(i);
            df += lambda(i) / (lambda(i) + eta);
        }
        const double denom = static_cast<double>(n) - df;
        return denom > 0.0 ? static_cast<double>(n) * rss / (denom * denom) : std::numeric_limits<double>::infinity();
    }
};

double gcv_ridge_eta(const Problem& problem, double k0, const std::vector<double>& eta_grid)
{
    const GaussianRidge ridge(problem.X / k0, problem.y, problem.fit_intercept);
    double best = eta_grid.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double eta : eta_grid) {
        const double s = ridge.gcv(eta, problem.n());
        if (s < best_score) {
            best_score = s;
            best = eta;
        }
    }
    return best;
}

const std::vector<double>& ridge_eta_grid()
{
    static const std::vector<double> grid = log_space(1e-6, 1e2, 41);
    return grid;
}

struct ScvPick
{
    FitResult fit;
    double lambda = 0.0;
    double eta = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

ScvPick tune_by_scv_bic(const Problem& problem, const ThresholdRule& rule, int grid_size,
                        double min_ratio, int folds, std::uint64_t seed, const SolverOptions& options,
                        int threads)
{
    const Problem pr = with_rule(problem, rule);
    ScvOptions so;
    so.folds = folds;
    so.seed = seed;
    so.mode = ScvMode::Bic;
    so.solver = options;
    so.threads = threads;
    const ScvReport report = scv(pr, lambda_grid(pr, grid_size, min_ratio), so);
    ScvPick pick;
    pick.eta = rule.eta();
    if (const auto sel = report.selected()) {
        pick.fit = *report.path.points[*sel].fit;
        pick.lambda = report.rows[*sel].lambda;
        pick.score = report.rows[*sel].scv_bic;
    }
    return pick;
}

Support support_of_groups(const Problem& problem, const Vector& beta, std::vector<Index>& groups)
{
    Support cols;
    for (Index k = 0; k < problem.num_groups(); ++k) {
        bool nz = false;
        for (Index j : problem.groups.blocks[static_cast<std::size_t>(k)]) {
            if (beta(j) != 0.0) {
                nz = true;
                cols.push_back(j);
            }
        }
        if (nz) groups.push_back(k);
    }
    std::sort(cols.begin(), cols.end());
    return cols;
}

} // namespace

double validation_loss(GlmFamily family, const Matrix& X_val, const Vector& y_val,
                       const Vector& beta, double intercept)
{
    const Vector eta = (X_val * beta).array() + intercept;
    if (family == GlmFamily::GaussianIdentity) return (y_val - eta).squaredNorm() / static_cast<double>(y_val.size());
    return -log_likelihood(family, y_val, eta) / static_cast<double>(y_val.size());
}

Tuned tune_lambda_by_validation(const Problem& problem, const ThresholdRule& rule,
                                const Matrix& X_val, const Vector& y_val,
                                int grid_size, double min_ratio, const SolverOptions& options,
                                int threads)
{
    const Problem pr = with_rule(problem, rule);
    const LambdaGrid grid = lambda_grid(pr, grid_size, min_ratio, options.k0);
    const SolutionPath path = solution_path(pr, grid, options, threads);
    Tuned best;
    best.loss = std::numeric_limits<double>::infinity();
    best.eta = rule.eta();
    for (const auto& pt : path.points) {
        ++best.fits;
        if (pt.failed) {
            ++best.failed_fits;
            continue;
        }
        const double loss = validation_loss(pr.family, X_val, y_val, pt.fit->beta, pt.fit->intercept);
        if (loss < best.loss) {
            best.loss = loss;
            best.lambda = pt.lambda;
            best.fit = *pt.fit;
        }
    }
    if (!std::isfinite(best.loss)) throw SolverError("every fit on the lambda path failed");
    return best;
}

double tune_ridge_by_validation(const Problem& problem, double k0, const Matrix& X_val,
                                const Vector& y_val, const std::vector<double>& eta_grid)
{
    double best = eta_grid.front();
    double best_loss = std::numeric_limits<double>::infinity();
    if (problem.family == GlmFamily::GaussianIdentity) {
        const GaussianRidge ridge(problem.X / k0, problem.y, problem.fit_intercept);
        for (double eta : eta_grid) {
            const Vector bs = ridge.beta(eta);
            const double loss = validation_loss(problem.family, X_val, y_val, bs / k0, ridge.intercept_for(bs));
            if (loss < best_loss) {
                best_loss = loss;
                best = eta;
            }
        }
        return best;
    }
    const Problem sp = problem.scaled(k0);
    Support all(static_cast<std::size_t>(problem.p()));
    for (Index j = 0; j < problem.p(); ++j) all[static_cast<std::size_t>(j)] = j;
    for (double eta : eta_grid) {
        const CalibrationResult cr = calibrate(sp, all, Calibration::ridge(eta));
        const double loss = validation_loss(problem.family, X_val, y_val, cr.beta / k0, cr.intercept);
        if (loss < best_loss) {
            best_loss = loss;
            best = eta;
        }
    }
    return best;
}

Tuned tune_hard_ridge_by_validation(const Problem& problem, const Matrix& X_val, const Vector& y_val,
                                    int grid_size, double min_ratio, const SolverOptions& options,
                                    int threads)
{
    // L = 1 for every eta, so one k0 serves all paths and eta stays in one unit.
    SolverOptions opts = options;
    if (!opts.k0) opts.k0 = default_k0(with_rule(problem, ThresholdRule::hard_ridge(1.0)));
    const double eta_star = tune_ridge_by_validation(problem, *opts.k0, X_val, y_val, ridge_eta_grid());

    Tuned best;
    best.loss = std::numeric_limits<double>::infinity();
    for (double factor : {0.5, 0.05, 0.005}) {
        Tuned t = tune_lambda_by_validation(problem, ThresholdRule::hard_ridge(factor * eta_star), X_val, y_val,
                                            grid_size, min_ratio, opts, threads);
        const int fits = best.fits + t.fits;
        const int failed = best.failed_fits + t.failed_fits;
        if (t.loss < best.loss) best = std::move(t);
        best.fits = fits;
        best.failed_fits = failed;
    }

    const std::vector<double> etas = log_space(1e-3 * eta_star, 10.0 * eta_star, 17);
    std::vector<std::optional<FitResult>> fits(etas.size());
    detail::parallel_for(etas.size(), threads, [&](std::size_t i) {
        try {
            fits[i] = tisp_fit(with_rule(problem, ThresholdRule::hard_ridge(etas[i])).with_lambda(best.lambda), opts);
        } catch (const Error&) {
        }
    });
    const double lambda = best.lambda;
    for (std::size_t i = 0; i < etas.size(); ++i) {
        ++best.fits;
        if (!fits[i]) {
            ++best.failed_fits;
            continue;
        }
        const double loss = validation_loss(problem.family, X_val, y_val, fits[i]->beta, fits[i]->intercept);
        if (loss < best.loss) {
            best.loss = loss;
            best.eta = etas[i];
            best.lambda = lambda;
            best.fit = std::move(*fits[i]);
        }
    }
    return best;
}

std::string to_string(SpectralMethod m)
{
    switch (m) {
    case SpectralMethod::BasisPursuit: return "BP";
    case SpectralMethod::GroupLasso: return "G-Lasso";
    case SpectralMethod::HardRidge: return "Hard-Ridge";
    case SpectralMethod::GroupHardRidge: return "G-Hard-Ridge";
    }
    return "unknown";
}

std::string to_string(SpectralTuning t)
{
    return t == SpectralTuning::LargeValidation ? "large_val" : "scv_bic";
}

SpectralMethod parse_spectral_method(const std::string& name)
{
    if (name == "bp" || name == "BP") return SpectralMethod::BasisPursuit;
    if (name == "glasso" || name == "g-lasso" || name == "G-Lasso") return SpectralMethod::GroupLasso;
    if (name == "hard-ridge" || name == "hard_ridge" || name == "Hard-Ridge") return SpectralMethod::HardRidge;
    if (name == "g-hard-ridge" || name == "g_hard_ridge" || name == "G-Hard-Ridge") return SpectralMethod::GroupHardRidge;
    throw ParameterError("unknown spectral method '" + name + "' (expected bp, glasso, hard-ridge, g-hard-ridge)");
}

SpectralTuning parse_spectral_tuning(const std::string& name)
{
    if (name == "large_val" || name == "large-val") return SpectralTuning::LargeValidation;
    if (name == "scv_bic" || name == "scv-bic") return SpectralTuning::ScvBic;
    throw ParameterError("unknown tuning mode '" + name + "' (expected large_val or scv_bic)");
}

std::vector<Index> twinsine_true_bins(const TwinSineSpec& spec)
{
    const auto bin = [&](double f) {
        return static_cast<Index>(std::llround(f / spec.f_max * static_cast<double>(spec.K)));
    };
    return {bin(spec.f1), bin(spec.f2)};
}

std::vector<SpectralSummary> run_spectral_benchmark(const SpectralConfig& config)
{
    if (config.runs < 1) throw ParameterError("need at least one run");
    const TwinSineSpec& spec = config.spec;
    const std::vector<Index> true_bins = twinsine_true_bins(spec);

    std::vector<SpectralSummary> out;
    for (SpectralMethod m : config.methods) {
        SpectralSummary s;
        s.method = m;
        s.tuning = config.tuning;
        s.sigma2 = spec.sigma2;
        s.runs.resize(static_cast<std::size_t>(config.runs));
        out.push_back(std::move(s));
    }

    for (int r = 0; r < config.runs; ++r) {
        const auto base = static_cast<std::uint64_t>(r) * 8;
        const Vector t = uniform_time_points(spec.n);
        const TwinSineSample train = gen_twinsine(spec, t, base);
        Dictionary dict = build_dictionary(t, spec.K, spec.f_max);
        const Vector scales = normalize_columns(dict.X);

        auto draw_times = [&](Index count, std::uint64_t stream) {
            CounterRng rng(spec.seed, stream);
            Vector tt(count);
            for (Index i = 0; i < count; ++i) tt(i) = 1.0 + (static_cast<double>(spec.n) - 1.0) * rng.uniform();
            return tt;
        };
        auto atoms = [&](const Vector& tt) {
            Matrix A = dictionary_atoms(dict, tt);
            for (Index j = 0; j < A.cols(); ++j) A.col(j) /= scales(j);
            return A;
        };
        const Vector t_val = draw_times(config.validation_size, base + 1);
        const Vector t_test = draw_times(config.test_size, base + 3);
        const Matrix X_val = atoms(t_val);
        const Matrix X_test = atoms(t_test);
        const Vector y_val = gen_twinsine(spec, t_val, base + 2).y;
        const Vector y_test = gen_twinsine(spec, t_test, base + 4).y;

        Problem grouped = Problem::uniform(dict.X, train.y, GlmFamily::GaussianIdentity, dict.groups,
                                           ThresholdRule::soft(), 0.0, true);
        grouped.columns_normalized = true;
        Problem single = grouped;
        single.groups = GroupSpec::singletons(dict.X.cols());
        single.rules.assign(static_cast<std::size_t>(dict.X.cols()), ThresholdRule::soft());
        single.lambdas = Vector::Zero(dict.X.cols());

        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            const SpectralMethod m = config.methods[mi];
            const bool group_form = m == SpectralMethod::GroupLasso || m == SpectralMethod::GroupHardRidge;
            const bool hard_ridge = m == SpectralMethod::HardRidge || m == SpectralMethod::GroupHardRidge;
            const Problem& pr = group_form ? grouped : single;

            FitResult fit;
            double lambda = 0.0;
            double eta = 0.0;
            if (config.tuning == SpectralTuning::LargeValidation) {
                Tuned tuned = hard_ridge
                    ? tune_hard_ridge_by_validation(pr, X_val, y_val, config.grid_size, config.min_ratio, config.solver, config.threads)
                    : tune_lambda_by_validation(pr, ThresholdRule::soft(), X_val, y_val, config.grid_size, config.min_ratio, config.solver, config.threads);
                fit = std::move(tuned.fit);
                lambda = tuned.lambda;
                eta = tuned.eta;
            } else {
                const std::uint64_t fold_seed = spec.seed * 1000003ULL + static_cast<std::uint64_t>(r);
                ScvPick best;
                if (hard_ridge) {
                    const double k0 = default_k0(with_rule(pr, ThresholdRule::hard_ridge(1.0)));
                    const double eta_star = gcv_ridge_eta(pr, k0, ridge_eta_grid());
                    SolverOptions opts = config.solver;
                    opts.k0 = k0;
                    for (double factor : {0.5, 0.05, 0.005}) {
                        ScvPick p = tune_by_scv_bic(pr, ThresholdRule::hard_ridge(factor * eta_star), config.grid_size,
                                                    config.min_ratio, config.folds, fold_seed, opts, config.threads);
                        if (p.score < best.score) best = std::move(p);
                    }
                } else {
                    best = tune_by_scv_bic(pr, ThresholdRule::soft(), config.grid_size, config.min_ratio,
                                           config.folds, fold_seed, config.solver, config.threads);
                }
                if (!std::isfinite(best.score)) throw SolverError("SCV selected no model");
                fit = std::move(best.fit);
                lambda = best.lambda;
                eta = best.eta;
            }

            SpectralRun& run = out[mi].runs[static_cast<std::size_t>(r)];
            run.run = r;
            run.lambda = lambda;
            run.eta = eta;
            run.converged = fit.converged;
            run.mse_star = spectral_mse_star(y_test, X_test, fit.beta, fit.intercept, spec.sigma2);

            std::vector<Index> sel_groups;
            const Support cols = support_of_groups(grouped, fit.beta, sel_groups);
            for (Index k : sel_groups) run.selected_bins.push_back(dict.group_bin[static_cast<std::size_t>(k)]);
            run.exact = tone_selection_stats(run.selected_bins, true_bins, spec.K, 0);
            run.within_one = tone_selection_stats(run.selected_bins, true_bins, spec.K, 1);
            Support truth_cols;
            for (Index j = 0; j < dict.X.cols(); ++j) {
                const Index b = dict.bin[static_cast<std::size_t>(j)];
                if (std::find(true_bins.begin(), true_bins.end(), b) != true_bins.end()) truth_cols.push_back(j);
            }
            run.columns = selection_stats(cols, truth_cols, dict.X.cols());
        }
    }

    for (auto& s : out) {
        std::vector<double> err, jd, ms, ss, jd1, m1, s1, mc, sc;
        for (const auto& r : s.runs) {
            err.push_back(r.mse_star);
            jd.push_back(r.exact.joint_detection ? 100.0 : 0.0);
            ms.push_back(100.0 * r.exact.masking);
            ss.push_back(100.0 * r.exact.swamping);
            jd1.push_back(r.within_one.joint_detection ? 100.0 : 0.0);
            m1.push_back(100.0 * r.within_one.masking);
            s1.push_back(100.0 * r.within_one.swamping);
            mc.push_back(100.0 * r.columns.masking);
            sc.push_back(100.0 * r.columns.swamping);
        }
        s.err = median(err);
        s.jd = mean(jd);
        s.masking = mean(ms);
        s.swamping = mean(ss);
        s.jd_within_one = mean(jd1);
        s.masking_within_one = mean(m1);
        s.swamping_within_one = mean(s1);
        s.masking_columns = mean(mc);
        s.swamping_columns = mean(sc);
    }
    return out;
}

std::string to_string(Ar1Method m)
{
    return m == Ar1Method::HardRidge ? "hard-ridge" : "scad";
}

std::vector<Ar1Summary> run_ar1_study(const Ar1StudyConfig& config)
{
    if (config.reps < 1) throw ParameterError("need at least one replication");
    std::vector<Ar1Summary> out;
    for (Ar1Method m : config.methods) {
        Ar1Summary s;
        s.method = m;
        s.reps.resize(static_cast<std::size_t>(config.reps));
        out.push_back(std::move(s));
    }
    const Support truth = [&] {
        Support t;
        const Vector b = ar1_true_beta(config.design.p, config.design.b);
        for (Index j = 0; j < b.size(); ++j) {
            if (b(j) != 0.0) t.push_back(j);
        }
        return t;
    }();

    for (int r = 0; r < config.reps; ++r) {
        const auto stream = static_cast<std::uint64_t>(r) * 3;
        GlmDataset train = gen_ar1_glm(config.design, config.family, config.design.n, stream);
        GlmDataset val = gen_ar1_glm(config.design, config.family, config.validation_size, stream + 1);
        GlmDataset test = gen_ar1_glm(config.design, config.family, config.test_size, stream + 2);
        const Vector scales = normalize_columns(train.X);
        for (Index j = 0; j < scales.size(); ++j) {
            val.X.col(j) /= scales(j);
            test.X.col(j) /= scales(j);
        }
        const Vector beta_true = train.beta_true.cwiseProduct(scales);

        Problem pr = Problem::uniform(train.X, train.y, config.family, GroupSpec::singletons(config.design.p),
                                      ThresholdRule::soft(), 0.0, true);
        pr.columns_normalized = true;

        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            const Tuned tuned = config.methods[mi] == Ar1Method::HardRidge
                ? tune_hard_ridge_by_validation(pr, val.X, val.y, config.grid_size, config.min_ratio, config.solver, config.threads)
                : tune_lambda_by_validation(pr, ThresholdRule::scad(), val.X, val.y, config.grid_size, config.min_ratio, config.solver, config.threads);
            Ar1Rep& rep = out[mi].reps[static_cast<std::size_t>(r)];
            rep.rep = r;
            rep.lambda = tuned.lambda;
            rep.eta = tuned.eta;
            rep.selected = tuned.fit.support();
            rep.stats = selection_stats(rep.selected, truth, config.design.p);
            rep.sde = scaled_deviance_error(config.family, tuned.fit.beta, beta_true, test.X, test.y,
                                            tuned.fit.intercept, 0.0);
        }
    }

    for (auto& s : out) {
        std::vector<double> sde, ms, ss, jd;
        for (const auto& r : s.reps) {
            sde.push_back(r.sde);
            ms.push_back(100.0 * r.stats.masking);
            ss.push_back(100.0 * r.stats.swamping);
            jd.push_back(r.stats.joint_detection ? 100.0 : 0.0);
        }
        s.sde = trimmed_mean(sde, 0.4);
        s.masking = mean(ms);
        s.swamping = mean(ss);
        s.jd = mean(jd);
    }
    return out;
}

} // namespace tisp
