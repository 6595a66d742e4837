// Command-line front end: fit, path, tune, screen, simulate, spectral, study.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <tisp/benchmark.hpp>
#include <tisp/errors.hpp>
#include <tisp/io.hpp>
#include <tisp/linalg.hpp>
#include <tisp/screening.hpp>
#include <tisp/simulation.hpp>
#include <tisp/solver.hpp>
#include <tisp/tuning.hpp>

using json = nlohmann::json;
using namespace tisp;

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kSolver = 4 };

struct Common
{
    std::string data;
    std::string family = "gaussian";
    std::string rule = "soft";
    std::optional<double> eta;
    double scad_a = 3.7;
    double firm_alpha = 0.5;
    std::string groups;
    bool intercept = false;
    bool normalize = false;
    int omega = 2;
    std::optional<double> k0;
    int max_iter = 10000;
    double tol = 1e-8;
    std::string format = "csv";
    std::string out;
    int threads = 1;
};

struct Loaded
{
    Problem problem;
    Vector scales; // column norms divided out when --normalize
    std::vector<std::string> names;
};

ThresholdRule make_rule(const Common& c)
{
    const auto need_eta = [&](const char* what) {
        if (!c.eta) throw ParameterError(std::string("rule ") + what + " needs --eta");
        return *c.eta;
    };
    if (c.rule == "soft") return ThresholdRule::soft();
    if (c.rule == "hard") return ThresholdRule::hard();
    if (c.rule == "scad") return ThresholdRule::scad(c.scad_a);
    if (c.rule == "firm") return ThresholdRule::firm(c.firm_alpha);
    if (c.rule == "ridge") return ThresholdRule::ridge(need_eta("ridge"));
    if (c.rule == "hard-ridge" || c.rule == "hard_ridge") return ThresholdRule::hard_ridge(need_eta("hard-ridge"));
    throw ParameterError("unknown rule '" + c.rule + "' (expected soft, ridge, hard, scad, firm, hard-ridge)");
}

Loaded load(const Common& c)
{
    if (c.data.empty()) throw ParameterError("--data is required");
    const GlmFamily family = parse_family(c.family);
    const ThresholdRule rule = make_rule(c);
    Dataset d = read_dataset(c.data);
    Loaded out;
    out.names = d.feature_names;
    out.scales = Vector::Ones(d.X.cols());
    if (c.normalize) out.scales = normalize_columns(d.X);
    const GroupSpec g = c.groups.empty() ? GroupSpec::singletons(d.X.cols()) : read_groups(c.groups, d.X.cols());
    out.problem = Problem::uniform(std::move(d.X), std::move(d.y), family, g, rule, 0.0, c.intercept);
    out.problem.columns_normalized = c.normalize;
    check_support(family, out.problem.y);
    return out;
}

SolverOptions solver_options(const Common& c)
{
    SolverOptions o;
    o.k0 = c.k0;
    o.omega = c.omega;
    o.max_iter = c.max_iter;
    o.tol = c.tol;
    return o;
}

std::string num(double v)
{
    return format_number(v, 17);
}

std::string summary_num(double v)
{
    return format_number(v, 10);
}

// 1-based indices joined with ';' for CSV cells.
std::string support_cell(const Support& s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(s[i] + 1);
    }
    return out;
}

json support_json(const Support& s)
{
    json a = json::array();
    for (Index j : s) a.push_back(j + 1);
    return a;
}

json vec_json(const Vector& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

void emit(const Common& c, const std::string& text)
{
    if (c.out.empty()) {
        std::cout << text;
    } else {
        write_text(c.out, text);
    }
}

void print_warnings(const std::vector<std::string>& w)
{
    for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

void check_format(const Common& c)
{
    if (c.format != "csv" && c.format != "json") throw ParameterError("--format must be csv or json");
}

// Back to the columns as given in the file.
Vector unscale(const Vector& beta, const Vector& scales)
{
    return beta.cwiseQuotient(scales);
}

int cmd_fit(const Common& c, double lambda, bool calibrate_flag)
{
    check_format(c);
    const Loaded L = load(c);
    const Problem pr = L.problem.with_lambda(lambda);
    const FitResult fit = tisp_fit(pr, solver_options(c));
    print_warnings(fit.warnings);
    const Vector beta = unscale(fit.beta, L.scales);
    std::optional<Vector> refit;
    double refit_intercept = 0.0;
    if (calibrate_flag) {
        const CalibrationResult cr = calibrate(pr, fit.support());
        print_warnings(cr.warnings);
        refit = unscale(cr.beta, L.scales);
        refit_intercept = cr.intercept;
    }

    if (c.format == "json") {
        json j;
        j["command"] = "fit";
        j["family"] = to_string(pr.family);
        j["rule"] = pr.rules.front().name();
        j["lambda"] = lambda;
        j["k0"] = fit.k0_used;
        j["k0_heuristic"] = fit.k0_heuristic;
        j["converged"] = fit.converged;
        j["iterations"] = fit.iterations;
        j["total_iterations"] = fit.total_iterations;
        j["omega_used"] = fit.omega_used;
        j["relaxation_fallback"] = fit.relaxation_fallback;
        j["descent_violations"] = fit.descent_violations;
        j["fixed_point_residual"] = fit.fixed_point_residual;
        j["intercept"] = fit.intercept;
        j["beta"] = vec_json(beta);
        j["support"] = support_json(fit.support());
        j["objective_trace"] = fit.objective_trace;
        if (refit) {
            j["calibrated_beta"] = vec_json(*refit);
            j["calibrated_intercept"] = refit_intercept;
        }
        j["warnings"] = fit.warnings;
        emit(c, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "key,index,value\n";
        s << "lambda,," << num(lambda) << "\n";
        s << "k0,," << num(fit.k0_used) << "\n";
        s << "k0_heuristic,," << (fit.k0_heuristic ? 1 : 0) << "\n";
        s << "converged,," << (fit.converged ? 1 : 0) << "\n";
        s << "iterations,," << fit.iterations << "\n";
        s << "total_iterations,," << fit.total_iterations << "\n";
        s << "omega_used,," << fit.omega_used << "\n";
        s << "relaxation_fallback,," << (fit.relaxation_fallback ? 1 : 0) << "\n";
        s << "descent_violations,," << fit.descent_violations << "\n";
        s << "fixed_point_residual,," << num(fit.fixed_point_residual) << "\n";
        s << "intercept,," << num(fit.intercept) << "\n";
        for (Index j = 0; j < beta.size(); ++j) s << "beta," << j + 1 << "," << num(beta(j)) << "\n";
        for (Index j : fit.support()) s << "support," << j + 1 << ",1\n";
        for (std::size_t i = 0; i < fit.objective_trace.size(); ++i) {
            s << "objective," << i << "," << num(fit.objective_trace[i]) << "\n";
        }
        if (refit) {
            for (Index j = 0; j < refit->size(); ++j) s << "calibrated_beta," << j + 1 << "," << num((*refit)(j)) << "\n";
            s << "calibrated_intercept,," << num(refit_intercept) << "\n";
        }
        emit(c, s.str());
    }
    if (!fit.converged) std::cerr << "warning: no convergence within " << c.max_iter << " iterations\n";
    return kOk;
}

LambdaGrid make_grid(const Common& c, const Problem& pr, int grid_size, double min_ratio)
{
    std::optional<double> k0 = c.k0;
    LambdaGrid g = lambda_grid(pr, grid_size, min_ratio, k0);
    print_warnings(g.warnings);
    return g;
}

int cmd_path(const Common& c, int grid_size, double min_ratio)
{
    check_format(c);
    const Loaded L = load(c);
    const LambdaGrid g = make_grid(c, L.problem, grid_size, min_ratio);
    const SolutionPath path = solution_path(L.problem, g, solver_options(c), c.threads);
    bool any_failed = false;
    if (c.format == "json") {
        json j;
        j["command"] = "path";
        j["k0"] = g.k0;
        j["lambda_max"] = g.lambda_max;
        j["points"] = json::array();
        for (const auto& pt : path.points) {
            json p;
            p["lambda"] = pt.lambda;
            p["failed"] = pt.failed;
            if (pt.failed) {
                any_failed = true;
                p["error"] = pt.error;
            } else {
                p["converged"] = pt.fit->converged;
                p["iterations"] = pt.fit->iterations;
                p["objective"] = pt.fit->objective_trace.back();
                p["intercept"] = pt.fit->intercept;
                p["beta"] = vec_json(unscale(pt.fit->beta, L.scales));
                p["support"] = support_json(pt.pattern);
            }
            j["points"].push_back(p);
        }
        emit(c, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "lambda,nnz,converged,iterations,objective,intercept,support\n";
        for (const auto& pt : path.points) {
            if (pt.failed) {
                any_failed = true;
                s << num(pt.lambda) << ",,0,,,,\n";
                std::cerr << "warning: lambda " << pt.lambda << ": " << pt.error << "\n";
                continue;
            }
            s << num(pt.lambda) << "," << pt.pattern.size() << "," << (pt.fit->converged ? 1 : 0) << ","
              << pt.fit->iterations << "," << num(pt.fit->objective_trace.back()) << "," << num(pt.fit->intercept)
              << "," << support_cell(pt.pattern) << "\n";
        }
        emit(c, s.str());
    }
    if (any_failed) std::cerr << "warning: some grid points failed\n";
    return kOk;
}

int cmd_tune(const Common& c, int grid_size, double min_ratio, int folds, std::uint64_t seed,
             const std::string& mode)
{
    check_format(c);
    const Loaded L = load(c);
    ScvOptions o;
    o.folds = folds;
    o.seed = seed;
    o.mode = parse_scv_mode(mode);
    o.solver = solver_options(c);
    o.threads = c.threads;
    const LambdaGrid g = make_grid(c, L.problem, grid_size, min_ratio);
    const ScvReport rep = scv(L.problem, g, o);
    const auto sel = rep.selected();
    for (const auto& r : rep.rows) print_warnings(r.notes);

    if (c.format == "json") {
        json j;
        j["command"] = "tune";
        j["mode"] = to_string(rep.mode);
        j["rule_class"] = rep.rule_class == RuleClass::HardRidge ? "hard_ridge" : "l1_or_l0";
        j["n"] = rep.n;
        j["folds"] = rep.folds;
        j["k0"] = g.k0;
        j["rows"] = json::array();
        for (std::size_t l = 0; l < rep.rows.size(); ++l) {
            const ScvRow& r = rep.rows[l];
            json row;
            row["lambda"] = r.lambda;
            row["df"] = r.df;
            row["scv"] = r.scv;
            row["scv_aic"] = r.scv_aic;
            row["scv_bic"] = r.scv_bic;
            row["failed"] = r.failed;
            row["shared_with"] = r.shared_with + 1;
            row["support"] = support_json(r.pattern);
            row["fold_nll"] = r.fold_nll;
            row["eta_per_fold"] = r.eta_per_fold;
            row["selected"] = sel && *sel == l;
            j["rows"].push_back(row);
        }
        if (sel) {
            const auto& fit = *rep.path.points[*sel].fit;
            j["selected"] = {{"row", *sel + 1},
                             {"lambda", rep.rows[*sel].lambda},
                             {"beta", vec_json(unscale(fit.beta, L.scales))},
                             {"intercept", fit.intercept},
                             {"support", support_json(rep.rows[*sel].pattern)}};
        }
        emit(c, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "row,lambda,df,scv,scv_aic,scv_bic,failed,shared_with,selected,support\n";
        for (std::size_t l = 0; l < rep.rows.size(); ++l) {
            const ScvRow& r = rep.rows[l];
            s << l + 1 << "," << num(r.lambda) << "," << num(r.df) << "," << num(r.scv) << "," << num(r.scv_aic)
              << "," << num(r.scv_bic) << "," << (r.failed ? 1 : 0) << "," << r.shared_with + 1 << ","
              << (sel && *sel == l ? 1 : 0) << "," << support_cell(r.pattern) << "\n";
        }
        emit(c, s.str());
    }
    return sel ? kOk : kSolver;
}

int cmd_screen(const Common& c, double alpha)
{
    check_format(c);
    const Loaded L = load(c);
    ScreenOptions o;
    o.k0 = c.k0;
    const ScreenResult r = screen_proportional(L.problem, alpha, L.problem.rules.front(), o);
    print_warnings(r.warnings);
    if (c.format == "json") {
        json j;
        j["command"] = "screen";
        j["alpha"] = alpha;
        j["kept"] = support_json(r.kept);
        j["first_kept"] = support_json(r.first_kept);
        j["iterations"] = r.iterations;
        j["converged"] = r.converged;
        j["oscillation"] = r.oscillation;
        j["k0"] = r.k0_used;
        j["intercept"] = r.intercept;
        j["beta"] = vec_json(unscale(r.final_beta, L.scales));
        emit(c, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "index,name,beta\n";
        for (Index j : r.kept) {
            s << j + 1 << "," << L.names[static_cast<std::size_t>(j)] << "," << num(r.final_beta(j) / L.scales(j)) << "\n";
        }
        emit(c, s.str());
    }
    return kOk;
}

struct SimArgs
{
    std::string kind;
    Index n = 100;
    Index p = 20;
    double rho = 0.5;
    double b = 1.0;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::string family = "bernoulli";
    double sigma2 = 1.0;
    bool dictionary = false;
    std::string groups_out;
};

int cmd_simulate(const Common& c, const SimArgs& a)
{
    if (a.kind == "ar1") {
        const Ar1Design d{a.n, a.p, a.rho, a.b, a.seed};
        const GlmDataset ds = gen_ar1_glm(d, parse_family(a.family), a.n, a.stream);
        emit(c, format_dataset(ds.X, ds.y));
        return kOk;
    }
    if (a.kind == "twinsine") {
        TwinSineSpec spec;
        spec.n = a.n;
        spec.sigma2 = a.sigma2;
        spec.seed = a.seed;
        const Vector t = uniform_time_points(spec.n);
        const TwinSineSample smp = gen_twinsine(spec, t, a.stream);
        if (a.dictionary) {
            const Dictionary dict = build_dictionary(t, spec.K, spec.f_max);
            emit(c, format_dataset(dict.X, smp.y));
            if (!a.groups_out.empty()) write_text(a.groups_out, format_groups(dict.groups));
        } else {
            std::ostringstream s;
            s << "t,y,clean\n";
            for (Index i = 0; i < t.size(); ++i) s << num(t(i)) << "," << num(smp.y(i)) << "," << num(smp.clean(i)) << "\n";
            emit(c, s.str());
        }
        return kOk;
    }
    throw ParameterError("unknown simulation '" + a.kind + "' (expected ar1 or twinsine)");
}

struct SpectralArgs
{
    std::vector<double> sigma2 = {1.0};
    int runs = 20;
    std::string tuning = "large_val";
    std::vector<std::string> methods = {"bp", "hard-ridge", "glasso", "g-hard-ridge"};
    std::uint64_t seed = 1;
    int grid_size = 40;
    double min_ratio = 1e-3;
    Index validation_size = 2000;
    Index test_size = 2000;
    int folds = 5;
};

int cmd_spectral(const Common& c, const SpectralArgs& a)
{
    check_format(c);
    std::vector<SpectralSummary> all;
    for (double s2 : a.sigma2) {
        SpectralConfig cfg;
        cfg.spec.sigma2 = s2;
        cfg.spec.seed = a.seed;
        cfg.runs = a.runs;
        cfg.tuning = parse_spectral_tuning(a.tuning);
        cfg.methods.clear();
        for (const auto& m : a.methods) cfg.methods.push_back(parse_spectral_method(m));
        cfg.grid_size = a.grid_size;
        cfg.min_ratio = a.min_ratio;
        cfg.validation_size = a.validation_size;
        cfg.test_size = a.test_size;
        cfg.folds = a.folds;
        cfg.threads = c.threads;
        cfg.solver = solver_options(c);
        auto res = run_spectral_benchmark(cfg);
        all.insert(all.end(), res.begin(), res.end());
    }
    if (c.format == "json") {
        json j = json::array();
        for (const auto& s : all) {
            json r;
            r["method"] = to_string(s.method);
            r["tuning"] = to_string(s.tuning);
            r["sigma2"] = s.sigma2;
            r["err"] = s.err;
            r["jd"] = s.jd;
            r["masking"] = s.masking;
            r["swamping"] = s.swamping;
            r["jd_within_one"] = s.jd_within_one;
            r["masking_within_one"] = s.masking_within_one;
            r["swamping_within_one"] = s.swamping_within_one;
            r["masking_columns"] = s.masking_columns;
            r["swamping_columns"] = s.swamping_columns;
            r["runs"] = json::array();
            for (const auto& run : s.runs) {
                r["runs"].push_back({{"run", run.run},
                                     {"mse_star", run.mse_star},
                                     {"lambda", run.lambda},
                                     {"eta", run.eta},
                                     {"converged", run.converged},
                                     {"selected_bins", run.selected_bins}});
            }
            j.push_back(r);
        }
        emit(c, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "method,tuning,sigma2,err,jd,masking,swamping,jd_within_one,masking_within_one,swamping_within_one,"
             "masking_columns,swamping_columns\n";
        for (const auto& r : all) {
            s << to_string(r.method) << "," << to_string(r.tuning) << "," << summary_num(r.sigma2) << ","
              << summary_num(r.err) << "," << summary_num(r.jd) << "," << summary_num(r.masking) << ","
              << summary_num(r.swamping) << "," << summary_num(r.jd_within_one) << ","
              << summary_num(r.masking_within_one) << "," << summary_num(r.swamping_within_one) << ","
              << summary_num(r.masking_columns) << "," << summary_num(r.swamping_columns) << "\n";
        }
        emit(c, s.str());
    }
    return kOk;
}

struct StudyArgs
{
    Index n = 100;
    Index p = 100;
    double rho = 0.5;
    double b = 1.0;
    std::uint64_t seed = 1;
    int reps = 10;
    std::string family = "bernoulli";
    Index validation_size = 10000;
    Index test_size = 10000;
    int grid_size = 30;
    double min_ratio = 0.02;
};

int cmd_study(const Common& c, const StudyArgs& a)
{
    check_format(c);
    Ar1StudyConfig cfg;
    cfg.design = Ar1Design{a.n, a.p, a.rho, a.b, a.seed};
    cfg.family = parse_family(a.family);
    cfg.reps = a.reps;
    cfg.validation_size = a.validation_size;
    cfg.test_size = a.test_size;
    cfg.grid_size = a.grid_size;
    cfg.min_ratio = a.min_ratio;
    cfg.threads = c.threads;
    cfg.solver = solver_options(c);
    const auto res = run_ar1_study(cfg);
    if (c.format == "json") {
        json j = json::array();
        for (const auto& s : res) {
            json r{{"method", to_string(s.method)},
                   {"sde", s.sde},
                   {"masking", s.masking},
                   {"swamping", s.swamping},
                   {"jd", s.jd}};
            r["reps"] = json::array();
            for (const auto& rep : s.reps) {
                r["reps"].push_back({{"rep", rep.rep},
                                     {"sde", rep.sde},
                                     {"masking", rep.stats.masking},
                                     {"swamping", rep.stats.swamping},
                                     {"joint_detection", rep.stats.joint_detection},
                                     {"lambda", rep.lambda},
                                     {"eta", rep.eta},
                                     {"selected", support_json(rep.selected)}});
            }
            j.push_back(r);
        }
        emit(c, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "method,sde,masking,swamping,jd\n";
        for (const auto& r : res) {
            s << to_string(r.method) << "," << summary_num(r.sde) << "," << summary_num(r.masking) << ","
              << summary_num(r.swamping) << "," << summary_num(r.jd) << "\n";
        }
        emit(c, s.str());
    }
    return kOk;
}

void add_common(CLI::App* sub, Common& c, bool model)
{
    sub->add_option("--format", c.format, "Output format: csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out, "Output file (stdout when omitted)");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    if (!model) return;
    sub->add_option("--data", c.data, "CSV with header; column y is the response")->required();
    sub->add_option("--family", c.family, "gaussian, bernoulli or poisson");
    sub->add_option("--rule", c.rule, "soft, ridge, hard, scad, firm or hard-ridge");
    sub->add_option("--eta", c.eta, "Ridge parameter for ridge and hard-ridge");
    sub->add_option("--scad-a", c.scad_a, "SCAD shape parameter a > 2");
    sub->add_option("--firm-alpha", c.firm_alpha, "Firm shape parameter in (0, 1)");
    sub->add_option("--groups", c.groups, "Group file, one group of 1-based columns per line");
    sub->add_flag("--intercept", c.intercept, "Fit an unpenalized intercept");
    sub->add_flag("--normalize", c.normalize, "Scale columns to unit norm before fitting");
    sub->add_option("--omega", c.omega, "Relaxation factor, 1 or 2")->check(CLI::IsMember({1, 2}));
    sub->add_option("--k0", c.k0, "Design scaling override (lambda refers to X / k0)");
    sub->add_option("--max-iter", c.max_iter, "Iteration cap");
    sub->add_option("--tol", c.tol, "Step tolerance on the scaled coefficients");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Iterative thresholding for penalized GLMs"};
    app.require_subcommand(1);

    Common common;
    double lambda = 0.0;
    bool calibrate_flag = false;
    int grid_size = 50;
    double min_ratio = 1e-3;
    int folds = 5;
    std::uint64_t seed = 1;
    std::string scv_mode = "bic";
    double alpha = 0.8;
    SimArgs sim;
    SpectralArgs spec;
    StudyArgs study;

    auto* fit = app.add_subcommand("fit", "Fit at one lambda (on the scaled design)");
    add_common(fit, common, true);
    fit->add_option("--lambda", lambda, "Threshold parameter")->required();
    fit->add_flag("--calibrate", calibrate_flag, "Also report the unpenalized refit on the support");

    auto* path = app.add_subcommand("path", "Independent fits over a log-spaced lambda grid");
    add_common(path, common, true);
    path->add_option("--grid-size", grid_size, "Number of lambdas");
    path->add_option("--min-ratio", min_ratio, "Smallest lambda over lambda_max");

    auto* tune = app.add_subcommand("tune", "Selective cross-validation over a lambda grid");
    add_common(tune, common, true);
    tune->add_option("--grid-size", grid_size, "Number of lambdas");
    tune->add_option("--min-ratio", min_ratio, "Smallest lambda over lambda_max");
    tune->add_option("--folds", folds, "Cross-validation folds");
    tune->add_option("--seed", seed, "Fold assignment seed");
    tune->add_option("--scv", scv_mode, "Criterion: plain, aic or bic");

    auto* screen = app.add_subcommand("screen", "Proportional screening keeping ceil(alpha n) groups");
    add_common(screen, common, true);
    screen->add_option("--alpha", alpha, "Fraction of n to keep");

    auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset");
    add_common(simulate, common, false);
    simulate->add_option("kind", sim.kind, "ar1 or twinsine")->required();
    simulate->add_option("--n", sim.n, "Observations");
    simulate->add_option("--p", sim.p, "Predictors (ar1)");
    simulate->add_option("--rho", sim.rho, "AR(1) correlation");
    simulate->add_option("--b", sim.b, "Signal strength (ar1)");
    simulate->add_option("--seed", sim.seed, "Seed");
    simulate->add_option("--stream", sim.stream, "Stream within the seed");
    simulate->add_option("--family", sim.family, "Response family (ar1)");
    simulate->add_option("--sigma2", sim.sigma2, "Noise variance (twinsine)");
    simulate->add_flag("--dictionary", sim.dictionary, "Write the sinusoid dictionary as the design (twinsine)");
    simulate->add_option("--groups-out", sim.groups_out, "Group file for the dictionary (twinsine)");

    auto* spectral = app.add_subcommand("spectral", "Two-tone spectral benchmark table");
    add_common(spectral, common, false);
    spectral->add_option("--sigma2", spec.sigma2, "Noise variances")->expected(1, -1);
    spectral->add_option("--runs", spec.runs, "Runs per noise level");
    spectral->add_option("--tuning", spec.tuning, "large_val or scv_bic");
    spectral->add_option("--methods", spec.methods, "bp, glasso, hard-ridge, g-hard-ridge")->expected(1, -1);
    spectral->add_option("--seed", spec.seed, "Seed");
    spectral->add_option("--grid-size", spec.grid_size, "Lambdas per path");
    spectral->add_option("--min-ratio", spec.min_ratio, "Smallest lambda over lambda_max");
    spectral->add_option("--validation-size", spec.validation_size, "Validation points");
    spectral->add_option("--test-size", spec.test_size, "Test points");
    spectral->add_option("--folds", spec.folds, "Folds for scv_bic");
    spectral->add_option("--omega", common.omega, "Relaxation factor, 1 or 2")->check(CLI::IsMember({1, 2}));

    auto* ar1 = app.add_subcommand("study", "AR(1) design study: hard-ridge against SCAD");
    add_common(ar1, common, false);
    ar1->add_option("--n", study.n, "Training observations");
    ar1->add_option("--p", study.p, "Predictors");
    ar1->add_option("--rho", study.rho, "AR(1) correlation");
    ar1->add_option("--b", study.b, "Signal strength");
    ar1->add_option("--seed", study.seed, "Seed");
    ar1->add_option("--reps", study.reps, "Replications");
    ar1->add_option("--family", study.family, "Response family");
    ar1->add_option("--validation-size", study.validation_size, "Validation observations");
    ar1->add_option("--test-size", study.test_size, "Test observations");
    ar1->add_option("--grid-size", study.grid_size, "Lambdas per path");
    ar1->add_option("--min-ratio", study.min_ratio, "Smallest lambda over lambda_max");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*fit) return cmd_fit(common, lambda, calibrate_flag);
        if (*path) return cmd_path(common, grid_size, min_ratio);
        if (*tune) return cmd_tune(common, grid_size, min_ratio, folds, seed, scv_mode);
        if (*screen) return cmd_screen(common, alpha);
        if (*simulate) return cmd_simulate(common, sim);
        if (*spectral) return cmd_spectral(common, spec);
        if (*ar1) return cmd_study(common, study);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolver;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kConfig;
    } catch (const ParameterError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
    return kConfig;
}
