#include <tisp/simulation.hpp>

#include <cmath>

#include <tisp/errors.hpp>

namespace tisp {
namespace {

// Inversion by sequential search; fine for the moderate means used here.
double sample_poisson(double mean, CounterRng& rng)
{
    if (mean > 500.0) {
        // Normal approximation far in the tail of what the simulations use.
        return std::max(0.0, std::round(mean + std::sqrt(mean) * rng.normal()));
    }
    const double u = rng.uniform();
    double k = 0.0;
    double prob = std::exp(-mean);
    double cdf = prob;
    while (u > cdf && prob > 0.0) {
        k += 1.0;
        prob *= mean / k;
        cdf += prob;
    }
    return k;
}

} // namespace

Vector ar1_true_beta(Index p, double b)
{
    Vector beta = Vector::Zero(p);
    const Index pos[] = {0, 2, 3};
    for (Index j : pos) {
        if (j < p) beta(j) = b;
    }
    return beta;
}

Matrix ar1_loading_matrix(Index p, double rho)
{
    if (!(rho >= 0.0 && rho < 1.0)) throw ParameterError("AR(1) correlation must lie in [0, 1)");
    const double c = std::sqrt(1.0 - rho * rho);
    Matrix L = Matrix::Zero(p, p);
    for (Index j = 0; j < p; ++j) {
        if (j == 0) {
            L(0, 0) = 1.0;
            continue;
        }
        L.row(j) = rho * L.row(j - 1);
        L(j, j) = c;
    }
    return L;
}

double sample_response(GlmFamily family, double eta, CounterRng& rng)
{
    switch (family) {
    case GlmFamily::GaussianIdentity: return eta + rng.normal();
    case GlmFamily::BernoulliLogit: return rng.uniform() < mean_function(family, eta) ? 1.0 : 0.0;
    case GlmFamily::PoissonLog: return sample_poisson(mean_function(family, std::min(eta, kPoissonEtaCap)), rng);
    }
    return 0.0;
}

GlmDataset gen_ar1_glm(const Ar1Design& design, GlmFamily family, Index n_obs, std::uint64_t stream)
{
    if (design.p < 1 || n_obs < 1) throw ParameterError("AR(1) design needs n >= 1 and p >= 1");
    if (!(design.rho >= 0.0 && design.rho < 1.0)) throw ParameterError("AR(1) correlation must lie in [0, 1)");
    GlmDataset out;
    out.beta_true = ar1_true_beta(design.p, design.b);
    out.X.resize(n_obs, design.p);
    out.y.resize(n_obs);

    CounterRng base(design.seed, stream);
    CounterRng xr = base.split(1);
    CounterRng yr = base.split(2);
    const double c = std::sqrt(1.0 - design.rho * design.rho);
    for (Index i = 0; i < n_obs; ++i) {
        double prev = xr.normal();
        out.X(i, 0) = prev;
        for (Index j = 1; j < design.p; ++j) {
            prev = design.rho * prev + c * xr.normal();
            out.X(i, j) = prev;
        }
    }
    const Vector eta = out.X * out.beta_true;
    for (Index i = 0; i < n_obs; ++i) out.y(i) = sample_response(family, eta(i), yr);
    return out;
}

Vector uniform_time_points(Index n)
{
    Vector t(n);
    for (Index i = 0; i < n; ++i) t(i) = static_cast<double>(i + 1);
    return t;
}

TwinSineSample gen_twinsine(const TwinSineSpec& spec, const Vector& time_points, std::uint64_t stream)
{
    if (!(spec.sigma2 >= 0.0)) throw ParameterError("noise variance must be nonnegative");
    TwinSineSample out;
    out.clean.resize(time_points.size());
    const double two_pi = 2.0 * std::numbers::pi;
    for (Index i = 0; i < time_points.size(); ++i) {
        const double t = time_points(i);
        out.clean(i) = spec.a1 * std::cos(two_pi * spec.f1 * t + spec.phi1) +
                       spec.a2 * std::cos(two_pi * spec.f2 * t + spec.phi2);
    }
    out.y = out.clean;
    if (spec.sigma2 > 0.0) {
        CounterRng rng(spec.seed, stream);
        const double sd = std::sqrt(spec.sigma2);
        for (Index i = 0; i < out.y.size(); ++i) out.y(i) += sd * rng.normal();
    }
    return out;
}

double twinsine_snr_db(const TwinSineSpec& spec)
{
    if (!(spec.sigma2 > 0.0)) throw ParameterError("SNR needs a positive noise variance");
    return 10.0 * std::log10((spec.a1 * spec.a1 + spec.a2 * spec.a2) / (2.0 * spec.sigma2));
}

Dictionary build_dictionary(const Vector& time_points, Index K, double f_max)
{
    if (K < 1) throw ParameterError("dictionary needs K >= 1");
    if (!(f_max > 0.0)) throw ParameterError("f_max must be positive");
    const Index n = time_points.size();
    const double two_pi = 2.0 * std::numbers::pi;

    Dictionary d;
    d.K = K;
    d.f_max = f_max;
    double last_sine = 0.0;
    for (Index i = 0; i < n; ++i) {
        last_sine = std::max(last_sine, std::abs(std::sin(two_pi * time_points(i) * f_max)));
    }
    d.last_sine_dropped = last_sine < 1e-9;
    const Index sines = d.last_sine_dropped ? K - 1 : K;
    const Index p = K + sines;

    d.X.resize(n, p);
    d.frequency.resize(p);
    d.bin.resize(static_cast<std::size_t>(p));
    d.is_sine.resize(static_cast<std::size_t>(p));
    d.groups.blocks.resize(static_cast<std::size_t>(K));
    d.group_bin.resize(static_cast<std::size_t>(K));
    for (Index k = 1; k <= K; ++k) {
        const double f = f_max * static_cast<double>(k) / static_cast<double>(K);
        const Index c = k - 1;
        for (Index i = 0; i < n; ++i) d.X(i, c) = std::cos(two_pi * time_points(i) * f);
        d.frequency(c) = f;
        d.bin[static_cast<std::size_t>(c)] = k;
        d.is_sine[static_cast<std::size_t>(c)] = false;
        d.groups.blocks[static_cast<std::size_t>(c)].push_back(c);
        d.group_bin[static_cast<std::size_t>(c)] = k;
        if (k <= sines) {
            const Index s = K + k - 1;
            for (Index i = 0; i < n; ++i) d.X(i, s) = std::sin(two_pi * time_points(i) * f);
            d.frequency(s) = f;
            d.bin[static_cast<std::size_t>(s)] = k;
            d.is_sine[static_cast<std::size_t>(s)] = true;
            d.groups.blocks[static_cast<std::size_t>(c)].push_back(s);
        }
    }
    return d;
}

Matrix dictionary_atoms(const Dictionary& dict, const Vector& time_points)
{
    const double two_pi = 2.0 * std::numbers::pi;
    Matrix X(time_points.size(), dict.X.cols());
    for (Index j = 0; j < dict.X.cols(); ++j) {
        const double f = dict.frequency(j);
        for (Index i = 0; i < time_points.size(); ++i) {
            const double arg = two_pi * time_points(i) * f;
            X(i, j) = dict.is_sine[static_cast<std::size_t>(j)] ? std::sin(arg) : std::cos(arg);
        }
    }
    return X;
}

} // namespace tisp
