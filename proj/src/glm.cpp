#include <tisp/glm.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <tisp/errors.hpp>
#include <tisp/linalg.hpp>

namespace tisp {
namespace {

double softplus(double t)
{
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t)
{
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

void check_sizes(const Vector& y, const Vector& eta)
{
    if (y.size() != eta.size()) {
        std::ostringstream os;
        os << "response has " << y.size() << " entries but linear predictor has " << eta.size();
        throw ParameterError(os.str());
    }
}

} // namespace

std::string to_string(GlmFamily family)
{
    switch (family) {
    case GlmFamily::GaussianIdentity: return "gaussian";
    case GlmFamily::BernoulliLogit: return "bernoulli";
    case GlmFamily::PoissonLog: return "poisson";
    }
    return "unknown";
}

GlmFamily parse_family(const std::string& name)
{
    if (name == "gaussian") return GlmFamily::GaussianIdentity;
    if (name == "bernoulli" || name == "binomial" || name == "logistic") return GlmFamily::BernoulliLogit;
    if (name == "poisson") return GlmFamily::PoissonLog;
    throw ParameterError("unknown family '" + name + "' (expected gaussian, bernoulli or poisson)");
}

double cumulant(GlmFamily family, double t)
{
    switch (family) {
    case GlmFamily::GaussianIdentity: return 0.5 * t * t;
    case GlmFamily::BernoulliLogit: return softplus(t);
    case GlmFamily::PoissonLog: return std::exp(t);
    }
    return 0.0;
}

double mean_function(GlmFamily family, double t)
{
    switch (family) {
    case GlmFamily::GaussianIdentity: return t;
    case GlmFamily::BernoulliLogit: return sigmoid(t);
    case GlmFamily::PoissonLog: return std::exp(t);
    }
    return 0.0;
}

double variance_function(GlmFamily family, double t)
{
    switch (family) {
    case GlmFamily::GaussianIdentity: return 1.0;
    case GlmFamily::BernoulliLogit: {
        const double p = sigmoid(t);
        return p * (1.0 - p);
    }
    case GlmFamily::PoissonLog: return std::exp(t);
    }
    return 0.0;
}

double link(GlmFamily family, double mu)
{
    switch (family) {
    case GlmFamily::GaussianIdentity: return mu;
    case GlmFamily::BernoulliLogit: return std::log(mu / (1.0 - mu));
    case GlmFamily::PoissonLog: return std::log(mu);
    }
    return 0.0;
}

double log_base_measure(GlmFamily family, double y)
{
    switch (family) {
    case GlmFamily::GaussianIdentity: return -0.5 * y * y - 0.5 * std::log(2.0 * std::numbers::pi);
    case GlmFamily::BernoulliLogit: return 0.0;
    case GlmFamily::PoissonLog: return -std::lgamma(y + 1.0);
    }
    return 0.0;
}

MeanVector mean_vector(GlmFamily family, const Vector& eta, double poisson_eta_cap)
{
    MeanVector out;
    out.mu.resize(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
        double t = eta(i);
        if (family == GlmFamily::PoissonLog && t > poisson_eta_cap) {
            t = poisson_eta_cap;
            out.capped = true;
        }
        out.mu(i) = mean_function(family, t);
    }
    return out;
}

void check_support(GlmFamily family, const Vector& y)
{
    for (Index i = 0; i < y.size(); ++i) {
        const double v = y(i);
        bool ok = std::isfinite(v);
        if (ok && family == GlmFamily::BernoulliLogit) ok = (v == 0.0 || v == 1.0);
        if (ok && family == GlmFamily::PoissonLog) ok = (v >= 0.0 && v == std::floor(v));
        if (!ok) {
            std::ostringstream os;
            os << "response value " << v << " at index " << i
               << " is outside the support of the " << to_string(family) << " family";
            throw DataError(os.str());
        }
    }
}

double log_likelihood(GlmFamily family, const Vector& y, const Vector& eta)
{
    check_sizes(y, eta);
    check_support(family, y);
    double sum = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        sum += y(i) * eta(i) - cumulant(family, eta(i)) + log_base_measure(family, y(i));
    }
    return sum;
}

double deviance(GlmFamily family, const Vector& y, const Vector& eta)
{
    check_sizes(y, eta);
    check_support(family, y);
    double saturated = 0.0;
    double fitted = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        const double v = y(i);
        switch (family) {
        case GlmFamily::GaussianIdentity: saturated += 0.5 * v * v; break;
        case GlmFamily::BernoulliLogit: break;
        case GlmFamily::PoissonLog:
            if (v > 0.0) saturated += v * std::log(v) - v;
            break;
        }
        fitted += v * eta(i) - cumulant(family, eta(i));
    }
    return 2.0 * (saturated - fitted);
}

FisherInfo fisher_information(GlmFamily family, const Matrix& X,
                              const Vector& beta, double intercept)
{
    if (X.cols() != beta.size()) {
        std::ostringstream os;
        os << "design has " << X.cols() << " columns but beta has " << beta.size() << " entries";
        throw ParameterError(os.str());
    }
    const Vector eta = (X * beta).array() + intercept;
    Vector w(eta.size());
    for (Index i = 0; i < eta.size(); ++i) w(i) = variance_function(family, eta(i));
    FisherInfo info;
    info.matrix = X.transpose() * w.asDiagonal() * X;
    return info;
}

ScalingBound scaling_bound(GlmFamily family, const Matrix& X,
                           std::span<const ThresholdRule> rules,
                           double poisson_eta_bound)
{
    ScalingBound out;
    out.spectral_norm = spectral_norm(X).norm;
    if (!(out.spectral_norm > 0.0)) throw ParameterError("scaling bound needs a nonzero design");

    out.l_theta = rules.empty() ? 1.0 : 0.0;
    for (const auto& r : rules) out.l_theta = std::max(out.l_theta, curvature_constant(r).l_theta);
    const double budget = std::max(1.0, 2.0 - out.l_theta);

    double sup_variance = 1.0;
    switch (family) {
    case GlmFamily::GaussianIdentity: sup_variance = 1.0; break;
    case GlmFamily::BernoulliLogit: sup_variance = 0.25; break;
    case GlmFamily::PoissonLog:
        sup_variance = std::exp(std::max(poisson_eta_bound, 0.0));
        out.heuristic = true;
        break;
    }
    out.k0 = out.spectral_norm * std::sqrt(sup_variance / budget);
    if (out.heuristic) out.k0 *= kPoissonSafetyFactor;
    return out;
}

} // namespace tisp
