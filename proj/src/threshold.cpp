#include <tisp/threshold.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <tisp/errors.hpp>

namespace tisp {
namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sgn(double t) { return (t > 0) - (t < 0); }

// Hard penalty, which also shapes the firm penalty.
double hard_penalty(double u, double lambda)
{
    return u < lambda ? lambda * u - 0.5 * u * u : 0.5 * lambda * lambda;
}

void check_lambda(double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("threshold parameter lambda must be finite and >= 0");
    }
}

} // namespace

ThresholdRule::ThresholdRule(Variant v)
    : v_(std::move(v))
{
    std::visit(overloaded{
        [](const rule::Soft&) {},
        [](const rule::Hard&) {},
        [](const rule::Ridge& r) {
            if (!(r.eta >= 0.0) || !std::isfinite(r.eta))
                throw ParameterError("ridge rule requires eta >= 0");
        },
        [](const rule::HardRidge& r) {
            if (!(r.eta >= 0.0) || !std::isfinite(r.eta))
                throw ParameterError("hard-ridge rule requires eta >= 0");
        },
        [](const rule::Scad& r) {
            if (!(r.a > 2.0) || !std::isfinite(r.a))
                throw ParameterError("SCAD rule requires a > 2");
        },
        [](const rule::Firm& r) {
            if (!(r.alpha >= 0.0 && r.alpha <= 1.0))
                throw ParameterError("firm rule requires 0 <= alpha <= 1");
        },
    }, v_);
}

double ThresholdRule::eta() const
{
    if (auto r = std::get_if<rule::Ridge>(&v_)) return r->eta;
    if (auto r = std::get_if<rule::HardRidge>(&v_)) return r->eta;
    return 0.0;
}

std::string ThresholdRule::name() const
{
    std::ostringstream os;
    std::visit(overloaded{
        [&](const rule::Soft&) { os << "soft"; },
        [&](const rule::Hard&) { os << "hard"; },
        [&](const rule::Ridge& r) { os << "ridge(" << r.eta << ")"; },
        [&](const rule::HardRidge& r) { os << "hard_ridge(" << r.eta << ")"; },
        [&](const rule::Scad& r) { os << "scad(" << r.a << ")"; },
        [&](const rule::Firm& r) { os << "firm(" << r.alpha << ")"; },
    }, v_);
    return os.str();
}

double threshold_scalar(const ThresholdRule& rule, double t, double lambda)
{
    check_lambda(lambda);
    const double u = std::abs(t);
    const double s = sgn(t);
    return std::visit(overloaded{
        [&](const rule::Soft&) {
            return s * std::max(u - lambda, 0.0);
        },
        [&](const rule::Ridge& r) {
            return t / (1.0 + r.eta);
        },
        [&](const rule::Hard&) {
            return u >= lambda ? t : 0.0;
        },
        [&](const rule::HardRidge& r) {
            return u >= lambda ? t / (1.0 + r.eta) : 0.0;
        },
        [&](const rule::Scad& r) {
            if (u <= 2.0 * lambda) return s * std::max(u - lambda, 0.0);
            if (u <= r.a * lambda) return s * ((r.a - 1.0) * u - r.a * lambda) / (r.a - 2.0);
            return t;
        },
        [&](const rule::Firm& r) {
            if (u < r.alpha * lambda) return 0.0;
            if (u < lambda) return s * (u - r.alpha * lambda) / (1.0 - r.alpha);
            return t;
        },
    }, rule.variant());
}

Vector threshold_vector(const ThresholdRule& rule,
                        const Eigen::Ref<const Vector>& a,
                        double lambda)
{
    const double norm = a.norm();
    if (norm == 0.0) {
        check_lambda(lambda);
        return Vector::Zero(a.size());
    }
    return a * (threshold_scalar(rule, norm, lambda) / norm);
}

double penalty_value(const ThresholdRule& rule, double theta, double lambda)
{
    check_lambda(lambda);
    const double u = std::abs(theta);
    return std::visit(overloaded{
        [&](const rule::Soft&) { return lambda * u; },
        [&](const rule::Ridge& r) { return 0.5 * r.eta * u * u; },
        [&](const rule::Hard&) { return hard_penalty(u, lambda); },
        [&](const rule::HardRidge& r) {
            const double knot = lambda / (1.0 + r.eta);
            if (u < knot) return lambda * u - 0.5 * u * u;
            return 0.5 * r.eta * u * u + 0.5 * lambda * lambda / (1.0 + r.eta);
        },
        [&](const rule::Scad& r) {
            if (u <= lambda) return lambda * u;
            if (u <= r.a * lambda)
                return (2.0 * r.a * lambda * u - u * u - lambda * lambda) / (2.0 * (r.a - 1.0));
            return 0.5 * (r.a + 1.0) * lambda * lambda;
        },
        [&](const rule::Firm& r) { return r.alpha * hard_penalty(u, lambda); },
    }, rule.variant());
}

double threshold_inverse(const ThresholdRule& rule, double u, double lambda)
{
    check_lambda(lambda);
    // Theta(t) <= t, so every t <= u is feasible.
    double lo = u;
    double hi = std::max({2.0 * u, 2.0 * lambda, 1.0});
    while (threshold_scalar(rule, hi, lambda) <= u) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (threshold_scalar(rule, mid, lambda) <= u) lo = mid;
        else hi = mid;
    }
    return lo;
}

double penalty_from_rule_numeric(const ThresholdRule& rule,
                                 double theta,
                                 double lambda,
                                 double grid_step)
{
    if (!(grid_step > 0.0)) throw ParameterError("grid_step must be positive");
    const double end = std::abs(theta);
    if (end == 0.0) return 0.0;
    const auto cells = static_cast<long>(std::ceil(end / grid_step));
    const double h = end / static_cast<double>(cells);
    auto s = [&](double u) { return threshold_inverse(rule, u, lambda) - u; };
    double sum = 0.5 * (s(0.0) + s(end));
    for (long i = 1; i < cells; ++i) sum += s(h * static_cast<double>(i));
    return sum * h;
}

CurvatureConstant curvature_constant(const ThresholdRule& rule)
{
    return std::visit(overloaded{
        [](const rule::Soft&) { return CurvatureConstant{0.0}; },
        [](const rule::Ridge&) { return CurvatureConstant{0.0}; },
        [](const rule::Hard&) { return CurvatureConstant{1.0}; },
        [](const rule::HardRidge&) { return CurvatureConstant{1.0}; },
        [](const rule::Scad& r) { return CurvatureConstant{1.0 / (r.a - 1.0)}; },
        [](const rule::Firm& r) { return CurvatureConstant{r.alpha}; },
    }, rule.variant());
}

double kill_threshold(const ThresholdRule& rule, double lambda)
{
    check_lambda(lambda);
    return std::visit(overloaded{
        [&](const rule::Ridge&) { return 0.0; },
        [&](const rule::Firm& r) { return r.alpha * lambda; },
        [&](const auto&) { return lambda; },
    }, rule.variant());
}

} // namespace tisp
