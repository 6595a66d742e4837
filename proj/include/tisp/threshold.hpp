#pragma once

#include <string>
#include <variant>

#include <tisp/types.hpp>

namespace tisp {

/*
 * Threshold rules.
 *
 * Every rule is an odd, nondecreasing, unbounded shrinkage map
 * Theta(t; lambda) with 0 <= Theta(t; lambda) <= t for t >= 0.
 * lambda is the threshold parameter; the shape parameters live in the rule.
 *
 *   Soft        sign(t) max(|t| - lambda, 0)
 *   Ridge       t / (1 + eta)                       (lambda unused)
 *   Hard        t 1{|t| >= lambda}
 *   Scad        soft on |t| <= 2 lambda, linear interpolation up to a lambda,
 *               identity beyond
 *   Firm        0 below alpha lambda, (t - alpha lambda sgn t)/(1 - alpha)
 *               up to lambda, identity beyond
 *   HardRidge   t / (1 + eta) 1{|t| >= lambda}
 */
namespace rule {

struct Soft {};
struct Ridge { double eta = 0.0; };
struct Hard {};
struct Scad { double a = 3.7; };
struct Firm { double alpha = 0.5; };
struct HardRidge { double eta = 0.0; };

} // namespace rule

class ThresholdRule
{
public:
    using Variant = std::variant<rule::Soft, rule::Ridge, rule::Hard,
                                 rule::Scad, rule::Firm, rule::HardRidge>;

    // Throws ParameterError when the shape parameters are out of domain.
    ThresholdRule(Variant v);

    static ThresholdRule soft() { return {rule::Soft{}}; }
    static ThresholdRule ridge(double eta) { return {rule::Ridge{eta}}; }
    static ThresholdRule hard() { return {rule::Hard{}}; }
    static ThresholdRule scad(double a = 3.7) { return {rule::Scad{a}}; }
    static ThresholdRule firm(double alpha) { return {rule::Firm{alpha}}; }
    static ThresholdRule hard_ridge(double eta) { return {rule::HardRidge{eta}}; }

    const Variant& variant() const { return v_; }

    template <class T>
    bool is() const { return std::holds_alternative<T>(v_); }

    // Ridge parameter for Ridge/HardRidge, 0 otherwise.
    double eta() const;

    // "soft", "ridge(0.5)", "scad(3.7)", ...
    std::string name() const;

private:
    Variant v_;
};

double threshold_scalar(const ThresholdRule& rule, double t, double lambda);

// a / ||a|| * Theta(||a||; lambda); zero maps to zero.
Vector threshold_vector(const ThresholdRule& rule,
                        const Eigen::Ref<const Vector>& a,
                        double lambda);

// Minimal-curvature penalty P(|theta|; lambda) in closed form.
double penalty_value(const ThresholdRule& rule, double theta, double lambda);

// Largest t with Theta(t; lambda) <= u, for u >= 0.
double threshold_inverse(const ThresholdRule& rule, double u, double lambda);

/*
 * Three-step construction evaluated numerically: Theta is inverted by
 * bisection on its monotone graph, s(u) = Theta^{-1}(u) - u is tabulated on
 * a uniform u-grid of the given step over [0, |theta|], and integrated with
 * the trapezoid rule. Independent of the closed forms in penalty_value.
 */
double penalty_from_rule_numeric(const ThresholdRule& rule,
                                 double theta,
                                 double lambda,
                                 double grid_step);

// L such that s'(u) >= -L almost everywhere. Lies in [0, 1].
struct CurvatureConstant
{
    double l_theta = 0.0;
};

CurvatureConstant curvature_constant(const ThresholdRule& rule);

// Theta^{-1}(0; lambda): inputs with |t| below this are mapped to zero.
// Zero for Ridge, which never produces exact zeros.
double kill_threshold(const ThresholdRule& rule, double lambda);

} // namespace tisp
