#include <tisp/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <tisp/errors.hpp>

namespace tisp {

double scaled_deviance_error(GlmFamily family, const Vector& beta_hat, const Vector& beta_true,
                             const Matrix& X_test, const Vector& y_test,
                             double intercept_hat, double intercept_true)
{
    const Vector eta_hat = (X_test * beta_hat).array() + intercept_hat;
    const Vector eta_true = (X_test * beta_true).array() + intercept_true;
    const double l_hat = log_likelihood(family, y_test, eta_hat);
    const double l_true = log_likelihood(family, y_test, eta_true);
    if (l_true == 0.0) throw DataError("scaled deviance error is undefined: true log-likelihood is zero");
    return 100.0 * (l_hat / l_true - 1.0);
}

SelectionStats selection_stats(const Support& estimated, const Support& truth, Index p)
{
    auto in_range = [p](Index j) { return j >= 0 && j < p; };
    if (!std::all_of(estimated.begin(), estimated.end(), in_range) ||
        !std::all_of(truth.begin(), truth.end(), in_range)) {
        throw ParameterError("support index outside 1..p");
    }
    std::vector<bool> est(static_cast<std::size_t>(p), false);
    std::vector<bool> rel(static_cast<std::size_t>(p), false);
    for (Index j : estimated) est[static_cast<std::size_t>(j)] = true;
    for (Index j : truth) rel[static_cast<std::size_t>(j)] = true;
    Index relevant = 0, missed = 0, irrelevant = 0, false_alarms = 0;
    for (std::size_t j = 0; j < est.size(); ++j) {
        if (rel[j]) {
            ++relevant;
            if (!est[j]) ++missed;
        } else {
            ++irrelevant;
            if (est[j]) ++false_alarms;
        }
    }
    SelectionStats s;
    s.masking = relevant > 0 ? static_cast<double>(missed) / static_cast<double>(relevant) : 0.0;
    s.swamping = irrelevant > 0 ? static_cast<double>(false_alarms) / static_cast<double>(irrelevant) : 0.0;
    s.joint_detection = missed == 0;
    return s;
}

double trimmed_mean(std::vector<double> values, double trim_fraction)
{
    if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) throw ParameterError("trim fraction must lie in [0, 1)");
    const std::size_t n = values.size();
    const auto cut = static_cast<std::size_t>(std::floor(trim_fraction / 2.0 * static_cast<double>(n)));
    if (n == 0 || 2 * cut >= n) throw ParameterError("trimming leaves no values");
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (std::size_t i = cut; i < n - cut; ++i) sum += values[i];
    return sum / static_cast<double>(n - 2 * cut);
}

double spectral_mse_star(const Vector& y_test, const Matrix& x_test, const Vector& beta_hat,
                         double intercept_hat, double sigma2)
{
    if (y_test.size() == 0) throw ParameterError("MSE* needs test points");
    const Vector r = y_test - (x_test * beta_hat).array().matrix() - Vector::Constant(y_test.size(), intercept_hat);
    return r.squaredNorm() / static_cast<double>(y_test.size()) - sigma2;
}

SelectionStats tone_selection_stats(const std::vector<Index>& selected_bins,
                                    const std::vector<Index>& true_bins,
                                    Index num_bins, Index tolerance_bins)
{
    auto near = [tolerance_bins](Index a, Index b) { return std::abs(a - b) <= tolerance_bins; };
    Index missed = 0;
    for (Index t : true_bins) {
        if (std::none_of(selected_bins.begin(), selected_bins.end(), [&](Index s) { return near(s, t); })) ++missed;
    }
    Index false_alarms = 0;
    for (Index s : selected_bins) {
        if (std::none_of(true_bins.begin(), true_bins.end(), [&](Index t) { return near(s, t); })) ++false_alarms;
    }
    const auto relevant = static_cast<Index>(true_bins.size());
    const Index irrelevant = num_bins - relevant;
    SelectionStats out;
    out.masking = relevant > 0 ? static_cast<double>(missed) / static_cast<double>(relevant) : 0.0;
    out.swamping = irrelevant > 0 ? static_cast<double>(false_alarms) / static_cast<double>(irrelevant) : 0.0;
    out.joint_detection = missed == 0;
    return out;
}

double median(std::vector<double> values)
{
    if (values.empty()) throw ParameterError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values)
{
    if (values.empty()) throw ParameterError("mean of an empty set");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

} // namespace tisp
