#include "mlrate/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlrate/errors.hpp"

namespace mlrate {

namespace {

struct ArmStats {
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    double mean0 = 0.0;
    double mean1 = 0.0;
    double var0 = 0.0;
    double var1 = 0.0;
    double p_hat = 0.0;
};

// Per-arm means and n-1 variances. Requires at least two rows in each arm.
ArmStats arm_stats(std::span<const double> y, std::span<const int> t) {
    ArmStats s;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (t[i] != 0 && t[i] != 1) {
            throw std::invalid_argument("treatment values must be 0 or 1");
        }
        if (t[i] == 1) {
            ++s.n1;
            s.mean1 += y[i];
        } else {
            ++s.n0;
            s.mean0 += y[i];
        }
    }
    if (s.n0 < 2 || s.n1 < 2) {
        throw std::invalid_argument("each treatment arm needs at least 2 rows");
    }
    s.mean0 /= static_cast<double>(s.n0);
    s.mean1 /= static_cast<double>(s.n1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - (t[i] == 1 ? s.mean1 : s.mean0);
        (t[i] == 1 ? s.var1 : s.var0) += d * d;
    }
    s.var0 /= static_cast<double>(s.n0 - 1);
    s.var1 /= static_cast<double>(s.n1 - 1);
    s.p_hat = static_cast<double>(s.n1) / static_cast<double>(s.n0 + s.n1);
    return s;
}

}  // namespace

double variance_estimator(double var_y_control, double var_y_treat, double p_hat, double var_g,
                          double beta2, double beta3) {
    if (!(p_hat > 0.0 && p_hat < 1.0)) {
        throw std::invalid_argument("variance_estimator: p_hat must lie in (0,1)");
    }
    if (!(var_g >= 0.0) || !(var_y_control >= 0.0) || !(var_y_treat >= 0.0)) {
        throw std::invalid_argument("variance_estimator: variances must be non-negative");
    }
    const double base = var_y_control / (1.0 - p_hat) + var_y_treat / p_hat;
    const double slope = beta2 * p_hat + (beta2 + beta3) * (1.0 - p_hat);
    const double reduction = var_g / (p_hat * (1.0 - p_hat)) * slope * slope;
    return std::max(0.0, base - reduction);
}

std::pair<double, double> confidence_interval(double estimate, double sigma2, std::size_t n,
                                              double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("confidence_interval: level must lie in (0,1)");
    }
    if (!(sigma2 >= 0.0) || n < 1) {
        throw std::invalid_argument("confidence_interval: need sigma2 >= 0 and n >= 1");
    }
    const double half =
        normal_quantile(1.0 - level / 2.0) * std::sqrt(sigma2 / static_cast<double>(n));
    return {estimate - half, estimate + half};
}

AdjustmentFit adjusted_fit(std::span<const double> y, std::span<const int> t,
                           std::span<const double> g) {
    const std::size_t n = y.size();
    if (t.size() != n || g.size() != n || n < 4) {
        throw std::invalid_argument("adjusted_fit: need equal lengths >= 4");
    }
    const auto arms = arm_stats(y, t);

    AdjustmentFit fit;
    fit.n = n;
    fit.p_hat = arms.p_hat;
    fit.var_y_control = arms.var0;
    fit.var_y_treat = arms.var1;
    fit.g_bar = sample_mean(g);
    fit.var_g = sample_variance(g);

    // A g column with (next to) no variation cannot support the adjustment;
    // fall back to the difference in means deterministically.
    const double var_y = sample_variance(y);
    fit.degenerate = fit.var_g < kDegenerateGRelTol * var_y;

    DenseMatrix design(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = static_cast<double>(t[i]);
        design(i, 2) = g[i];
        design(i, 3) = static_cast<double>(t[i]) * g[i];
    }
    const auto ls = least_squares(design, y);
    for (std::size_t j = 0; j < 4; ++j) fit.beta[j] = ls.coefficients[j];
    if (!ls.column_retained[2] || !ls.column_retained[3]) fit.degenerate = true;

    if (fit.degenerate) {
        fit.alpha1 = arms.mean1 - arms.mean0;
        fit.sigma2_hat = variance_estimator(arms.var0, arms.var1, arms.p_hat, 0.0, 0.0, 0.0);
    } else {
        fit.alpha1 = fit.beta[1] + fit.beta[3] * fit.g_bar;
        fit.sigma2_hat = variance_estimator(arms.var0, arms.var1, arms.p_hat, fit.var_g,
                                            fit.beta[2], fit.beta[3]);
    }
    return fit;
}

EstimateReport report_from_adjusted_fit(const std::string& method, const AdjustmentFit& fit,
                                        double level, std::span<const double> y,
                                        std::span<const double> g) {
    EstimateReport report;
    report.method = method;
    report.estimate = fit.alpha1;
    report.ci_level = level;
    report.n = fit.n;
    report.p_hat = fit.p_hat;
    report.sigma2_hat = fit.sigma2_hat;
    report.degenerate = fit.degenerate;
    report.var_g = fit.var_g;
    report.corr_y_g = sample_correlation(y, g);
    report.std_error = std::sqrt(fit.sigma2_hat / static_cast<double>(fit.n));
    const auto [lo, hi] = confidence_interval(fit.alpha1, fit.sigma2_hat, fit.n, level);
    report.ci_lower = lo;
    report.ci_upper = hi;
    return report;
}

EstimateReport adjusted_estimate(std::span<const double> y, std::span<const int> t,
                                 std::span<const double> g, double level,
                                 const std::string& method) {
    const auto fit = adjusted_fit(y, t, g);
    return report_from_adjusted_fit(method, fit, level, y, g);
}

EstimateReport mlrate_estimate_from_crossfit(const ExperimentDataset& ds,
                                             const CrossFitResult& crossfit, double level,
                                             std::optional<double> censor_tau,
                                             const std::string& method) {
    if (crossfit.predictions.size() != ds.n) {
        throw std::invalid_argument("mlrate_estimate: cross-fit size mismatch");
    }
    if (censor_tau.has_value()) {
        const auto censored = censor_predictions(crossfit.predictions, *censor_tau);
        return adjusted_estimate(ds.outcome, ds.treatment, censored, level, method);
    }
    return adjusted_estimate(ds.outcome, ds.treatment, crossfit.predictions, level, method);
}

EstimateReport mlrate_estimate(const ExperimentDataset& ds, const LearnerSpec& spec,
                               std::size_t k, RandomStream& stream, double level,
                               std::optional<double> censor_tau) {
    const auto crossfit = cross_fit(ds, spec, k, stream);
    return mlrate_estimate_from_crossfit(ds, crossfit, level, censor_tau, "mlrate");
}

EstimateReport diff_in_means(std::span<const double> y, std::span<const int> t, double level) {
    if (y.size() != t.size()) {
        throw std::invalid_argument("diff_in_means: length mismatch");
    }
    const auto arms = arm_stats(y, t);
    EstimateReport report;
    report.method = "dim";
    report.estimate = arms.mean1 - arms.mean0;
    report.ci_level = level;
    report.n = y.size();
    report.p_hat = arms.p_hat;
    // Identical expression (and bits) to the adjusted estimator's first two
    // variance terms, so non-inferiority holds exactly.
    report.sigma2_hat = variance_estimator(arms.var0, arms.var1, arms.p_hat, 0.0, 0.0, 0.0);
    report.std_error = std::sqrt(report.sigma2_hat / static_cast<double>(report.n));
    const auto [lo, hi] = confidence_interval(report.estimate, report.sigma2_hat, report.n, level);
    report.ci_lower = lo;
    report.ci_upper = hi;
    return report;
}

EstimateReport diff_in_diff(std::span<const double> y, std::span<const int> t,
                            std::span<const double> g, double level) {
    if (y.size() != t.size() || y.size() != g.size()) {
        throw std::invalid_argument("diff_in_diff: length mismatch");
    }
    std::vector<double> transformed(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) transformed[i] = y[i] - g[i];
    auto report = diff_in_means(transformed, t, level);
    report.method = "dind";
    return report;
}

EstimateReport cuped_estimate(const PanelDataset& panel, double level) {
    if (panel.y_pre.size() != panel.data.n) {
        throw SchemaError("cuped_estimate: panel lacks a pre-period outcome column");
    }
    auto report = adjusted_estimate(panel.data.outcome, panel.data.treatment, panel.y_pre, level,
                                    "cuped");
    return report;
}

std::vector<double> censor_predictions(std::span<const double> g, double tau) {
    if (!std::isfinite(tau)) {
        throw std::invalid_argument("censor_predictions: tau must be finite");
    }
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] >= tau ? g[i] : 0.0;
    return out;
}

EfficiencyRatios relative_efficiency(const EstimateReport& a, const EstimateReport& b) {
    if (a.n != b.n || a.ci_level != b.ci_level) {
        throw std::invalid_argument("relative_efficiency: reports must share n and level");
    }
    const double width_a = a.ci_upper - a.ci_lower;
    const double width_b = b.ci_upper - b.ci_lower;
    if (width_b == 0.0 || b.sigma2_hat == 0.0) {
        throw std::invalid_argument("relative_efficiency: zero-width baseline interval");
    }
    return {a.sigma2_hat / b.sigma2_hat, width_a / width_b};
}

}  // namespace mlrate
