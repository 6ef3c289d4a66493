#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlrate/crossfit.hpp"
#include "mlrate/data.hpp"
#include "mlrate/learners.hpp"
#include "mlrate/numerics.hpp"

namespace mlrate {

// Coefficients and moments from regressing Y on (1, T, g, T*g). alpha1 is the
// treatment-effect estimate beta1 + beta3 * g_bar. When the g column carries
// no usable variation the fit falls back to the difference in means and the
// degenerate flag is set.
struct AdjustmentFit {
    std::array<double, 4> beta{};
    double alpha1 = 0.0;
    double g_bar = 0.0;
    double p_hat = 0.0;
    double var_g = 0.0;
    double var_y_control = 0.0;
    double var_y_treat = 0.0;
    double sigma2_hat = 0.0;
    std::size_t n = 0;
    bool degenerate = false;
};

// One estimator's output: point estimate, normal-theory interval, and
// diagnostics. The CLI's unit of reporting.
struct EstimateReport {
    std::string method;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_level = 0.05;  // the "a" in 100(1-a)% intervals
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    std::size_t n = 0;
    double p_hat = 0.0;
    double sigma2_hat = 0.0;
    bool degenerate = false;
    double corr_y_g = 0.0;
    double var_g = 0.0;
};

// Relative threshold on var(g)/var(Y) below which the adjustment column is
// treated as constant and the fit degenerates to the difference in means.
inline constexpr double kDegenerateGRelTol = 1e-12;

AdjustmentFit adjusted_fit(std::span<const double> y, std::span<const int> t,
                           std::span<const double> g);

// Plug-in asymptotic variance: var(Y|T=0)/(1-p) + var(Y|T=1)/p minus the
// adjustment gain [var(g)/(p(1-p))] * [beta2*p + (beta2+beta3)*(1-p)]^2,
// floored at zero.
double variance_estimator(double var_y_control, double var_y_treat, double p_hat, double var_g,
                          double beta2, double beta3);

// estimate +/- z_{1-a/2} * sqrt(sigma2/n)
std::pair<double, double> confidence_interval(double estimate, double sigma2, std::size_t n,
                                              double level);

EstimateReport report_from_adjusted_fit(const std::string& method, const AdjustmentFit& fit,
                                        double level, std::span<const double> y,
                                        std::span<const double> g);

// Cross-fit, optionally censor the predictions, adjust, and report.
EstimateReport mlrate_estimate(const ExperimentDataset& ds, const LearnerSpec& spec,
                               std::size_t k, RandomStream& stream, double level = 0.05,
                               std::optional<double> censor_tau = std::nullopt);

// Same, reusing an existing cross-fit result.
EstimateReport mlrate_estimate_from_crossfit(const ExperimentDataset& ds,
                                             const CrossFitResult& crossfit, double level = 0.05,
                                             std::optional<double> censor_tau = std::nullopt,
                                             const std::string& method = "mlrate");

// Regression adjustment with a precomputed covariate column.
EstimateReport adjusted_estimate(std::span<const double> y, std::span<const int> t,
                                 std::span<const double> g, double level = 0.05,
                                 const std::string& method = "adjusted");

EstimateReport diff_in_means(std::span<const double> y, std::span<const int> t,
                             double level = 0.05);

// Difference in means applied to Y - g.
EstimateReport diff_in_diff(std::span<const double> y, std::span<const int> t,
                            std::span<const double> g, double level = 0.05);

// Univariate regression adjustment on the pre-period outcome.
EstimateReport cuped_estimate(const PanelDataset& panel, double level = 0.05);

// Hard thresholding: u * 1{u >= tau}.
std::vector<double> censor_predictions(std::span<const double> g, double tau);

struct EfficiencyRatios {
    double variance_ratio = 0.0;
    double width_ratio = 0.0;
};

// Ratios of sigma2 and of CI width, a over b. Reports must share n and level.
EfficiencyRatios relative_efficiency(const EstimateReport& a, const EstimateReport& b);

}  // namespace mlrate
