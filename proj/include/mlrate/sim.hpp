#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlrate/data.hpp"
#include "mlrate/estimators.hpp"
#include "mlrate/learners.hpp"
#include "mlrate/numerics.hpp"

namespace mlrate {

// Gauss-Hermite rule (physicists' weight exp(-x^2)), used for the exact
// moments of the simulation design.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;

    static GaussHermite compute(std::size_t n);

    // E[f(Z)] for Z ~ N(0,1).
    double normal_expectation(const std::function<double(double)>& f) const;
};

// b(x) = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5
double friedman_b(std::span<const double> x);

// tau(x) = x1 + log(1 + exp(x2)), overflow-safe.
double friedman_tau(std::span<const double> x);

struct FriedmanDgpConfig {
    std::size_t n = 10000;
    std::size_t d = 100;
    double noise_sd = 25.0;
    double treat_prob = 0.5;
    RandomStream stream{0, 0};
};

// X ~ N(0, I_d), T ~ Bernoulli(treat_prob), Y = b(X) + T tau(X) + noise.
ExperimentDataset generate_friedman(const FriedmanDgpConfig& cfg);

// E[tau(X)] by Gauss-Hermite quadrature; cached.
double true_ate_friedman();

// Var(tau(X)) by quadrature; cached.
double friedman_tau_variance();

// Semiparametric efficiency bound for the ATE under homoskedastic noise:
// noise^2 (1/p + 1/(1-p)) + var_tau.
double efficiency_bound(double noise_sd, double treat_prob, double var_tau);
double efficiency_bound_friedman(double noise_sd = 25.0, double treat_prob = 0.5);

enum class OutcomeFamily { Gaussian, HeavyTailed, CountLike };

// Synthetic A/A panel: a latent user trait drives the outcome in every
// period, giving Corr(y_pre, Y) = rho exactly for the gaussian family.
// Treatment is Bernoulli(0.5) independent of everything; the true ATE is 0.
struct AaPanelConfig {
    std::size_t n = 10000;
    double rho = 0.5;
    std::size_t n_aux_metrics = 3;
    OutcomeFamily family = OutcomeFamily::Gaussian;
    RandomStream stream{0, 0};
};

PanelDataset generate_aa_panel(const AaPanelConfig& cfg);

// One estimator configuration inside a coverage study.
struct MethodSpec {
    enum class Kind { Mlrate, DiffInMeans, Cuped };

    std::string name;
    Kind kind = Kind::DiffInMeans;
    LearnerSpec learner;
    std::size_t k = 2;
    std::optional<double> censor_tau;
    // Interval scale knob for coverage calibration experiments (1 = honest).
    double ci_scale = 1.0;

    static MethodSpec mlrate(std::string name, LearnerSpec learner, std::size_t k = 2);
    static MethodSpec diff_in_means();
    static MethodSpec cuped();
};

struct RepRecord {
    std::size_t rep = 0;
    std::size_t method_index = 0;
    double estimate = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double width = 0.0;
    bool covered = false;
    bool failed = false;
};

struct MethodSummary {
    std::string name;
    std::size_t reps_ok = 0;
    std::size_t failures = 0;
    double coverage = 0.0;
    double coverage_half_width = 0.0;  // 1.96 sqrt(c(1-c)/reps_ok)
    double mean_width = 0.0;
    std::optional<double> mean_relative_width;  // vs the baseline method
    bool within_nominal_band = false;
};

struct CoverageStudyResult {
    std::size_t reps = 0;
    double level = 0.05;
    double true_ate = 0.0;
    std::string baseline;
    bool valid = false;  // false if any method fails more than 1% of reps
    std::vector<MethodSummary> summaries;
    std::vector<RepRecord> records;  // reps x methods, rep-major
};

struct CoverageStudyConfig {
    std::function<PanelDataset(std::uint64_t)> make_rep;  // rep index -> dataset
    double true_ate = 0.0;
    std::vector<MethodSpec> methods;
    std::size_t reps = 100;
    double level = 0.05;
    std::string baseline = "dim";
    unsigned parallelism = 1;
    std::uint64_t master_seed = 0;  // estimator-side streams (fold splits)
};

// Runs every method on every generated repetition. The result is a pure
// function of (master seed, configs); worker count only affects wall time.
CoverageStudyResult run_coverage_study(const CoverageStudyConfig& cfg);

std::function<PanelDataset(std::uint64_t)> friedman_rep_generator(FriedmanDgpConfig base,
                                                                  std::uint64_t master_seed);
std::function<PanelDataset(std::uint64_t)> aa_panel_rep_generator(AaPanelConfig base,
                                                                  std::uint64_t master_seed);

}  // namespace mlrate
