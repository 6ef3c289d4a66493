#include "mlrate/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace mlrate {

GaussHermite GaussHermite::compute(std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("GaussHermite: need at least 2 nodes");
    }
    GaussHermite rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    const double pim4 = 0.7511255444649425;  // pi^(-1/4)
    const std::size_t m = (n + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        // Stroud-Secrest style initial guesses, then Newton on the
        // orthonormal Hermite recurrence.
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 3e-14) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

double GaussHermite::normal_expectation(const std::function<double(double)>& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        sum += weights[i] * f(std::numbers::sqrt2 * nodes[i]);
    }
    return sum / std::sqrt(std::numbers::pi);
}

namespace {

double softplus(double v) {
    return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

}  // namespace

double friedman_b(std::span<const double> x) {
    if (x.size() < 5) {
        throw std::invalid_argument("friedman_b: need at least 5 covariates");
    }
    const double q = x[2] - 0.5;
    return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * q * q + 10.0 * x[3] +
           5.0 * x[4];
}

double friedman_tau(std::span<const double> x) {
    if (x.size() < 2) {
        throw std::invalid_argument("friedman_tau: need at least 2 covariates");
    }
    return x[0] + softplus(x[1]);
}

ExperimentDataset generate_friedman(const FriedmanDgpConfig& cfg) {
    if (cfg.d < 5) {
        throw std::invalid_argument("generate_friedman: need d >= 5");
    }
    if (!(cfg.noise_sd >= 0.0) || !(cfg.treat_prob >= 0.0 && cfg.treat_prob <= 1.0)) {
        throw std::invalid_argument("generate_friedman: invalid noise or treatment probability");
    }
    RandomStream stream = cfg.stream;

    ExperimentDataset ds;
    ds.n = cfg.n;
    ds.covariates = DenseMatrix(cfg.n, cfg.d);
    ds.column_names.reserve(cfg.d);
    for (std::size_t j = 0; j < cfg.d; ++j) ds.column_names.push_back("x" + std::to_string(j + 1));

    for (std::size_t i = 0; i < cfg.n; ++i) {
        auto row = ds.covariates.row(i);
        for (auto& v : row) v = stream.normal();
    }
    ds.treatment = stream.bernoullis(cfg.treat_prob, cfg.n);
    ds.outcome.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const auto row = ds.covariates.row(i);
        double y = friedman_b(row);
        if (ds.treatment[i] == 1) y += friedman_tau(row);
        if (cfg.noise_sd > 0.0) y += cfg.noise_sd * stream.normal();
        ds.outcome[i] = y;
    }
    return ds;
}

namespace {

const GaussHermite& quadrature_rule() {
    static const GaussHermite rule = GaussHermite::compute(64);
    return rule;
}

}  // namespace

double true_ate_friedman() {
    // E[tau(X)] = E[X1] + E[softplus(X2)] = E[softplus(Z)].
    static const double value = quadrature_rule().normal_expectation(softplus);
    return value;
}

double friedman_tau_variance() {
    static const double value = [] {
        const auto& rule = quadrature_rule();
        const double m = rule.normal_expectation(softplus);
        const double m2 = rule.normal_expectation([](double z) {
            const double s = softplus(z);
            return s * s;
        });
        return 1.0 + (m2 - m * m);  // Var(X1) + Var(softplus(X2))
    }();
    return value;
}

double efficiency_bound(double noise_sd, double treat_prob, double var_tau) {
    if (!(treat_prob > 0.0 && treat_prob < 1.0) || !(noise_sd >= 0.0) || !(var_tau >= 0.0)) {
        throw std::invalid_argument("efficiency_bound: invalid parameters");
    }
    return noise_sd * noise_sd * (1.0 / treat_prob + 1.0 / (1.0 - treat_prob)) + var_tau;
}

double efficiency_bound_friedman(double noise_sd, double treat_prob) {
    return efficiency_bound(noise_sd, treat_prob, friedman_tau_variance());
}

namespace {

// Unit-variance shock for the panel families.
double panel_shock(RandomStream& stream, OutcomeFamily family) {
    if (family == OutcomeFamily::HeavyTailed) {
        // Student t(5), scaled to unit variance.
        const double z = stream.normal();
        double chi2 = 0.0;
        for (int j = 0; j < 5; ++j) {
            const double w = stream.normal();
            chi2 += w * w;
        }
        return z / std::sqrt(chi2 / 5.0) * std::sqrt(3.0 / 5.0);
    }
    return stream.normal();
}

std::size_t poisson_draw(RandomStream& stream, double lambda) {
    const double limit = std::exp(-lambda);
    std::size_t k = 0;
    double prod = 1.0;
    for (;;) {
        prod *= stream.uniform();
        if (prod <= limit) return k;
        ++k;
    }
}

double aux_signal(std::size_t metric, double u) {
    switch (metric % 3) {
        case 0: return softplus(u);
        case 1: return u * u;
        default: return std::abs(u);
    }
}

}  // namespace

PanelDataset generate_aa_panel(const AaPanelConfig& cfg) {
    if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) {
        throw std::invalid_argument("generate_aa_panel: rho must lie in [0,1)");
    }
    if (cfg.n < 1) {
        throw std::invalid_argument("generate_aa_panel: need n >= 1");
    }
    RandomStream stream = cfg.stream;
    const std::size_t n = cfg.n;
    const std::size_t aux = cfg.n_aux_metrics;
    const double a = std::sqrt(cfg.rho);
    const double b = std::sqrt(1.0 - cfg.rho);

    std::vector<double> trait(n);
    for (auto& v : trait) v = panel_shock(stream, cfg.family);

    // Outcomes for t-2, t-1 and the current period share the trait component.
    std::vector<std::vector<double>> y(3, std::vector<double>(n));
    for (auto& period : y) {
        for (std::size_t i = 0; i < n; ++i) {
            const double latent = a * trait[i] + b * panel_shock(stream, cfg.family);
            period[i] = latent;
        }
    }
    if (cfg.family == OutcomeFamily::CountLike) {
        for (auto& period : y) {
            for (std::size_t i = 0; i < n; ++i) {
                period[i] = static_cast<double>(
                    poisson_draw(stream, std::exp(0.4 * period[i])));
            }
        }
    }

    PanelDataset panel;
    panel.data.n = n;
    panel.data.outcome = y[2];
    panel.y_pre = y[1];

    DenseMatrix tm1(n, 1 + aux), tm2(n, 1 + aux);
    for (std::size_t i = 0; i < n; ++i) {
        tm2(i, 0) = y[0][i];
        tm1(i, 0) = y[1][i];
    }
    panel.pre_feature_names.push_back("y_pre");
    for (std::size_t j = 0; j < aux; ++j) {
        panel.pre_feature_names.push_back("aux" + std::to_string(j + 1));
        for (std::size_t i = 0; i < n; ++i) {
            tm2(i, 1 + j) = aux_signal(j, trait[i]) + 0.5 * stream.normal();
            tm1(i, 1 + j) = aux_signal(j, trait[i]) + 0.5 * stream.normal();
        }
    }
    panel.data.covariates = tm1;
    panel.data.column_names = panel.pre_feature_names;
    panel.pre_features = std::move(tm1);
    panel.pre_features_lag = std::move(tm2);

    panel.data.treatment = stream.bernoullis(0.5, n);
    return panel;
}

MethodSpec MethodSpec::mlrate(std::string name, LearnerSpec learner, std::size_t k) {
    MethodSpec m;
    m.name = std::move(name);
    m.kind = Kind::Mlrate;
    m.learner = std::move(learner);
    m.k = k;
    return m;
}

MethodSpec MethodSpec::diff_in_means() {
    MethodSpec m;
    m.name = "dim";
    m.kind = Kind::DiffInMeans;
    return m;
}

MethodSpec MethodSpec::cuped() {
    MethodSpec m;
    m.name = "cuped";
    m.kind = Kind::Cuped;
    return m;
}

namespace {

EstimateReport run_method(const MethodSpec& method, const PanelDataset& panel, double level,
                          std::uint64_t master_seed, std::size_t method_index,
                          std::uint64_t rep) {
    switch (method.kind) {
        case MethodSpec::Kind::Mlrate: {
            RandomStream stream(master_seed ^ ((method_index + 1) * 0x9E3779B97F4A7C15ULL), rep);
            return mlrate_estimate(panel.data, method.learner, method.k, stream, level,
                                   method.censor_tau);
        }
        case MethodSpec::Kind::DiffInMeans:
            return diff_in_means(panel.data.outcome, panel.data.treatment, level);
        case MethodSpec::Kind::Cuped:
            return cuped_estimate(panel, level);
    }
    throw std::invalid_argument("run_method: unknown method kind");
}

}  // namespace

CoverageStudyResult run_coverage_study(const CoverageStudyConfig& cfg) {
    if (cfg.reps < 1 || cfg.methods.empty() || !cfg.make_rep) {
        throw std::invalid_argument("run_coverage_study: need reps >= 1 and at least one method");
    }
    const std::size_t n_methods = cfg.methods.size();

    CoverageStudyResult result;
    result.reps = cfg.reps;
    result.level = cfg.level;
    result.true_ate = cfg.true_ate;
    result.baseline = cfg.baseline;
    result.records.assign(cfg.reps * n_methods, RepRecord{});

    const auto run_rep = [&](std::uint64_t rep) {
        const PanelDataset panel = cfg.make_rep(rep);
        for (std::size_t m = 0; m < n_methods; ++m) {
            RepRecord& record = result.records[rep * n_methods + m];
            record.rep = rep;
            record.method_index = m;
            try {
                const auto report =
                    run_method(cfg.methods[m], panel, cfg.level, cfg.master_seed, m, rep);
                const double half =
                    (report.ci_upper - report.ci_lower) / 2.0 * cfg.methods[m].ci_scale;
                record.estimate = report.estimate;
                record.ci_lower = report.estimate - half;
                record.ci_upper = report.estimate + half;
                record.width = 2.0 * half;
                record.covered =
                    record.ci_lower <= cfg.true_ate && cfg.true_ate <= record.ci_upper;
            } catch (const std::exception&) {
                record.failed = true;
            }
        }
    };

    unsigned workers = std::max(1u, cfg.parallelism);
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, cfg.reps));
    if (workers == 1) {
        for (std::uint64_t rep = 0; rep < cfg.reps; ++rep) run_rep(rep);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::uint64_t rep = w; rep < cfg.reps; rep += workers) run_rep(rep);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Aggregate in method/rep order; sums only, so worker count is irrelevant.
    std::size_t baseline_index = n_methods;
    for (std::size_t m = 0; m < n_methods; ++m) {
        if (cfg.methods[m].name == cfg.baseline) baseline_index = m;
    }

    result.valid = true;
    const double nominal = 1.0 - cfg.level;
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodSummary summary;
        summary.name = cfg.methods[m].name;
        double width_sum = 0.0, ratio_sum = 0.0;
        std::size_t covered = 0, ratio_count = 0;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            const auto& record = result.records[rep * n_methods + m];
            if (record.failed) {
                ++summary.failures;
                continue;
            }
            ++summary.reps_ok;
            covered += record.covered ? 1 : 0;
            width_sum += record.width;
            if (baseline_index < n_methods) {
                const auto& base = result.records[rep * n_methods + baseline_index];
                if (!base.failed && base.width > 0.0) {
                    ratio_sum += record.width / base.width;
                    ++ratio_count;
                }
            }
        }
        if (summary.reps_ok > 0) {
            summary.coverage = static_cast<double>(covered) / summary.reps_ok;
            summary.coverage_half_width =
                1.96 * std::sqrt(summary.coverage * (1.0 - summary.coverage) / summary.reps_ok);
            summary.mean_width = width_sum / summary.reps_ok;
            summary.within_nominal_band =
                std::abs(summary.coverage - nominal) <=
                3.0 * std::sqrt(nominal * (1.0 - nominal) / summary.reps_ok);
        }
        if (ratio_count > 0) summary.mean_relative_width = ratio_sum / ratio_count;
        if (static_cast<double>(summary.failures) > 0.01 * static_cast<double>(cfg.reps)) {
            result.valid = false;
        }
        result.summaries.push_back(std::move(summary));
    }
    return result;
}

std::function<PanelDataset(std::uint64_t)> friedman_rep_generator(FriedmanDgpConfig base,
                                                                  std::uint64_t master_seed) {
    return [base, master_seed](std::uint64_t rep) {
        FriedmanDgpConfig cfg = base;
        cfg.stream = RandomStream(master_seed, rep);
        PanelDataset panel;
        panel.data = generate_friedman(cfg);
        return panel;
    };
}

std::function<PanelDataset(std::uint64_t)> aa_panel_rep_generator(AaPanelConfig base,
                                                                  std::uint64_t master_seed) {
    return [base, master_seed](std::uint64_t rep) {
        AaPanelConfig cfg = base;
        cfg.stream = RandomStream(master_seed, rep);
        return generate_aa_panel(cfg);
    };
}

}  // namespace mlrate
