#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mlrate/data.hpp"
#include "mlrate/errors.hpp"
#include "mlrate/estimators.hpp"
#include "mlrate/model_io.hpp"
#include "mlrate/report_io.hpp"
#include "mlrate/sim.hpp"

using nlohmann::json;
using namespace mlrate;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUserError = 2;

// Raw CSV view that preserves unreferenced (possibly non-numeric) columns.
struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::string> raw_rows;
    std::vector<std::vector<std::string>> cells;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

CsvFile read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open file: " + path);
    }
    CsvFile file;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            file.header = split_csv_line(line);
            first = false;
            continue;
        }
        file.raw_rows.push_back(line);
        file.cells.push_back(split_csv_line(line));
    }
    if (first) {
        throw SchemaError("empty file: " + path);
    }
    for (std::size_t r = 0; r < file.cells.size(); ++r) {
        if (file.cells[r].size() != file.header.size()) {
            throw ParseError("row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(file.header.size()) + " cells, found " +
                             std::to_string(file.cells[r].size()));
        }
    }
    return file;
}

std::size_t csv_column(const CsvFile& file, const std::string& name) {
    for (std::size_t c = 0; c < file.header.size(); ++c) {
        if (file.header[c] == name) return c;
    }
    throw SchemaError("missing column '" + name + "'");
}

double parse_csv_cell(const std::string& token, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || token.empty()) {
        throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + token + "' as a number");
    }
    return value;
}

std::vector<double> csv_numeric_column(const CsvFile& file, const std::string& name) {
    const std::size_t c = csv_column(file, name);
    std::vector<double> out(file.cells.size());
    for (std::size_t r = 0; r < file.cells.size(); ++r) {
        out[r] = parse_csv_cell(file.cells[r][c], r + 1, name);
        if (!std::isfinite(out[r])) {
            throw ValidationError("row " + std::to_string(r + 1) + ", column '" + name +
                                  "': non-finite value");
        }
    }
    return out;
}

DenseMatrix csv_numeric_columns(const CsvFile& file, const std::vector<std::string>& names) {
    DenseMatrix out(file.cells.size(), names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto col = csv_numeric_column(file, names[j]);
        for (std::size_t r = 0; r < col.size(); ++r) out(r, j) = col[r];
    }
    return out;
}

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Shared learner-related flags.
struct LearnerOptions {
    std::string learner = "gbdt";
    double lambda = 1.0;
    double alpha_mix = 0.5;
    double tol = 1e-6;
    std::size_t max_iter = 1000;
    std::size_t trees = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 3;
    std::size_t min_samples_leaf = 1;
    std::size_t cv_folds = 0;

    LearnerSpec to_spec() const {
        LearnerSpec spec;
        if (learner == "gbdt") {
            spec = LearnerSpec::gbdt(trees, learning_rate, max_depth, min_samples_leaf);
        } else if (learner == "elasticnet") {
            spec = LearnerSpec::elastic_net(lambda, alpha_mix, tol, max_iter);
        } else if (learner == "none") {
            spec = LearnerSpec::zero();
        } else if (learner == "mean") {
            spec = LearnerSpec::constant_mean();
        } else if (learner == "identity") {
            spec = LearnerSpec::identity();
        } else {
            throw SchemaError("unknown learner '" + learner + "'");
        }
        spec.cv_folds = cv_folds;
        return spec;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--learner", learner,
                        "Learner: gbdt | elasticnet | none | mean | identity")
            ->capture_default_str();
        cmd->add_option("--lambda", lambda, "Elastic net penalty strength")
            ->capture_default_str();
        cmd->add_option("--alpha-mix", alpha_mix, "Elastic net l1/l2 mixing in [0,1]")
            ->capture_default_str();
        cmd->add_option("--tol", tol, "Elastic net convergence tolerance")
            ->capture_default_str();
        cmd->add_option("--max-iter", max_iter, "Elastic net coordinate-descent sweep cap")
            ->capture_default_str();
        cmd->add_option("--trees", trees, "GBDT tree count")->capture_default_str();
        cmd->add_option("--learning-rate", learning_rate, "GBDT learning rate in (0,1]")
            ->capture_default_str();
        cmd->add_option("--max-depth", max_depth, "GBDT maximum tree depth")
            ->capture_default_str();
        cmd->add_option("--min-samples-leaf", min_samples_leaf, "GBDT minimum rows per leaf")
            ->capture_default_str();
        cmd->add_option("--cv-folds", cv_folds,
                        "Internal CV folds for hyperparameter selection (0 = off)")
            ->capture_default_str();
    }
};

unsigned capped_parallelism(unsigned requested) {
    if (const char* env = std::getenv("MLRATE_THREADS")) {
        const unsigned cap = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        if (cap >= 1) return std::min(requested, cap);
    }
    return requested;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string data_path;
    std::string outcome = "y";
    std::string treatment = "t";
    std::vector<std::string> features;
    std::string g_column;
    std::string pre_outcome;
    std::vector<std::string> baselines;
    LearnerOptions learner;
    std::size_t k = 2;
    std::uint64_t seed = 0;
    double level = 0.05;
    double censor_tau = 0.0;
    bool censor_set = false;
    std::string format = "json";
};

void print_reports_pretty(const std::vector<EstimateReport>& reports,
                          const json& ratios) {
    std::printf("%-10s %14s %14s %14s %14s %8s %6s\n", "method", "estimate", "std_error",
                "ci_lower", "ci_upper", "n", "degen");
    for (const auto& r : reports) {
        std::printf("%-10s %14.6g %14.6g %14.6g %14.6g %8zu %6s\n", r.method.c_str(), r.estimate,
                    r.std_error, r.ci_lower, r.ci_upper, r.n, r.degenerate ? "yes" : "no");
    }
    if (!ratios.empty()) {
        std::printf("\nrelative efficiency vs dim (variance, width):\n");
        for (const auto& [name, entry] : ratios.items()) {
            std::printf("  %-10s %10.6g %10.6g\n", name.c_str(),
                        entry["variance_ratio"].get<double>(),
                        entry["width_ratio"].get<double>());
        }
    }
}

void print_reports_csv(const std::vector<EstimateReport>& reports) {
    std::printf(
        "method,estimate,std_error,ci_level,ci_lower,ci_upper,n,p_hat,sigma2_hat,degenerate,"
        "corr_y_g,var_g\n");
    for (const auto& r : reports) {
        std::printf("%s,%s,%s,%s,%s,%s,%zu,%s,%s,%d,%s,%s\n", r.method.c_str(),
                    format_g(r.estimate).c_str(), format_g(r.std_error).c_str(),
                    format_g(r.ci_level).c_str(), format_g(r.ci_lower).c_str(),
                    format_g(r.ci_upper).c_str(), r.n, format_g(r.p_hat).c_str(),
                    format_g(r.sigma2_hat).c_str(), r.degenerate ? 1 : 0,
                    format_g(r.corr_y_g).c_str(), format_g(r.var_g).c_str());
    }
}

int run_estimate(const EstimateArgs& args) {
    const CsvFile file = read_csv_file(args.data_path);

    std::vector<std::string> features = args.features;
    if (features.empty() && args.g_column.empty()) {
        for (const auto& name : file.header) {
            if (name != args.outcome && name != args.treatment) features.push_back(name);
        }
        if (features.empty()) {
            throw SchemaError("no feature columns available");
        }
    }
    for (const auto& name : features) {
        if (name == args.outcome || name == args.treatment) {
            throw SchemaError("column '" + name +
                              "' is the outcome or treatment and cannot be a feature");
        }
    }

    ExperimentDataset ds;
    ds.n = file.cells.size();
    ds.outcome = csv_numeric_column(file, args.outcome);
    ds.column_names = features;
    ds.covariates = csv_numeric_columns(file, features);
    const std::size_t tc = csv_column(file, args.treatment);
    ds.treatment.resize(ds.n);
    for (std::size_t r = 0; r < ds.n; ++r) {
        const double t = parse_csv_cell(file.cells[r][tc], r + 1, args.treatment);
        if (t == 0.0) {
            ds.treatment[r] = 0;
        } else if (t == 1.0) {
            ds.treatment[r] = 1;
        } else {
            throw ValidationError("row " + std::to_string(r + 1) + ", column '" +
                                  args.treatment + "': treatment value must be 0 or 1");
        }
    }
    {
        const auto violations = validate(ds);
        if (!violations.empty()) {
            throw ValidationError(violations.front().code + ": " + violations.front().message);
        }
    }

    std::optional<double> censor;
    if (args.censor_set) censor = args.censor_tau;

    std::vector<EstimateReport> reports;
    std::vector<double> g;  // adjustment covariate used by mlrate/dind
    if (!args.g_column.empty()) {
        g = csv_numeric_column(file, args.g_column);
        if (censor.has_value()) g = censor_predictions(g, *censor);
        reports.push_back(adjusted_estimate(ds.outcome, ds.treatment, g, args.level, "adjusted"));
    } else {
        RandomStream stream(args.seed, 0);
        const auto crossfit = cross_fit(ds, args.learner.to_spec(), args.k, stream);
        g = censor.has_value() ? censor_predictions(crossfit.predictions, *censor)
                               : crossfit.predictions;
        reports.push_back(
            mlrate_estimate_from_crossfit(ds, crossfit, args.level, censor, "mlrate"));
    }

    const auto dim_report = diff_in_means(ds.outcome, ds.treatment, args.level);
    for (const auto& baseline : args.baselines) {
        if (baseline == "dim") {
            reports.push_back(dim_report);
        } else if (baseline == "dind") {
            reports.push_back(diff_in_diff(ds.outcome, ds.treatment, g, args.level));
        } else if (baseline == "cuped") {
            if (args.pre_outcome.empty()) {
                throw SchemaError("baseline 'cuped' needs --pre-outcome");
            }
            PanelDataset panel;
            panel.data = ds;
            panel.y_pre = csv_numeric_column(file, args.pre_outcome);
            reports.push_back(cuped_estimate(panel, args.level));
        } else {
            throw SchemaError("unknown baseline '" + baseline + "'");
        }
    }

    json ratios = json::object();
    for (const auto& r : reports) {
        if (r.method == "dim") continue;
        const auto ratio = relative_efficiency(r, dim_report);
        ratios[r.method] = {{"variance_ratio", ratio.variance_ratio},
                            {"width_ratio", ratio.width_ratio}};
    }

    if (args.format == "json") {
        json out;
        out["reports"] = json::array();
        for (const auto& r : reports) out["reports"].push_back(report_to_json(r));
        out["relative_efficiency"] = std::move(ratios);
        std::cout << out.dump(2) << '\n';
    } else if (args.format == "csv") {
        print_reports_csv(reports);
    } else {
        print_reports_pretty(reports, ratios);
    }
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string dgp;
    std::size_t reps = 1000;
    std::size_t n = 2000;
    std::size_t d = 100;
    double noise_sd = 25.0;
    double treat_prob = 0.5;
    double rho = 0.5;
    std::size_t aux_metrics = 3;
    std::string family = "gaussian";
    std::vector<std::string> methods{"gbdt", "elasticnet", "dim"};
    std::string baseline = "dim";
    LearnerOptions learner;
    std::size_t k = 2;
    std::uint64_t seed = 0;
    double level = 0.05;
    double censor_tau = 0.0;
    bool censor_set = false;
    bool paper_scale = false;
    unsigned parallelism = 1;
    std::string out_csv;
    std::string format = "pretty";
};

MethodSpec method_from_name(const std::string& name, const SimulateArgs& args) {
    const LearnerOptions& lo = args.learner;
    MethodSpec m;
    if (name == "dim") {
        m = MethodSpec::diff_in_means();
    } else if (name == "cuped") {
        m = MethodSpec::cuped();
    } else if (name == "gbdt") {
        m = MethodSpec::mlrate("gbdt",
                               LearnerSpec::gbdt(lo.trees, lo.learning_rate, lo.max_depth,
                                                 lo.min_samples_leaf),
                               args.k);
    } else if (name == "elasticnet") {
        m = MethodSpec::mlrate(
            "elasticnet", LearnerSpec::elastic_net(lo.lambda, lo.alpha_mix, lo.tol, lo.max_iter),
            args.k);
    } else if (name == "zero") {
        m = MethodSpec::mlrate("zero", LearnerSpec::zero(), args.k);
    } else if (name == "mean") {
        m = MethodSpec::mlrate("mean", LearnerSpec::constant_mean(), args.k);
    } else {
        throw SchemaError("unknown method '" + name + "'");
    }
    if (args.censor_set && m.kind == MethodSpec::Kind::Mlrate) m.censor_tau = args.censor_tau;
    return m;
}

json simulate_config_json(const SimulateArgs& args, std::size_t reps, std::size_t n) {
    json cfg;
    cfg["dgp"] = args.dgp;
    cfg["reps"] = reps;
    cfg["n"] = n;
    cfg["k"] = args.k;
    cfg["seed"] = args.seed;
    cfg["level"] = args.level;
    cfg["paper_scale"] = args.paper_scale;
    if (args.dgp == "friedman") {
        cfg["d"] = args.d;
        cfg["noise_sd"] = args.noise_sd;
        cfg["treat_prob"] = args.treat_prob;
    } else {
        cfg["rho"] = args.rho;
        cfg["aux_metrics"] = args.aux_metrics;
        cfg["family"] = args.family;
    }
    return cfg;
}

int run_simulate(const SimulateArgs& args) {
    std::size_t reps = args.reps;
    std::size_t n = args.n;
    if (args.paper_scale) {
        reps = 10000;
        n = 10000;
    }

    CoverageStudyConfig cfg;
    cfg.reps = reps;
    cfg.level = args.level;
    cfg.baseline = args.baseline;
    cfg.master_seed = args.seed;
    cfg.parallelism = capped_parallelism(std::max(1u, args.parallelism));
    for (const auto& name : args.methods) cfg.methods.push_back(method_from_name(name, args));

    if (args.dgp == "friedman") {
        FriedmanDgpConfig dgp;
        dgp.n = n;
        dgp.d = args.d;
        dgp.noise_sd = args.noise_sd;
        dgp.treat_prob = args.treat_prob;
        cfg.make_rep = friedman_rep_generator(dgp, args.seed);
        cfg.true_ate = true_ate_friedman();
    } else if (args.dgp == "aa-panel") {
        AaPanelConfig dgp;
        dgp.n = n;
        dgp.rho = args.rho;
        dgp.n_aux_metrics = args.aux_metrics;
        if (args.family == "gaussian") {
            dgp.family = OutcomeFamily::Gaussian;
        } else if (args.family == "heavy-tailed") {
            dgp.family = OutcomeFamily::HeavyTailed;
        } else if (args.family == "count-like") {
            dgp.family = OutcomeFamily::CountLike;
        } else {
            throw SchemaError("unknown family '" + args.family + "'");
        }
        cfg.make_rep = aa_panel_rep_generator(dgp, args.seed);
        cfg.true_ate = 0.0;
    } else {
        throw SchemaError("unknown dgp '" + args.dgp + "' (expected friedman or aa-panel)");
    }

    const auto result = run_coverage_study(cfg);

    if (!args.out_csv.empty()) {
        std::ofstream out(args.out_csv);
        if (!out) {
            throw SchemaError("cannot write file: " + args.out_csv);
        }
        study_records_csv(out, result, cfg.methods);
    }

    if (args.format == "json") {
        json out;
        out["config"] = simulate_config_json(args, reps, n);
        out["result"] = study_to_json(result);
        std::cout << out.dump(2) << '\n';
    } else {
        std::printf("simulation: %s  reps=%zu  n=%zu  k=%zu  seed=%llu  level=%g%s\n",
                    args.dgp.c_str(), reps, n, args.k,
                    static_cast<unsigned long long>(args.seed), args.level,
                    args.paper_scale ? "  [paper scale]" : "");
        std::printf("true ATE: %.10g\n\n", result.true_ate);
        std::printf("%-12s %9s %12s %11s %12s %9s %6s\n", "method", "coverage", "+/-95%", "rel_width",
                    "mean_width", "failures", "flag");
        for (const auto& s : result.summaries) {
            char rel[32];
            if (s.mean_relative_width.has_value()) {
                std::snprintf(rel, sizeof(rel), "%11.4f", *s.mean_relative_width);
            } else {
                std::snprintf(rel, sizeof(rel), "%11s", "-");
            }
            std::printf("%-12s %9.4f %12.4f %s %12.5g %9zu %6s\n", s.name.c_str(), s.coverage,
                        s.coverage_half_width, rel, s.mean_width, s.failures,
                        s.within_nominal_band ? "ok" : "LOW");
        }
        if (!result.valid) {
            std::printf("\nWARNING: a method failed on more than 1%% of repetitions\n");
        }
    }
    return result.valid ? 0 : 1;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string data_path;
    std::string mode = "preperiod";
    std::string target;
    std::string outcome = "y";
    std::string treatment = "t";
    std::vector<std::string> features;
    std::string model_path;
    LearnerOptions learner;
    std::size_t k = 2;
    std::uint64_t seed = 0;
};

int run_train(const TrainArgs& args) {
    const CsvFile file = read_csv_file(args.data_path);
    json out;
    if (args.mode == "preperiod") {
        if (args.target.empty()) {
            throw SchemaError("train --mode preperiod needs --target");
        }
        std::vector<std::string> features = args.features;
        if (features.empty()) {
            for (const auto& name : file.header) {
                if (name != args.target) features.push_back(name);
            }
        }
        for (const auto& name : features) {
            if (name == args.target) {
                throw SchemaError("target column '" + name + "' cannot also be a feature");
            }
        }
        const auto targets = csv_numeric_column(file, args.target);
        const auto x = csv_numeric_columns(file, features);
        const auto model = train(args.learner.to_spec(), x, targets);
        save_model_file(args.model_path, model_file_from_preperiod(model, features));
        out["provenance"] = ModelFile::kProvenancePrePeriod;
        out["features"] = features;
    } else if (args.mode == "crossfit") {
        std::vector<std::string> features = args.features;
        if (features.empty()) {
            for (const auto& name : file.header) {
                if (name != args.outcome && name != args.treatment) features.push_back(name);
            }
        }
        for (const auto& name : features) {
            if (name == args.outcome || name == args.treatment) {
                throw SchemaError("column '" + name +
                                  "' is the outcome or treatment and cannot be a feature");
            }
        }
        const auto ds = load_csv(args.data_path, args.outcome, args.treatment, features);
        RandomStream stream(args.seed, 0);
        const auto result = cross_fit(ds, args.learner.to_spec(), args.k, stream);
        save_model_file(args.model_path, model_file_from_crossfit(result, features));
        out["provenance"] = ModelFile::kProvenanceCrossFitted;
        out["k"] = result.k;
        out["g_bar"] = result.g_bar;
        out["features"] = features;
    } else {
        throw SchemaError("unknown mode '" + args.mode + "' (expected preperiod or crossfit)");
    }
    out["model"] = args.model_path;
    out["rows"] = file.cells.size();
    std::cout << out.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
    std::string model_path;
    std::string data_path;
    std::string out_path;
    std::string g_col_name = "g_hat";
};

int run_predict(const PredictArgs& args) {
    const auto model_file = load_model_file(args.model_path);
    if (model_file.provenance != ModelFile::kProvenancePrePeriod) {
        throw ValidationError(
            "model file was cross-fitted inside an experiment; its predictions depend on "
            "in-experiment outcomes and must not be reused as a plain covariate. Retrain with "
            "--mode preperiod on pre-experiment data.");
    }
    const CsvFile file = read_csv_file(args.data_path);
    for (const auto& name : file.header) {
        if (name == args.g_col_name) {
            throw SchemaError("output column '" + args.g_col_name + "' already exists");
        }
    }
    const auto x = csv_numeric_columns(file, model_file.feature_columns);
    const auto preds = model_file.models.front().predict(x);

    std::ofstream out(args.out_path);
    if (!out) {
        throw SchemaError("cannot write file: " + args.out_path);
    }
    for (std::size_t c = 0; c < file.header.size(); ++c) {
        if (c) out << ',';
        out << file.header[c];
    }
    out << ',' << args.g_col_name << '\n';
    for (std::size_t r = 0; r < file.raw_rows.size(); ++r) {
        char buf[64];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), preds[r]);
        (void)ec;
        out << file.raw_rows[r] << ',' << std::string_view(buf, ptr - buf) << '\n';
    }

    json summary;
    summary["rows"] = file.raw_rows.size();
    summary["out"] = args.out_path;
    summary["g_column"] = args.g_col_name;
    std::cout << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MLRATE: machine-learning regression-adjusted treatment effect estimation"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "Estimate the ATE on a CSV experiment file");
    est_cmd->add_option("--data", est.data_path, "Input CSV path")->required();
    est_cmd->add_option("--outcome", est.outcome, "Outcome column name")->capture_default_str();
    est_cmd->add_option("--treatment", est.treatment, "Treatment column name (0/1)")
        ->capture_default_str();
    est_cmd->add_option("--features", est.features,
                        "Feature columns (comma separated; default: all other columns)")
        ->delimiter(',');
    est_cmd->add_option("--g-column", est.g_column,
                        "Use this precomputed covariate column and skip cross-fitting");
    est_cmd->add_option("--pre-outcome", est.pre_outcome,
                        "Pre-period outcome column (needed by the cuped baseline)");
    est_cmd->add_option("--baselines", est.baselines,
                        "Baselines to compute: dim, dind, cuped (comma separated)")
        ->delimiter(',');
    est.learner.attach(est_cmd);
    est_cmd->add_option("--k", est.k, "Number of cross-fitting folds")->capture_default_str();
    est_cmd->add_option("--seed", est.seed, "Random seed")->capture_default_str();
    est_cmd->add_option("--level", est.level, "CI level a: intervals are 100(1-a)%")
        ->capture_default_str();
    auto* est_censor = est_cmd->add_option("--censor-tau", est.censor_tau,
                                           "Hard-threshold predictions at this tau");
    est_cmd->add_option("--format", est.format, "Output format: json | csv | pretty")
        ->capture_default_str();

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo coverage study");
    sim_cmd->add_option("dgp", sim.dgp, "Data generating process: friedman | aa-panel")
        ->required();
    sim_cmd->add_option("--reps", sim.reps, "Simulation repetitions")->capture_default_str();
    sim_cmd->add_option("--n", sim.n, "Observations per repetition")->capture_default_str();
    sim_cmd->add_option("--d", sim.d, "Covariate count (friedman)")->capture_default_str();
    sim_cmd->add_option("--noise-sd", sim.noise_sd, "Noise standard deviation (friedman)")
        ->capture_default_str();
    sim_cmd->add_option("--treat-prob", sim.treat_prob, "Treatment probability (friedman)")
        ->capture_default_str();
    sim_cmd->add_option("--rho", sim.rho, "Pre/current outcome correlation (aa-panel)")
        ->capture_default_str();
    sim_cmd->add_option("--aux-metrics", sim.aux_metrics, "Auxiliary pre-metrics (aa-panel)")
        ->capture_default_str();
    sim_cmd->add_option("--family", sim.family,
                        "Outcome family (aa-panel): gaussian | heavy-tailed | count-like")
        ->capture_default_str();
    sim_cmd->add_option("--methods", sim.methods,
                        "Methods: gbdt, elasticnet, zero, mean, dim, cuped (comma separated)")
        ->delimiter(',');
    sim_cmd->add_option("--baseline", sim.baseline, "Baseline method for relative widths")
        ->capture_default_str();
    sim.learner.attach(sim_cmd);
    sim_cmd->add_option("--k", sim.k, "Cross-fitting folds for mlrate methods")
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
    sim_cmd->add_option("--level", sim.level, "CI level a")->capture_default_str();
    auto* sim_censor = sim_cmd->add_option("--censor-tau", sim.censor_tau,
                                           "Hard-threshold predictions at this tau");
    sim_cmd->add_flag("--paper-scale", sim.paper_scale,
                      "Use the full-scale settings: reps=10000, n=10000");
    sim_cmd->add_option("--parallelism", sim.parallelism,
                        "Worker threads (capped by MLRATE_THREADS)")
        ->capture_default_str();
    sim_cmd->add_option("--out-csv", sim.out_csv, "Write per-repetition records to this CSV");
    sim_cmd->add_option("--format", sim.format, "Output format: json | pretty")
        ->capture_default_str();

    TrainArgs trn;
    auto* trn_cmd = app.add_subcommand("train", "Train and serialize a model file");
    trn_cmd->add_option("--data", trn.data_path, "Training CSV path")->required();
    trn_cmd->add_option("--mode", trn.mode, "preperiod (one model) | crossfit (K fold models)")
        ->capture_default_str();
    trn_cmd->add_option("--target", trn.target, "Target column (preperiod mode)");
    trn_cmd->add_option("--outcome", trn.outcome, "Outcome column (crossfit mode)")
        ->capture_default_str();
    trn_cmd->add_option("--treatment", trn.treatment, "Treatment column (crossfit mode)")
        ->capture_default_str();
    trn_cmd->add_option("--features", trn.features,
                        "Feature columns (default: all other columns)")
        ->delimiter(',');
    trn_cmd->add_option("--model", trn.model_path, "Output model file (JSON)")->required();
    trn.learner.attach(trn_cmd);
    trn_cmd->add_option("--k", trn.k, "Folds (crossfit mode)")->capture_default_str();
    trn_cmd->add_option("--seed", trn.seed, "Random seed")->capture_default_str();

    PredictArgs prd;
    auto* prd_cmd =
        app.add_subcommand("predict", "Append model predictions to a CSV as a g column");
    prd_cmd->add_option("--model", prd.model_path, "Model file from train --mode preperiod")
        ->required();
    prd_cmd->add_option("--data", prd.data_path, "CSV to score")->required();
    prd_cmd->add_option("--out", prd.out_path, "Output CSV path")->required();
    prd_cmd->add_option("--g-col-name", prd.g_col_name, "Name of the appended column")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUserError;
    }

    est.censor_set = est_censor->count() > 0;
    sim.censor_set = sim_censor->count() > 0;

    try {
        if (est_cmd->parsed()) return run_estimate(est);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (trn_cmd->parsed()) return run_train(trn);
        if (prd_cmd->parsed()) return run_predict(prd);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUserError;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUserError;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUserError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUserError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
