#include "mlrate/crossfit.hpp"

#include <stdexcept>

#include "mlrate/errors.hpp"

namespace mlrate {

namespace {

void check_dataset(const ExperimentDataset& ds) {
    const auto violations = validate(ds);
    if (!violations.empty()) {
        throw ValidationError("cross_fit: invalid dataset: " + violations.front().code + ": " +
                              violations.front().message);
    }
}

}  // namespace

CrossFitResult cross_fit(const ExperimentDataset& ds, const LearnerSpec& spec, std::size_t k,
                         RandomStream& stream, const ExperimentDataset* auxiliary) {
    check_dataset(ds);
    const auto folds = split_folds(ds.n, k, stream);
    return cross_fit_with_folds(ds, spec, folds, auxiliary);
}

CrossFitResult cross_fit_with_folds(const ExperimentDataset& ds, const LearnerSpec& spec,
                                    const std::vector<std::size_t>& fold_assignment,
                                    const ExperimentDataset* auxiliary) {
    check_dataset(ds);
    if (fold_assignment.size() != ds.n) {
        throw std::invalid_argument("cross_fit: fold assignment length must equal n");
    }
    std::size_t k = 0;
    for (auto f : fold_assignment) k = std::max(k, f + 1);
    if (k < 2) {
        throw std::invalid_argument("cross_fit: need at least 2 folds");
    }
    if (auxiliary && auxiliary->covariates.cols() != ds.covariates.cols()) {
        throw std::invalid_argument("cross_fit: auxiliary covariate width mismatch");
    }

    CrossFitResult result;
    result.fold_assignment = fold_assignment;
    result.predictions.assign(ds.n, 0.0);
    result.k = k;
    result.models.reserve(k);

    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < ds.n; ++i) {
            (fold_assignment[i] == fold ? test_rows : train_rows).push_back(i);
        }
        if (train_rows.size() < 2) {
            throw std::invalid_argument("cross_fit: fold " + std::to_string(fold) +
                                        " leaves fewer than 2 training rows");
        }
        DenseMatrix train_x = ds.covariates.gather_rows(train_rows);
        std::vector<double> train_y;
        train_y.reserve(train_rows.size() + (auxiliary ? auxiliary->n : 0));
        for (auto i : train_rows) train_y.push_back(ds.outcome[i]);
        if (auxiliary && auxiliary->n > 0) {
            DenseMatrix merged(train_rows.size() + auxiliary->n, train_x.cols());
            for (std::size_t r = 0; r < train_rows.size(); ++r) {
                auto src = train_x.row(r);
                std::copy(src.begin(), src.end(), merged.row(r).begin());
            }
            for (std::size_t r = 0; r < auxiliary->n; ++r) {
                auto src = auxiliary->covariates.row(r);
                std::copy(src.begin(), src.end(), merged.row(train_rows.size() + r).begin());
            }
            train_x = std::move(merged);
            for (std::size_t r = 0; r < auxiliary->n; ++r) {
                train_y.push_back(auxiliary->outcome[r]);
            }
        }

        const Predictor model = train(spec, train_x, train_y);
        for (auto i : test_rows) {
            result.predictions[i] = model.predict_row(ds.covariates.row(i));
        }
        result.models.push_back(model);
    }

    double sum = 0.0;
    for (double p : result.predictions) sum += p;
    result.g_bar = sum / static_cast<double>(ds.n);
    return result;
}

std::vector<double> preperiod_fit(const PanelDataset& panel, const LearnerSpec& spec) {
    return preperiod_fit_full(panel, spec).predictions;
}

PreperiodFit preperiod_fit_full(const PanelDataset& panel, const LearnerSpec& spec) {
    const std::size_t n = panel.data.n;
    if (!panel.pre_features.has_value() || !panel.pre_features_lag.has_value()) {
        throw SchemaError("preperiod_fit: panel lacks pre-period feature matrices");
    }
    if (panel.y_pre.size() != n) {
        throw SchemaError("preperiod_fit: panel lacks a pre-period outcome column");
    }
    const auto& lag = *panel.pre_features_lag;
    const auto& pre = *panel.pre_features;
    if (lag.rows() != n || pre.rows() != n || lag.cols() != pre.cols()) {
        throw SchemaError("preperiod_fit: pre-period matrices misaligned with the panel");
    }
    PreperiodFit out;
    out.model = train(spec, lag, panel.y_pre);
    out.predictions = out.model.predict(pre);
    return out;
}

}  // namespace mlrate
