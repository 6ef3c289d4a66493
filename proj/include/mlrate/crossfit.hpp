#pragma once

#include <cstddef>
#include <vector>

#include "mlrate/data.hpp"
#include "mlrate/learners.hpp"
#include "mlrate/numerics.hpp"

namespace mlrate {

// Output of the K-fold cross-fitting step: each row's prediction comes from
// the model trained on the other folds, so the adjustment covariate never
// sees its own outcome.
struct CrossFitResult {
    std::vector<std::size_t> fold_assignment;
    std::vector<double> predictions;  // entry i = g_{k(i)}(X_i)
    double g_bar = 0.0;               // mean prediction over all rows
    std::vector<Predictor> models;    // one per fold
    std::size_t k = 0;
};

// Train on each fold complement (outcome and covariates only; treatment is
// not a training feature by construction) and predict the held-out fold.
// Optional auxiliary rows join every training set, unweighted, and are never
// predicted.
CrossFitResult cross_fit(const ExperimentDataset& ds, const LearnerSpec& spec, std::size_t k,
                         RandomStream& stream, const ExperimentDataset* auxiliary = nullptr);

// Same, with a caller-supplied fold assignment (values in 0..k-1).
CrossFitResult cross_fit_with_folds(const ExperimentDataset& ds, const LearnerSpec& spec,
                                    const std::vector<std::size_t>& fold_assignment,
                                    const ExperimentDataset* auxiliary = nullptr);

// Pre-period mode: train one model mapping the t-2 features to the t-1
// outcome, then predict the current period from the t-1 features. The result
// is an ordinary pre-experiment covariate; no cross-fitting is needed.
std::vector<double> preperiod_fit(const PanelDataset& panel, const LearnerSpec& spec);

// The trained pre-period model together with its predictions.
struct PreperiodFit {
    Predictor model;
    std::vector<double> predictions;
};

PreperiodFit preperiod_fit_full(const PanelDataset& panel, const LearnerSpec& spec);

}  // namespace mlrate
