#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mlrate/crossfit.hpp"
#include "mlrate/errors.hpp"
#include "mlrate/model_io.hpp"

using namespace mlrate;

namespace {

ExperimentDataset make_dataset(std::mt19937_64& gen, std::size_t n, std::size_t d) {
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    ExperimentDataset ds;
    ds.n = n;
    ds.outcome.resize(n);
    ds.treatment.resize(n);
    ds.covariates = DenseMatrix(n, d);
    for (std::size_t j = 0; j < d; ++j) ds.column_names.push_back("x" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) {
        ds.treatment[i] = i % 2;
        for (std::size_t j = 0; j < d; ++j) ds.covariates(i, j) = unif(gen);
        ds.outcome[i] = ds.covariates(i, 0) + 0.5 * unif(gen);
    }
    return ds;
}

}  // namespace

TEST_CASE("constant-mean cross-fit predicts the opposite fold's mean") {
    std::mt19937_64 gen(1);
    auto ds = make_dataset(gen, 10, 2);
    RandomStream stream(7);
    const auto result = cross_fit(ds, LearnerSpec::constant_mean(), 2, stream);
    REQUIRE(result.k == 2);

    double mean0 = 0.0, mean1 = 0.0;
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (result.fold_assignment[i] == 0) {
            mean0 += ds.outcome[i];
            ++n0;
        } else {
            mean1 += ds.outcome[i];
            ++n1;
        }
    }
    mean0 /= n0;
    mean1 /= n1;
    for (std::size_t i = 0; i < ds.n; ++i) {
        const double expected = result.fold_assignment[i] == 0 ? mean1 : mean0;
        CHECK(result.predictions[i] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("leave-one-out constant-mean has the closed form") {
    std::mt19937_64 gen(2);
    auto ds = make_dataset(gen, 9, 1);
    RandomStream stream(3);
    const auto result = cross_fit(ds, LearnerSpec::constant_mean(), ds.n, stream);
    const double total = std::accumulate(ds.outcome.begin(), ds.outcome.end(), 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        const double expected = (total - ds.outcome[i]) / static_cast<double>(ds.n - 1);
        CHECK(result.predictions[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("zero learner cross-fits to all zeros") {
    std::mt19937_64 gen(3);
    auto ds = make_dataset(gen, 12, 2);
    RandomStream stream(5);
    const auto result = cross_fit(ds, LearnerSpec::zero(), 3, stream);
    for (double p : result.predictions) CHECK(p == 0.0);
    CHECK(result.g_bar == 0.0);
}

TEST_CASE("cross_fit rejects folds with too-small complements") {
    std::mt19937_64 gen(4);
    auto ds = make_dataset(gen, 2, 1);
    RandomStream stream(1);
    CHECK_THROWS_AS(cross_fit(ds, LearnerSpec::constant_mean(), 2, stream),
                    std::invalid_argument);
}

TEST_CASE("cross_fit rejects invalid datasets") {
    std::mt19937_64 gen(5);
    auto ds = make_dataset(gen, 8, 1);
    for (auto& t : ds.treatment) t = 1;
    RandomStream stream(1);
    CHECK_THROWS_AS(cross_fit(ds, LearnerSpec::zero(), 2, stream), ValidationError);
}

TEST_CASE("g_bar equals the mean of the predictions") {
    std::mt19937_64 gen(6);
    auto ds = make_dataset(gen, 37, 3);
    RandomStream stream(11);
    const auto result = cross_fit(ds, LearnerSpec::gbdt(10, 0.2, 2, 1), 2, stream);
    double sum = 0.0;
    for (double p : result.predictions) sum += p;
    CHECK(result.g_bar == sum / static_cast<double>(ds.n));
}

TEST_CASE("held-out rows provably never enter training") {
    std::mt19937_64 gen(7);
    auto ds = make_dataset(gen, 40, 3);
    RandomStream stream(13);
    const auto folds = split_folds(ds.n, 2, stream);

    for (const auto& spec : {LearnerSpec::gbdt(8, 0.3, 2, 1), LearnerSpec::elastic_net(0.1),
                            LearnerSpec::constant_mean()}) {
        const auto honest = cross_fit_with_folds(ds, spec, folds);
        for (std::size_t fold = 0; fold < 2; ++fold) {
            auto corrupted = ds;
            for (std::size_t i = 0; i < ds.n; ++i) {
                if (folds[i] == fold) corrupted.outcome[i] += 1e6;
            }
            const auto tampered = cross_fit_with_folds(corrupted, spec, folds);
            for (std::size_t i = 0; i < ds.n; ++i) {
                if (folds[i] == fold) {
                    // Prediction for the corrupted fold is bitwise unchanged.
                    CHECK(tampered.predictions[i] == honest.predictions[i]);
                }
            }
        }
    }
}

TEST_CASE("row order does not affect predictions beyond rounding") {
    std::mt19937_64 gen(8);
    auto ds = make_dataset(gen, 30, 3);
    RandomStream stream(17);
    const auto folds = split_folds(ds.n, 2, stream);

    RandomStream perm_stream(99);
    const auto perm = perm_stream.permutation(ds.n);
    ExperimentDataset shuffled;
    shuffled.n = ds.n;
    shuffled.outcome.resize(ds.n);
    shuffled.treatment.resize(ds.n);
    shuffled.covariates = DenseMatrix(ds.n, ds.covariates.cols());
    shuffled.column_names = ds.column_names;
    std::vector<std::size_t> shuffled_folds(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
        const std::size_t to = perm[i];
        shuffled.outcome[to] = ds.outcome[i];
        shuffled.treatment[to] = ds.treatment[i];
        for (std::size_t j = 0; j < ds.covariates.cols(); ++j) {
            shuffled.covariates(to, j) = ds.covariates(i, j);
        }
        shuffled_folds[to] = folds[i];
    }

    const auto base_zero = cross_fit_with_folds(ds, LearnerSpec::identity(), folds);
    const auto perm_zero = cross_fit_with_folds(shuffled, LearnerSpec::identity(), shuffled_folds);
    for (std::size_t i = 0; i < ds.n; ++i) {
        CHECK(perm_zero.predictions[perm[i]] == base_zero.predictions[i]);
    }

    // Elastic net converges to the unique optimum of a strictly convex
    // objective; reordering only perturbs rounding.
    const auto base_en = cross_fit_with_folds(ds, LearnerSpec::elastic_net(0.1), folds);
    const auto shuf_en = cross_fit_with_folds(shuffled, LearnerSpec::elastic_net(0.1),
                                              shuffled_folds);
    for (std::size_t i = 0; i < ds.n; ++i) {
        CHECK(shuf_en.predictions[perm[i]] ==
              doctest::Approx(base_en.predictions[i]).epsilon(1e-10));
    }
}

TEST_CASE("gbdt row-order independence on data with well-separated splits") {
    // Split gains here are far apart, so reordered floating-point sums cannot
    // flip a split decision and predictions agree to rounding.
    const std::size_t n = 32;
    ExperimentDataset ds;
    ds.n = n;
    ds.outcome.resize(n);
    ds.treatment.resize(n);
    ds.covariates = DenseMatrix(n, 2);
    ds.column_names = {"x0", "x1"};
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        ds.treatment[i] = i % 2;
        ds.covariates(i, 0) = unif(gen);
        ds.covariates(i, 1) = unif(gen);
        ds.outcome[i] = (ds.covariates(i, 0) > 0.0 ? 4.0 : 0.0) +
                        (ds.covariates(i, 1) > 0.3 ? 1.0 : 0.0);
    }
    std::vector<std::size_t> folds(n);
    for (std::size_t i = 0; i < n; ++i) folds[i] = i < n / 2 ? 0 : 1;

    RandomStream perm_stream(5);
    const auto perm = perm_stream.permutation(n);
    ExperimentDataset shuffled = ds;
    std::vector<std::size_t> shuffled_folds(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t to = perm[i];
        shuffled.outcome[to] = ds.outcome[i];
        shuffled.treatment[to] = ds.treatment[i];
        shuffled.covariates(to, 0) = ds.covariates(i, 0);
        shuffled.covariates(to, 1) = ds.covariates(i, 1);
        shuffled_folds[to] = folds[i];
    }
    const auto spec = LearnerSpec::gbdt(6, 0.5, 2, 1);
    const auto base = cross_fit_with_folds(ds, spec, folds);
    const auto shuf = cross_fit_with_folds(shuffled, spec, shuffled_folds);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(shuf.predictions[perm[i]] == doctest::Approx(base.predictions[i]).epsilon(1e-12));
    }
}

TEST_CASE("auxiliary rows join every training set") {
    std::mt19937_64 gen(9);
    auto ds = make_dataset(gen, 10, 1);
    auto aux = make_dataset(gen, 6, 1);
    RandomStream stream(23);
    const auto folds = split_folds(ds.n, 2, stream);
    const auto result = cross_fit_with_folds(ds, LearnerSpec::constant_mean(), folds, &aux);

    const double aux_total = std::accumulate(aux.outcome.begin(), aux.outcome.end(), 0.0);
    for (std::size_t fold = 0; fold < 2; ++fold) {
        double total = aux_total;
        std::size_t count = aux.n;
        for (std::size_t i = 0; i < ds.n; ++i) {
            if (folds[i] != fold) {
                total += ds.outcome[i];
                ++count;
            }
        }
        const double expected = total / static_cast<double>(count);
        for (std::size_t i = 0; i < ds.n; ++i) {
            if (folds[i] == fold) {
                CHECK(result.predictions[i] == doctest::Approx(expected).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("preperiod_fit maps lagged features to current predictions") {
    PanelDataset panel;
    const std::size_t n = 8;
    panel.data.n = n;
    panel.data.outcome.assign(n, 0.0);
    panel.data.treatment.assign(n, 0);
    for (std::size_t i = 0; i < n / 2; ++i) panel.data.treatment[i] = 1;
    panel.data.covariates = DenseMatrix(n, 1);
    panel.y_pre.resize(n);
    DenseMatrix lag(n, 1), pre(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        lag(i, 0) = static_cast<double>(i);
        pre(i, 0) = static_cast<double>(i) + 0.5;
        panel.y_pre[i] = static_cast<double>(i);  // y_pre equals the lag feature
    }
    panel.pre_features = pre;
    panel.pre_features_lag = lag;

    // Identity learner: predictions are exactly the t-1 feature column.
    const auto preds = preperiod_fit(panel, LearnerSpec::identity());
    for (std::size_t i = 0; i < n; ++i) CHECK(preds[i] == pre(i, 0));

    // Constant pre-period target: constant predictions.
    std::fill(panel.y_pre.begin(), panel.y_pre.end(), 4.25);
    const auto flat = preperiod_fit(panel, LearnerSpec::constant_mean());
    for (double p : flat) CHECK(p == doctest::Approx(4.25));

    PanelDataset missing = panel;
    missing.pre_features_lag.reset();
    CHECK_THROWS_AS(preperiod_fit(missing, LearnerSpec::identity()), SchemaError);
}

TEST_CASE("predictors survive a JSON round trip bit for bit") {
    std::mt19937_64 gen(10);
    auto ds = make_dataset(gen, 50, 4);

    for (const auto& spec : {LearnerSpec::gbdt(12, 0.1, 3, 1), LearnerSpec::elastic_net(0.3),
                            LearnerSpec::constant_mean(), LearnerSpec::zero(),
                            LearnerSpec::identity()}) {
        const auto model = train(spec, ds.covariates, ds.outcome);
        const auto restored = predictor_from_json(predictor_to_json(model));
        CHECK(restored.predict(ds.covariates) == model.predict(ds.covariates));
    }
}

TEST_CASE("cross-fit results survive a model-file round trip") {
    std::mt19937_64 gen(11);
    auto ds = make_dataset(gen, 24, 2);
    RandomStream stream(31);
    const auto result = cross_fit(ds, LearnerSpec::gbdt(5, 0.2, 2, 1), 2, stream);
    const auto file = model_file_from_crossfit(result, ds.column_names);
    const auto restored = model_file_from_json(model_file_to_json(file));
    CHECK(restored.provenance == ModelFile::kProvenanceCrossFitted);
    CHECK(restored.fold_assignment == result.fold_assignment);
    CHECK(restored.predictions == result.predictions);
    CHECK(restored.g_bar == result.g_bar);
    CHECK(restored.k == result.k);
    REQUIRE(restored.models.size() == result.models.size());
    for (std::size_t f = 0; f < result.models.size(); ++f) {
        CHECK(restored.models[f].predict(ds.covariates) ==
              result.models[f].predict(ds.covariates));
    }
}

TEST_CASE("model files reject version and kind tampering") {
    std::mt19937_64 gen(12);
    auto ds = make_dataset(gen, 12, 1);
    const auto model = train(LearnerSpec::constant_mean(), ds.covariates, ds.outcome);
    auto j = model_file_to_json(model_file_from_preperiod(model, ds.column_names));

    auto bad_version = j;
    bad_version["format_version"] = 99;
    CHECK_THROWS_AS(model_file_from_json(bad_version), SchemaError);

    auto bad_kind = j;
    bad_kind["models"][0]["kind"] = "mystery";
    CHECK_THROWS_AS(model_file_from_json(bad_kind), SchemaError);

    auto bad_provenance = j;
    bad_provenance["provenance"] = "whatever";
    CHECK_THROWS_AS(model_file_from_json(bad_provenance), SchemaError);
}

TEST_CASE("malformed model internals are rejected on load") {
    std::mt19937_64 gen(13);
    auto ds = make_dataset(gen, 20, 2);
    const auto gb = train(LearnerSpec::gbdt(3, 0.2, 2, 1), ds.covariates, ds.outcome);
    auto j = predictor_to_json(gb);
    REQUIRE(j["trees"].size() > 0);

    auto bad_feature = j;
    bad_feature["trees"][0][0][0] = 99;  // split feature beyond n_features
    CHECK_THROWS_AS(predictor_from_json(bad_feature), SchemaError);

    auto bad_child = j;
    bad_child["trees"][0][0][2] = 1000;  // left child out of range
    CHECK_THROWS_AS(predictor_from_json(bad_child), SchemaError);

    const auto en = train(LearnerSpec::elastic_net(0.01), ds.covariates, ds.outcome);
    auto ej = predictor_to_json(en);
    REQUIRE(ej["weights"][0].get<double>() != 0.0);
    ej["feature_scales"][0] = 0.0;
    CHECK_THROWS_AS(predictor_from_json(ej), SchemaError);
}
