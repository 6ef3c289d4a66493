#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mlrate/numerics.hpp"

namespace mlrate {

enum class LearnerKind { Zero, ConstantMean, FixedFunction, ElasticNet, Gbdt };

std::string learner_kind_name(LearnerKind kind);

// Recipe for a supervised learner. Defaults mirror common off-the-shelf
// settings; cv_folds > 0 turns on internal hyperparameter selection
// (lambda for the elastic net, tree count for gbdt).
struct LearnerSpec {
    LearnerKind kind = LearnerKind::Gbdt;

    // elastic net
    double lambda = 1.0;
    double alpha_mix = 0.5;
    double tol = 1e-6;
    std::size_t max_iter = 1000;

    // gbdt
    std::size_t tree_count = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 3;
    std::size_t min_samples_leaf = 1;

    // fixed function
    std::function<double(std::span<const double>)> fixed_fn;
    std::string fixed_name;

    std::uint64_t seed_offset = 0;
    std::size_t cv_folds = 0;  // 0 = no internal selection

    static LearnerSpec zero();
    static LearnerSpec constant_mean();
    static LearnerSpec elastic_net(double lambda = 1.0, double alpha_mix = 0.5,
                                   double tol = 1e-6, std::size_t max_iter = 1000);
    static LearnerSpec gbdt(std::size_t tree_count = 100, double learning_rate = 0.1,
                            std::size_t max_depth = 3, std::size_t min_samples_leaf = 1);
    static LearnerSpec fixed_function(std::function<double(std::span<const double>)> fn,
                                      std::string name);
    // Fixed function returning the first covariate.
    static LearnerSpec identity();
};

struct ZeroModel {};

struct ConstantMeanModel {
    double mean = 0.0;
};

struct FixedFunctionModel {
    std::function<double(std::span<const double>)> fn;
    std::string name;
};

// Linear model fit by cyclic coordinate descent on internally standardized
// features. Weights live on the standardized scale; prediction maps back.
struct ElasticNetModel {
    std::vector<double> weights;
    double intercept = 0.0;  // target mean; columns are centered
    std::vector<double> feature_means;
    std::vector<double> feature_scales;
    double lambda = 0.0;
    double alpha_mix = 0.0;
    bool converged = true;
    std::size_t iterations = 0;
    std::vector<double> objective_history;  // one entry per sweep

    double predict_row(std::span<const double> x) const;
};

struct GbdtNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct GbdtTree {
    std::vector<GbdtNode> nodes;

    double predict_row(std::span<const double> x) const;
};

// Squared-error boosting over depth-limited regression trees with exact
// greedy variance-reduction splits.
struct GbdtModel {
    double initial_prediction = 0.0;
    double learning_rate = 0.1;
    std::size_t n_features = 0;
    std::size_t max_depth = 0;
    std::vector<GbdtTree> trees;

    double predict_row(std::span<const double> x) const;
    // Prediction using only the first m trees.
    double predict_row_prefix(std::span<const double> x, std::size_t m) const;
};

// Trained prediction function g. Value type; immutable and cheap to share.
class Predictor {
  public:
    using Model =
        std::variant<ZeroModel, ConstantMeanModel, FixedFunctionModel, ElasticNetModel, GbdtModel>;

    Predictor() : model_(ZeroModel{}) {}
    explicit Predictor(Model model) : model_(std::move(model)) {}

    LearnerKind kind() const;

    double predict_row(std::span<const double> x) const;
    std::vector<double> predict(const DenseMatrix& features) const;

    const ElasticNetModel* elastic_net() const { return std::get_if<ElasticNetModel>(&model_); }
    const GbdtModel* gbdt() const { return std::get_if<GbdtModel>(&model_); }
    const Model& model() const { return model_; }

  private:
    void check_features(std::size_t cols) const;

    Model model_;
};

Predictor train(const LearnerSpec& spec, const DenseMatrix& features,
                std::span<const double> targets);

ElasticNetModel elastic_net_fit(const DenseMatrix& features, std::span<const double> targets,
                                double lambda, double alpha_mix, double tol,
                                std::size_t max_iter);

GbdtModel gbdt_fit(const DenseMatrix& features, std::span<const double> targets,
                   std::size_t tree_count, double learning_rate, std::size_t max_depth,
                   std::size_t min_samples_leaf);

std::vector<double> predict(const Predictor& model, const DenseMatrix& features);

}  // namespace mlrate
