#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "mlrate/crossfit.hpp"
#include "mlrate/learners.hpp"

namespace mlrate {

nlohmann::json predictor_to_json(const Predictor& model);
// Throws SchemaError for unknown kinds or non-serializable fixed functions.
Predictor predictor_from_json(const nlohmann::json& j);

// Versioned on-disk model format, shared by the cross-fitted and pre-period
// training modes. The provenance flag is the leakage guard: only pre_period
// models may be applied to produce a reusable g column.
struct ModelFile {
    static constexpr int kFormatVersion = 1;
    static constexpr const char* kProvenanceCrossFitted = "cross_fitted";
    static constexpr const char* kProvenancePrePeriod = "pre_period";

    std::string provenance;
    std::vector<std::string> feature_columns;
    std::vector<Predictor> models;  // one for pre_period, K for cross_fitted

    // populated for cross_fitted files only
    std::vector<std::size_t> fold_assignment;
    std::vector<double> predictions;
    double g_bar = 0.0;
    std::size_t k = 0;
};

ModelFile model_file_from_crossfit(const CrossFitResult& result,
                                   std::vector<std::string> feature_columns);
ModelFile model_file_from_preperiod(Predictor model, std::vector<std::string> feature_columns);

nlohmann::json model_file_to_json(const ModelFile& file);
ModelFile model_file_from_json(const nlohmann::json& j);

void save_model_file(const std::string& path, const ModelFile& file);
ModelFile load_model_file(const std::string& path);

}  // namespace mlrate
