#include "mlrate/model_io.hpp"

#include <fstream>

#include "mlrate/errors.hpp"

namespace mlrate {

using nlohmann::json;

namespace {

json tree_to_json(const GbdtTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    }
    return nodes;
}

GbdtTree tree_from_json(const json& j) {
    GbdtTree tree;
    for (const auto& entry : j) {
        GbdtNode n;
        n.feature = entry.at(0).get<int>();
        n.threshold = entry.at(1).get<double>();
        n.left = entry.at(2).get<int>();
        n.right = entry.at(3).get<int>();
        n.value = entry.at(4).get<double>();
        tree.nodes.push_back(n);
    }
    if (tree.nodes.empty()) {
        throw SchemaError("gbdt tree with no nodes");
    }
    return tree;
}

}  // namespace

json predictor_to_json(const Predictor& model) {
    json j;
    switch (model.kind()) {
        case LearnerKind::Zero:
            j["kind"] = "zero";
            break;
        case LearnerKind::ConstantMean:
            j["kind"] = "constant_mean";
            j["mean"] = std::get<ConstantMeanModel>(model.model()).mean;
            break;
        case LearnerKind::FixedFunction: {
            const auto& m = std::get<FixedFunctionModel>(model.model());
            if (m.name != "identity") {
                throw SchemaError("fixed function '" + m.name + "' is not serializable");
            }
            j["kind"] = "fixed_function";
            j["name"] = m.name;
            break;
        }
        case LearnerKind::ElasticNet: {
            const auto& m = *model.elastic_net();
            j["kind"] = "elastic_net";
            j["weights"] = m.weights;
            j["intercept"] = m.intercept;
            j["feature_means"] = m.feature_means;
            j["feature_scales"] = m.feature_scales;
            j["lambda"] = m.lambda;
            j["alpha_mix"] = m.alpha_mix;
            j["converged"] = m.converged;
            break;
        }
        case LearnerKind::Gbdt: {
            const auto& m = *model.gbdt();
            j["kind"] = "gbdt";
            j["initial_prediction"] = m.initial_prediction;
            j["learning_rate"] = m.learning_rate;
            j["n_features"] = m.n_features;
            j["max_depth"] = m.max_depth;
            json trees = json::array();
            for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
            j["trees"] = std::move(trees);
            break;
        }
    }
    return j;
}

Predictor predictor_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") {
        return Predictor(ZeroModel{});
    }
    if (kind == "constant_mean") {
        return Predictor(ConstantMeanModel{j.at("mean").get<double>()});
    }
    if (kind == "fixed_function") {
        const std::string name = j.at("name").get<std::string>();
        if (name != "identity") {
            throw SchemaError("unsupported fixed function '" + name + "'");
        }
        auto spec = LearnerSpec::identity();
        return Predictor(FixedFunctionModel{spec.fixed_fn, spec.fixed_name});
    }
    if (kind == "elastic_net") {
        ElasticNetModel m;
        m.weights = j.at("weights").get<std::vector<double>>();
        m.intercept = j.at("intercept").get<double>();
        m.feature_means = j.at("feature_means").get<std::vector<double>>();
        m.feature_scales = j.at("feature_scales").get<std::vector<double>>();
        m.lambda = j.at("lambda").get<double>();
        m.alpha_mix = j.at("alpha_mix").get<double>();
        m.converged = j.at("converged").get<bool>();
        if (m.weights.size() != m.feature_means.size() ||
            m.weights.size() != m.feature_scales.size()) {
            throw SchemaError("elastic_net model arrays misaligned");
        }
        for (std::size_t i = 0; i < m.weights.size(); ++i) {
            if (m.weights[i] != 0.0 && !(m.feature_scales[i] > 0.0)) {
                throw SchemaError("elastic_net model has a non-zero weight on a zero scale");
            }
        }
        return Predictor(std::move(m));
    }
    if (kind == "gbdt") {
        GbdtModel m;
        m.initial_prediction = j.at("initial_prediction").get<double>();
        m.learning_rate = j.at("learning_rate").get<double>();
        m.n_features = j.at("n_features").get<std::size_t>();
        m.max_depth = j.at("max_depth").get<std::size_t>();
        for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
        for (const auto& tree : m.trees) {
            const int count = static_cast<int>(tree.nodes.size());
            for (const auto& node : tree.nodes) {
                if (node.is_leaf()) continue;
                if (node.feature >= static_cast<int>(m.n_features) || node.left < 0 ||
                    node.right < 0 || node.left >= count || node.right >= count) {
                    throw SchemaError("gbdt model references an out-of-range node or feature");
                }
            }
        }
        return Predictor(std::move(m));
    }
    throw SchemaError("unknown model kind '" + kind + "'");
}

ModelFile model_file_from_crossfit(const CrossFitResult& result,
                                   std::vector<std::string> feature_columns) {
    ModelFile file;
    file.provenance = ModelFile::kProvenanceCrossFitted;
    file.feature_columns = std::move(feature_columns);
    file.models = result.models;
    file.fold_assignment = result.fold_assignment;
    file.predictions = result.predictions;
    file.g_bar = result.g_bar;
    file.k = result.k;
    return file;
}

ModelFile model_file_from_preperiod(Predictor model, std::vector<std::string> feature_columns) {
    ModelFile file;
    file.provenance = ModelFile::kProvenancePrePeriod;
    file.feature_columns = std::move(feature_columns);
    file.models.push_back(std::move(model));
    return file;
}

json model_file_to_json(const ModelFile& file) {
    json j;
    j["format_version"] = ModelFile::kFormatVersion;
    j["provenance"] = file.provenance;
    j["feature_columns"] = file.feature_columns;
    json models = json::array();
    for (const auto& m : file.models) models.push_back(predictor_to_json(m));
    j["models"] = std::move(models);
    if (file.provenance == ModelFile::kProvenanceCrossFitted) {
        j["fold_assignment"] = file.fold_assignment;
        j["predictions"] = file.predictions;
        j["g_bar"] = file.g_bar;
        j["k"] = file.k;
    }
    return j;
}

ModelFile model_file_from_json(const json& j) {
    if (!j.contains("format_version") || !j.at("format_version").is_number_integer() ||
        j.at("format_version").get<int>() != ModelFile::kFormatVersion) {
        throw SchemaError("unsupported model version");
    }
    ModelFile file;
    file.provenance = j.at("provenance").get<std::string>();
    if (file.provenance != ModelFile::kProvenanceCrossFitted &&
        file.provenance != ModelFile::kProvenancePrePeriod) {
        throw SchemaError("unknown provenance '" + file.provenance + "'");
    }
    file.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    for (const auto& m : j.at("models")) file.models.push_back(predictor_from_json(m));
    if (file.models.empty()) {
        throw SchemaError("model file contains no models");
    }
    if (file.provenance == ModelFile::kProvenanceCrossFitted) {
        file.fold_assignment = j.at("fold_assignment").get<std::vector<std::size_t>>();
        file.predictions = j.at("predictions").get<std::vector<double>>();
        file.g_bar = j.at("g_bar").get<double>();
        file.k = j.at("k").get<std::size_t>();
    }
    return file;
}

void save_model_file(const std::string& path, const ModelFile& file) {
    std::ofstream out(path);
    if (!out) {
        throw SchemaError("cannot write model file: " + path);
    }
    out << model_file_to_json(file).dump(2) << '\n';
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open model file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("malformed model file: " + std::string(e.what()));
    }
    return model_file_from_json(j);
}

}  // namespace mlrate
