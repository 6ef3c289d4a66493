#include "mlrate/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mlrate {

std::string learner_kind_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::Zero: return "zero";
        case LearnerKind::ConstantMean: return "constant_mean";
        case LearnerKind::FixedFunction: return "fixed_function";
        case LearnerKind::ElasticNet: return "elastic_net";
        case LearnerKind::Gbdt: return "gbdt";
    }
    return "unknown";
}

LearnerSpec LearnerSpec::zero() {
    LearnerSpec s;
    s.kind = LearnerKind::Zero;
    return s;
}

LearnerSpec LearnerSpec::constant_mean() {
    LearnerSpec s;
    s.kind = LearnerKind::ConstantMean;
    return s;
}

LearnerSpec LearnerSpec::elastic_net(double lambda, double alpha_mix, double tol,
                                     std::size_t max_iter) {
    LearnerSpec s;
    s.kind = LearnerKind::ElasticNet;
    s.lambda = lambda;
    s.alpha_mix = alpha_mix;
    s.tol = tol;
    s.max_iter = max_iter;
    return s;
}

LearnerSpec LearnerSpec::gbdt(std::size_t tree_count, double learning_rate, std::size_t max_depth,
                              std::size_t min_samples_leaf) {
    LearnerSpec s;
    s.kind = LearnerKind::Gbdt;
    s.tree_count = tree_count;
    s.learning_rate = learning_rate;
    s.max_depth = max_depth;
    s.min_samples_leaf = min_samples_leaf;
    return s;
}

LearnerSpec LearnerSpec::fixed_function(std::function<double(std::span<const double>)> fn,
                                        std::string name) {
    LearnerSpec s;
    s.kind = LearnerKind::FixedFunction;
    s.fixed_fn = std::move(fn);
    s.fixed_name = std::move(name);
    return s;
}

LearnerSpec LearnerSpec::identity() {
    return fixed_function(
        [](std::span<const double> x) {
            if (x.empty()) {
                throw std::invalid_argument("identity learner: empty covariate row");
            }
            return x[0];
        },
        "identity");
}

double ElasticNetModel::predict_row(std::span<const double> x) const {
    double out = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] != 0.0) {
            out += weights[j] * (x[j] - feature_means[j]) / feature_scales[j];
        }
    }
    return out;
}

double GbdtTree::predict_row(std::span<const double> x) const {
    int id = 0;
    while (!nodes[id].is_leaf()) {
        const auto& node = nodes[id];
        id = x[node.feature] < node.threshold ? node.left : node.right;
    }
    return nodes[id].value;
}

double GbdtModel::predict_row(std::span<const double> x) const {
    return predict_row_prefix(x, trees.size());
}

double GbdtModel::predict_row_prefix(std::span<const double> x, std::size_t m) const {
    double out = initial_prediction;
    for (std::size_t t = 0; t < m && t < trees.size(); ++t) {
        out += learning_rate * trees[t].predict_row(x);
    }
    return out;
}

LearnerKind Predictor::kind() const {
    switch (model_.index()) {
        case 0: return LearnerKind::Zero;
        case 1: return LearnerKind::ConstantMean;
        case 2: return LearnerKind::FixedFunction;
        case 3: return LearnerKind::ElasticNet;
        default: return LearnerKind::Gbdt;
    }
}

void Predictor::check_features(std::size_t cols) const {
    std::size_t expected = 0;
    if (const auto* en = std::get_if<ElasticNetModel>(&model_)) expected = en->weights.size();
    if (const auto* gb = std::get_if<GbdtModel>(&model_)) expected = gb->n_features;
    if (expected != 0 && cols != expected) {
        throw std::invalid_argument("predict: feature count mismatch (expected " +
                                    std::to_string(expected) + ", got " + std::to_string(cols) +
                                    ")");
    }
}

double Predictor::predict_row(std::span<const double> x) const {
    check_features(x.size());
    return std::visit(
        [&x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ZeroModel>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, ConstantMeanModel>) {
                return m.mean;
            } else if constexpr (std::is_same_v<T, FixedFunctionModel>) {
                return m.fn(x);
            } else {
                return m.predict_row(x);
            }
        },
        model_);
}

std::vector<double> Predictor::predict(const DenseMatrix& features) const {
    check_features(features.cols());
    std::vector<double> out(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict_row(features.row(r));
    return out;
}

std::vector<double> predict(const Predictor& model, const DenseMatrix& features) {
    return model.predict(features);
}

namespace {

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

// Column-major standardized copy of the features: mean 0, 1/n-norm 1.
struct Standardized {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> columns;  // d contiguous columns of length n
    std::vector<double> means;
    std::vector<double> scales;

    double* col(std::size_t j) { return columns.data() + j * n; }
    const double* col(std::size_t j) const { return columns.data() + j * n; }
};

Standardized standardize(const DenseMatrix& features) {
    Standardized s;
    s.n = features.rows();
    s.d = features.cols();
    s.columns.assign(s.n * s.d, 0.0);
    s.means.assign(s.d, 0.0);
    s.scales.assign(s.d, 0.0);
    for (std::size_t j = 0; j < s.d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) mean += features(i, j);
        mean /= static_cast<double>(s.n);
        double ss = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            const double c = features(i, j) - mean;
            s.col(j)[i] = c;
            ss += c * c;
        }
        const double scale = std::sqrt(ss / static_cast<double>(s.n));
        s.means[j] = mean;
        s.scales[j] = scale;
        if (scale > 0.0) {
            for (std::size_t i = 0; i < s.n; ++i) s.col(j)[i] /= scale;
        }
    }
    return s;
}

void check_training_input(const DenseMatrix& features, std::span<const double> targets) {
    if (features.rows() != targets.size()) {
        throw std::invalid_argument("train: feature rows must match target length");
    }
    if (features.rows() < 2) {
        throw std::invalid_argument("train: need at least 2 rows");
    }
    if (!features.all_finite()) {
        throw std::invalid_argument("train: non-finite feature entry");
    }
    for (double v : targets) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("train: non-finite target entry");
        }
    }
}

}  // namespace

ElasticNetModel elastic_net_fit(const DenseMatrix& features, std::span<const double> targets,
                                double lambda, double alpha_mix, double tol,
                                std::size_t max_iter) {
    check_training_input(features, targets);
    if (!(lambda >= 0.0) || !(alpha_mix >= 0.0 && alpha_mix <= 1.0) || !(tol > 0.0) ||
        max_iter == 0) {
        throw std::invalid_argument("elastic_net_fit: hyperparameters out of range");
    }

    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    const auto s = standardize(features);

    ElasticNetModel model;
    model.lambda = lambda;
    model.alpha_mix = alpha_mix;
    model.feature_means = s.means;
    model.feature_scales = s.scales;
    model.weights.assign(d, 0.0);
    model.intercept = targets.empty() ? 0.0 : sample_mean(targets);

    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = targets[i] - model.intercept;

    const double inv_n = 1.0 / static_cast<double>(n);
    const double l1 = lambda * alpha_mix;
    const double denom = 1.0 + lambda * (1.0 - alpha_mix);

    const auto objective = [&]() {
        double sse = 0.0;
        for (double r : resid) sse += r * r;
        double l1_term = 0.0, l2_term = 0.0;
        for (double w : model.weights) {
            l1_term += std::abs(w);
            l2_term += w * w;
        }
        return 0.5 * inv_n * sse + lambda * (alpha_mix * l1_term + 0.5 * (1.0 - alpha_mix) * l2_term);
    };

    model.converged = false;
    for (std::size_t sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (s.scales[j] == 0.0) continue;  // constant feature stays at weight 0
            const double* xj = s.col(j);
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += xj[i] * resid[i];
            const double rho = model.weights[j] + dot * inv_n;
            const double w_new = soft_threshold(rho, l1) / denom;
            const double delta = w_new - model.weights[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= delta * xj[i];
                model.weights[j] = w_new;
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        model.objective_history.push_back(objective());
        model.iterations = sweep + 1;
        if (max_delta < tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

namespace {

struct ScanState {
    std::size_t acc_count = 0;
    double acc_sum = 0.0;
    double last_value = 0.0;
    bool has_last = false;
};

struct FrontierEntry {
    int node = 0;  // index into tree.nodes
    std::size_t count = 0;
    double sum = 0.0;
    double rmin = 0.0;
    double rmax = 0.0;
    bool splittable = false;
    // best split found so far
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
};

}  // namespace

GbdtModel gbdt_fit(const DenseMatrix& features, std::span<const double> targets,
                   std::size_t tree_count, double learning_rate, std::size_t max_depth,
                   std::size_t min_samples_leaf) {
    check_training_input(features, targets);
    if (!(learning_rate > 0.0 && learning_rate <= 1.0) || max_depth < 1 ||
        min_samples_leaf < 1) {
        throw std::invalid_argument("gbdt_fit: hyperparameters out of range");
    }

    const std::size_t n = features.rows();
    const std::size_t d = features.cols();

    GbdtModel model;
    model.initial_prediction = sample_mean(targets);
    model.learning_rate = learning_rate;
    model.n_features = d;
    model.max_depth = max_depth;
    model.trees.reserve(tree_count);

    // Column-major feature copy plus per-feature index order sorted by
    // (value, row); ties on value keep row order so training is deterministic.
    std::vector<double> col(n * d);
    std::vector<std::vector<std::uint32_t>> order(d);
    for (std::size_t j = 0; j < d; ++j) {
        double* cj = col.data() + j * n;
        for (std::size_t i = 0; i < n; ++i) cj[i] = features(i, j);
        order[j].resize(n);
        std::iota(order[j].begin(), order[j].end(), 0u);
        std::sort(order[j].begin(), order[j].end(), [cj](std::uint32_t a, std::uint32_t b) {
            if (cj[a] != cj[b]) return cj[a] < cj[b];
            return a < b;
        });
    }

    std::vector<double> resid(targets.begin(), targets.end());
    for (auto& r : resid) r -= model.initial_prediction;

    std::vector<std::int32_t> node_of(n);
    std::vector<int> slot_of;          // tree node id -> frontier slot (or -1)
    std::vector<ScanState> scan;       // per frontier slot

    for (std::size_t m = 0; m < tree_count; ++m) {
        GbdtTree tree;
        tree.nodes.push_back(GbdtNode{});
        std::fill(node_of.begin(), node_of.end(), 0);

        std::vector<FrontierEntry> frontier(1);
        frontier[0].node = 0;
        frontier[0].count = n;
        frontier[0].rmin = resid[0];
        frontier[0].rmax = resid[0];
        for (std::size_t i = 0; i < n; ++i) {
            frontier[0].sum += resid[i];
            frontier[0].rmin = std::min(frontier[0].rmin, resid[i]);
            frontier[0].rmax = std::max(frontier[0].rmax, resid[i]);
        }
        // Leaf values default to the node mean; overwritten if the node splits.
        tree.nodes[0].value = frontier[0].sum / static_cast<double>(frontier[0].count);

        for (std::size_t depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
            bool any_splittable = false;
            for (auto& entry : frontier) {
                entry.splittable = entry.count >= 2 * min_samples_leaf && entry.count >= 2 &&
                                   entry.rmax > entry.rmin;
                entry.best_gain = 0.0;
                entry.best_feature = -1;
                any_splittable = any_splittable || entry.splittable;
            }
            if (!any_splittable) break;

            slot_of.assign(tree.nodes.size(), -1);
            for (std::size_t sidx = 0; sidx < frontier.size(); ++sidx) {
                slot_of[frontier[sidx].node] = static_cast<int>(sidx);
            }

            scan.assign(frontier.size(), ScanState{});
            for (std::size_t j = 0; j < d; ++j) {
                for (auto& st : scan) st = ScanState{};
                const double* cj = col.data() + j * n;
                for (const std::uint32_t idx : order[j]) {
                    const int slot = slot_of[node_of[idx]];
                    if (slot < 0 || !frontier[slot].splittable) continue;
                    auto& st = scan[slot];
                    auto& entry = frontier[slot];
                    const double v = cj[idx];
                    if (st.has_last && v > st.last_value && st.acc_count >= min_samples_leaf &&
                        entry.count - st.acc_count >= min_samples_leaf) {
                        const double lc = static_cast<double>(st.acc_count);
                        const double rc = static_cast<double>(entry.count - st.acc_count);
                        const double rs = entry.sum - st.acc_sum;
                        const double gain = st.acc_sum * st.acc_sum / lc + rs * rs / rc -
                                            entry.sum * entry.sum /
                                                static_cast<double>(entry.count);
                        if (gain > entry.best_gain) {
                            double thr = st.last_value + (v - st.last_value) / 2.0;
                            if (!(thr > st.last_value)) thr = v;  // adjacent doubles
                            entry.best_gain = gain;
                            entry.best_feature = static_cast<int>(j);
                            entry.best_threshold = thr;
                        }
                    }
                    ++st.acc_count;
                    st.acc_sum += resid[idx];
                    st.last_value = v;
                    st.has_last = true;
                }
            }

            std::vector<FrontierEntry> next;
            for (auto& entry : frontier) {
                if (!entry.splittable || entry.best_feature < 0 || !(entry.best_gain > 0.0)) {
                    slot_of[entry.node] = -1;
                    continue;
                }
                auto& node = tree.nodes[entry.node];
                node.feature = entry.best_feature;
                node.threshold = entry.best_threshold;
                node.left = static_cast<int>(tree.nodes.size());
                node.right = node.left + 1;
                tree.nodes.push_back(GbdtNode{});
                tree.nodes.push_back(GbdtNode{});
                FrontierEntry left, right;
                left.node = node.left;
                right.node = node.right;
                left.rmin = std::numeric_limits<double>::infinity();
                left.rmax = -left.rmin;
                right.rmin = left.rmin;
                right.rmax = left.rmax;
                next.push_back(left);
                next.push_back(right);
            }
            if (next.empty()) break;

            // Route rows of split nodes to their children and collect child stats.
            std::vector<int> child_slot(tree.nodes.size(), -1);
            for (std::size_t sidx = 0; sidx < next.size(); ++sidx) {
                child_slot[next[sidx].node] = static_cast<int>(sidx);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const auto& node = tree.nodes[node_of[i]];
                if (node.is_leaf()) continue;
                const std::int32_t child =
                    col[static_cast<std::size_t>(node.feature) * n + i] < node.threshold
                        ? node.left
                        : node.right;
                node_of[i] = child;
                auto& entry = next[child_slot[child]];
                ++entry.count;
                entry.sum += resid[i];
                entry.rmin = std::min(entry.rmin, resid[i]);
                entry.rmax = std::max(entry.rmax, resid[i]);
            }
            for (auto& entry : next) {
                tree.nodes[entry.node].value = entry.sum / static_cast<double>(entry.count);
            }
            frontier = std::move(next);
        }

        for (std::size_t i = 0; i < n; ++i) {
            resid[i] -= learning_rate * tree.nodes[node_of[i]].value;
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

namespace {

// Deterministic contiguous folds over row indices, for internal CV only.
std::vector<std::pair<std::size_t, std::size_t>> cv_ranges(std::size_t n, std::size_t folds) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t base = n / folds;
    const std::size_t rem = n % folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < rem ? 1 : 0);
        out.emplace_back(pos, pos + size);
        pos += size;
    }
    return out;
}

struct CvSplit {
    DenseMatrix train_x;
    std::vector<double> train_y;
    DenseMatrix valid_x;
    std::vector<double> valid_y;
};

CvSplit make_cv_split(const DenseMatrix& x, std::span<const double> y, std::size_t lo,
                      std::size_t hi) {
    CvSplit split;
    std::vector<std::size_t> train_rows, valid_rows;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (i >= lo && i < hi) {
            valid_rows.push_back(i);
        } else {
            train_rows.push_back(i);
        }
    }
    split.train_x = x.gather_rows(train_rows);
    split.valid_x = x.gather_rows(valid_rows);
    for (auto i : train_rows) split.train_y.push_back(y[i]);
    for (auto i : valid_rows) split.valid_y.push_back(y[i]);
    return split;
}

LearnerSpec tune_by_cv(const LearnerSpec& spec, const DenseMatrix& x, std::span<const double> y) {
    const std::size_t folds = std::min<std::size_t>(spec.cv_folds, x.rows() / 2);
    LearnerSpec tuned = spec;
    tuned.cv_folds = 0;
    if (folds < 2) return tuned;
    const auto ranges = cv_ranges(x.rows(), folds);

    if (spec.kind == LearnerKind::ElasticNet) {
        const std::vector<double> grid{0.01, 0.1, 1.0, 10.0};
        double best_mse = std::numeric_limits<double>::infinity();
        double best_lambda = spec.lambda;
        for (double lam : grid) {
            double mse = 0.0;
            std::size_t count = 0;
            for (const auto& [lo, hi] : ranges) {
                const auto split = make_cv_split(x, y, lo, hi);
                const auto model = elastic_net_fit(split.train_x, split.train_y, lam,
                                                   spec.alpha_mix, spec.tol, spec.max_iter);
                for (std::size_t i = 0; i < split.valid_y.size(); ++i) {
                    const double e = model.predict_row(split.valid_x.row(i)) - split.valid_y[i];
                    mse += e * e;
                    ++count;
                }
            }
            mse /= static_cast<double>(count);
            if (mse < best_mse) {
                best_mse = mse;
                best_lambda = lam;
            }
        }
        tuned.lambda = best_lambda;
    } else if (spec.kind == LearnerKind::Gbdt) {
        // One fit per fold; every prefix length is scored from the same fit.
        std::vector<double> prefix_sse(spec.tree_count + 1, 0.0);
        std::size_t count = 0;
        for (const auto& [lo, hi] : ranges) {
            const auto split = make_cv_split(x, y, lo, hi);
            const auto model =
                gbdt_fit(split.train_x, split.train_y, spec.tree_count, spec.learning_rate,
                         spec.max_depth, spec.min_samples_leaf);
            for (std::size_t i = 0; i < split.valid_y.size(); ++i) {
                double pred = model.initial_prediction;
                const auto row = split.valid_x.row(i);
                const double e0 = pred - split.valid_y[i];
                prefix_sse[0] += e0 * e0;
                for (std::size_t t = 0; t < model.trees.size(); ++t) {
                    pred += model.learning_rate * model.trees[t].predict_row(row);
                    const double e = pred - split.valid_y[i];
                    prefix_sse[t + 1] += e * e;
                }
                ++count;
            }
        }
        (void)count;
        std::size_t best_m = spec.tree_count;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t <= spec.tree_count; ++t) {
            if (prefix_sse[t] < best) {
                best = prefix_sse[t];
                best_m = t;
            }
        }
        tuned.tree_count = best_m;
    }
    return tuned;
}

}  // namespace

Predictor train(const LearnerSpec& spec, const DenseMatrix& features,
                std::span<const double> targets) {
    check_training_input(features, targets);
    LearnerSpec effective = spec;
    if (spec.cv_folds > 0 &&
        (spec.kind == LearnerKind::ElasticNet || spec.kind == LearnerKind::Gbdt)) {
        effective = tune_by_cv(spec, features, targets);
    }
    switch (effective.kind) {
        case LearnerKind::Zero:
            return Predictor(ZeroModel{});
        case LearnerKind::ConstantMean:
            return Predictor(ConstantMeanModel{sample_mean(targets)});
        case LearnerKind::FixedFunction:
            if (!effective.fixed_fn) {
                throw std::invalid_argument("train: fixed-function learner without a function");
            }
            return Predictor(FixedFunctionModel{effective.fixed_fn, effective.fixed_name});
        case LearnerKind::ElasticNet:
            return Predictor(elastic_net_fit(features, targets, effective.lambda,
                                             effective.alpha_mix, effective.tol,
                                             effective.max_iter));
        case LearnerKind::Gbdt:
            return Predictor(gbdt_fit(features, targets, effective.tree_count,
                                      effective.learning_rate, effective.max_depth,
                                      effective.min_samples_leaf));
    }
    throw std::invalid_argument("train: unknown learner kind");
}

}  // namespace mlrate
