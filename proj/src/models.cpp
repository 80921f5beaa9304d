#include "specsep/models.hpp"

#include <algorithm>
#include <set>

#include "model_internal.hpp"
#include "specsep/common.hpp"

namespace specsep::models {

LabelEncoding LabelEncoding::from_labels(const std::vector<std::string>& labels) {
    std::set<std::string> uniq(labels.begin(), labels.end());
    if (uniq.size() != 2) {
        throw ConfigError("expected exactly two classes, got " + std::to_string(uniq.size()));
    }
    LabelEncoding enc;
    auto it = uniq.begin();
    enc.classes[0] = *it++;
    enc.classes[1] = *it;
    return enc;
}

int LabelEncoding::index_of(const std::string& label) const {
    if (label == classes[0]) return 0;
    if (label == classes[1]) return 1;
    throw ConfigError("label '" + label + "' not in trained class set");
}

namespace detail {

std::vector<int> encode_labels(const SpectraMatrix& train, LabelEncoding& enc) {
    if (!train.has_labels()) throw ConfigError("training data has no labels");
    enc = LabelEncoding::from_labels(train.labels);
    std::vector<int> y(train.n_rows);
    for (std::size_t i = 0; i < train.n_rows; ++i) y[i] = enc.index_of(train.labels[i]);
    return y;
}

void check_feature_count(std::size_t model_dim, const SpectraMatrix& data, const char* what) {
    if (data.n_cols != model_dim) {
        throw ConfigError(std::string(what) + ": feature count " + std::to_string(data.n_cols) +
                          " does not match model dimension " + std::to_string(model_dim));
    }
}

}  // namespace detail

namespace {

std::vector<std::string> predict_qda(const QdaModel& m, const SpectraMatrix& data);
std::vector<std::string> predict_oracle(const OracleThresholdModel& m, const SpectraMatrix& data);
std::vector<std::string> predict_logistic(const LogisticModel& m, const SpectraMatrix& data);
std::vector<std::string> predict_knn(const KnnModel& m, const SpectraMatrix& data);
std::vector<std::string> predict_tree(const TreeModel& m, const SpectraMatrix& data);
std::vector<std::string> predict_forest(const ForestModel& m, const SpectraMatrix& data);

}  // namespace

std::vector<std::string> predict(const TrainedModel& model, const SpectraMatrix& data) {
    return std::visit(
        [&](const auto& m) -> std::vector<std::string> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, QdaModel>) return predict_qda(m, data);
            else if constexpr (std::is_same_v<T, OracleThresholdModel>)
                return predict_oracle(m, data);
            else if constexpr (std::is_same_v<T, LogisticModel>) return predict_logistic(m, data);
            else if constexpr (std::is_same_v<T, KnnModel>) return predict_knn(m, data);
            else if constexpr (std::is_same_v<T, TreeModel>) return predict_tree(m, data);
            else return predict_forest(m, data);
        },
        model);
}

double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
    if (predicted.size() != truth.size()) throw ConfigError("accuracy: size mismatch");
    if (predicted.empty()) throw ConfigError("accuracy: empty prediction set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

namespace {

std::vector<std::string> predict_qda(const QdaModel& m, const SpectraMatrix& data) {
    detail::check_feature_count(static_cast<std::size_t>(m.means[0].size()), data, "qda predict");
    const auto X = detail::to_eigen(data);
    std::vector<std::string> out(data.n_rows);
    if (data.n_rows == 0) return out;
    std::array<Eigen::VectorXd, 2> score;
    for (int c = 0; c < 2; ++c) {
        Eigen::MatrixXd centered = X.rowwise() - m.means[c].transpose();
        const Eigen::VectorXd qf = m.factors[c].quadratic_form(centered);
        score[c] = (-0.5 * qf).array() - 0.5 * m.factors[c].log_det + std::log(m.priors[c]);
    }
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        out[i] = m.enc.classes[score[1][idx] > score[0][idx] ? 1 : 0];
    }
    return out;
}

std::vector<std::string> predict_oracle(const OracleThresholdModel& m, const SpectraMatrix& data) {
    detail::check_feature_count(m.dim, data, "oracle predict");
    std::vector<std::string> out(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        double s = 0.0;
        for (double x : data.row(i)) {
            const double d = x - m.mu;
            s += d * d;
        }
        out[i] = s > m.threshold ? m.label_large : m.label_small;
    }
    return out;
}

std::vector<std::string> predict_logistic(const LogisticModel& m, const SpectraMatrix& data) {
    detail::check_feature_count(static_cast<std::size_t>(m.weights.size()), data,
                                "logistic predict");
    const auto X = detail::to_eigen(data);
    std::vector<std::string> out(data.n_rows);
    if (data.n_rows == 0) return out;
    const Eigen::VectorXd z = (X * m.weights).array() + m.bias;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        out[i] = m.enc.classes[z[static_cast<Eigen::Index>(i)] > 0.0 ? 1 : 0];
    }
    return out;
}

std::vector<std::string> predict_knn(const KnnModel& m, const SpectraMatrix& data) {
    detail::check_feature_count(static_cast<std::size_t>(m.train.cols()), data, "knn predict");
    const auto X = detail::to_eigen(data);
    const Eigen::Index n_train = m.train.rows();
    std::vector<std::string> out(data.n_rows);
    const Eigen::VectorXd train_sq = m.train.rowwise().squaredNorm();
    std::vector<std::pair<double, Eigen::Index>> order(static_cast<std::size_t>(n_train));
    for (std::size_t q = 0; q < data.n_rows; ++q) {
        const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(q)).transpose();
        const Eigen::VectorXd d2 =
            (train_sq.array() - 2.0 * (m.train * x).array() + x.squaredNorm()).max(0.0);
        for (Eigen::Index i = 0; i < n_train; ++i) {
            order[static_cast<std::size_t>(i)] = {d2[i], i};
        }
        std::partial_sort(order.begin(), order.begin() + m.k, order.end());
        int votes[2] = {0, 0};
        double dist_sum[2] = {0.0, 0.0};
        for (int j = 0; j < m.k; ++j) {
            const int cls = m.train_y[static_cast<std::size_t>(order[j].second)];
            ++votes[cls];
            dist_sum[cls] += std::sqrt(order[j].first);
        }
        // Vote ties: smaller summed distance wins, then the lower label.
        int winner;
        if (votes[0] != votes[1]) winner = votes[1] > votes[0] ? 1 : 0;
        else winner = dist_sum[1] < dist_sum[0] ? 1 : 0;
        out[q] = m.enc.classes[winner];
    }
    return out;
}

int tree_leaf_vote(const TreeModel& m, std::span<const double> x) {
    int node = 0;
    while (m.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = m.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    const auto& leaf = m.nodes[static_cast<std::size_t>(node)];
    return leaf.class_counts[1] > leaf.class_counts[0] ? 1 : 0;
}

std::vector<std::string> predict_tree(const TreeModel& m, const SpectraMatrix& data) {
    detail::check_feature_count(m.n_features, data, "tree predict");
    std::vector<std::string> out(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        out[i] = m.enc.classes[tree_leaf_vote(m, data.row(i))];
    }
    return out;
}

std::vector<std::string> predict_forest(const ForestModel& m, const SpectraMatrix& data) {
    const Eigen::VectorXd frac = forest_vote_fraction(m, data);
    std::vector<std::string> out(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        out[i] = m.enc.classes[frac[static_cast<Eigen::Index>(i)] > 0.5 ? 1 : 0];
    }
    return out;
}

}  // namespace

Eigen::VectorXd forest_vote_fraction(const ForestModel& m, const SpectraMatrix& data) {
    if (m.trees.empty()) throw ConfigError("forest predict: empty forest");
    detail::check_feature_count(m.n_features, data, "forest predict");
    Eigen::VectorXd votes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.n_rows));
    for (const auto& tree : m.trees) {
        for (std::size_t i = 0; i < data.n_rows; ++i) {
            votes[static_cast<Eigen::Index>(i)] += tree_leaf_vote(tree, data.row(i));
        }
    }
    return votes / static_cast<double>(m.trees.size());
}

}  // namespace specsep::models
