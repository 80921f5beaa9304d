#include "specsep/common.hpp"
#include "specsep/models.hpp"

namespace specsep::models {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
    return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json a;
    a["rows"] = m.rows();
    a["cols"] = m.cols();
    json vals = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) vals.push_back(m(i, j));
    }
    a["values"] = vals;
    return a;
}

Eigen::MatrixXd mat_from_json(const json& a) {
    Eigen::MatrixXd m(a.at("rows").get<Eigen::Index>(), a.at("cols").get<Eigen::Index>());
    const auto& vals = a.at("values");
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = vals.at(k++);
    }
    return m;
}

json classes_to_json(const LabelEncoding& enc) { return json::array({enc.classes[0], enc.classes[1]}); }

LabelEncoding classes_from_json(const json& a) {
    LabelEncoding enc;
    enc.classes[0] = a.at(0).get<std::string>();
    enc.classes[1] = a.at(1).get<std::string>();
    return enc;
}

json tree_to_json(const TreeModel& t) {
    json j;
    j["classes"] = classes_to_json(t.enc);
    j["n_features"] = t.n_features;
    j["max_depth"] = t.max_depth ? json(*t.max_depth) : json(nullptr);
    j["min_leaf"] = t.min_leaf;
    json nodes = json::array();
    for (const auto& nd : t.nodes) {
        nodes.push_back(json{{"feature", nd.feature},
                             {"threshold", nd.threshold},
                             {"left", nd.left},
                             {"right", nd.right},
                             {"cover", nd.cover},
                             {"counts", json::array({nd.class_counts[0], nd.class_counts[1]})}});
    }
    j["nodes"] = nodes;
    return j;
}

TreeModel tree_from_json(const json& j) {
    TreeModel t;
    t.enc = classes_from_json(j.at("classes"));
    t.n_features = j.at("n_features").get<std::size_t>();
    if (!j.at("max_depth").is_null()) t.max_depth = j.at("max_depth").get<int>();
    t.min_leaf = j.at("min_leaf").get<int>();
    for (const auto& nj : j.at("nodes")) {
        TreeNode nd;
        nd.feature = nj.at("feature").get<int>();
        nd.threshold = nj.at("threshold").get<double>();
        nd.left = nj.at("left").get<int>();
        nd.right = nj.at("right").get<int>();
        nd.cover = nj.at("cover").get<double>();
        nd.class_counts = {nj.at("counts").at(0).get<double>(),
                           nj.at("counts").at(1).get<double>()};
        t.nodes.push_back(nd);
    }
    return t;
}

}  // namespace

nlohmann::json to_json(const TrainedModel& model) {
    json j;
    j["format_version"] = 1;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, QdaModel>) {
                j["family"] = "qda";
                j["classes"] = classes_to_json(m.enc);
                j["lambda"] = m.lambda;
                j["priors"] = json::array({m.priors[0], m.priors[1]});
                j["means"] = json::array({vec_to_json(m.means[0]), vec_to_json(m.means[1])});
                json factors = json::array();
                for (const auto& f : m.factors) {
                    json fj;
                    fj["log_det"] = f.log_det;
                    if (const auto* dense = std::get_if<QdaClassFactor::Dense>(&f.rep)) {
                        fj["kind"] = "dense";
                        fj["chol_lower"] = mat_to_json(dense->chol_lower);
                    } else {
                        const auto& dual = std::get<QdaClassFactor::Dual>(f.rep);
                        fj["kind"] = "dual";
                        fj["ridge"] = dual.ridge;
                        fj["weights"] = vec_to_json(dual.weights);
                        fj["basis"] = mat_to_json(dual.basis);
                    }
                    factors.push_back(fj);
                }
                j["factors"] = factors;
            } else if constexpr (std::is_same_v<T, OracleThresholdModel>) {
                j["family"] = "oracle_threshold";
                j["dim"] = m.dim;
                j["mu"] = m.mu;
                j["sigma1"] = m.sigma1;
                j["sigma2"] = m.sigma2;
                j["threshold"] = m.threshold;
                j["label_small"] = m.label_small;
                j["label_large"] = m.label_large;
            } else if constexpr (std::is_same_v<T, LogisticModel>) {
                j["family"] = "logistic";
                j["classes"] = classes_to_json(m.enc);
                j["weights"] = vec_to_json(m.weights);
                j["bias"] = m.bias;
                j["l2_strength"] = m.l2_strength;
                j["max_iter"] = m.max_iter;
                j["converged"] = m.converged;
                j["iterations"] = m.iterations;
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                j["family"] = "knn";
                j["classes"] = classes_to_json(m.enc);
                j["k"] = m.k;
                j["train"] = mat_to_json(m.train);
                j["train_y"] = m.train_y;
            } else if constexpr (std::is_same_v<T, TreeModel>) {
                j["family"] = "tree";
                j["tree"] = tree_to_json(m);
            } else {
                j["family"] = "forest";
                j["classes"] = classes_to_json(m.enc);
                j["n_features"] = m.n_features;
                j["max_depth"] = m.max_depth ? json(*m.max_depth) : json(nullptr);
                j["seed"] = m.seed;
                json trees = json::array();
                for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
                j["trees"] = trees;
            }
        },
        model);
    return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
    const auto family = j.at("family").get<std::string>();
    if (j.at("format_version").get<int>() != 1) {
        throw DataError("model_from_json: unsupported format version");
    }
    if (family == "qda") {
        QdaModel m;
        m.enc = classes_from_json(j.at("classes"));
        m.lambda = j.at("lambda").get<double>();
        m.priors = {j.at("priors").at(0).get<double>(), j.at("priors").at(1).get<double>()};
        m.means = {vec_from_json(j.at("means").at(0)), vec_from_json(j.at("means").at(1))};
        for (int c = 0; c < 2; ++c) {
            const auto& fj = j.at("factors").at(c);
            auto& f = m.factors[static_cast<std::size_t>(c)];
            f.log_det = fj.at("log_det").get<double>();
            if (fj.at("kind") == "dense") {
                f.rep = QdaClassFactor::Dense{mat_from_json(fj.at("chol_lower"))};
            } else {
                QdaClassFactor::Dual dual;
                dual.ridge = fj.at("ridge").get<double>();
                dual.weights = vec_from_json(fj.at("weights"));
                dual.basis = mat_from_json(fj.at("basis"));
                f.rep = std::move(dual);
            }
        }
        return m;
    }
    if (family == "oracle_threshold") {
        OracleThresholdModel m;
        m.dim = j.at("dim").get<std::size_t>();
        m.mu = j.at("mu").get<double>();
        m.sigma1 = j.at("sigma1").get<double>();
        m.sigma2 = j.at("sigma2").get<double>();
        m.threshold = j.at("threshold").get<double>();
        m.label_small = j.at("label_small").get<std::string>();
        m.label_large = j.at("label_large").get<std::string>();
        return m;
    }
    if (family == "logistic") {
        LogisticModel m;
        m.enc = classes_from_json(j.at("classes"));
        m.weights = vec_from_json(j.at("weights"));
        m.bias = j.at("bias").get<double>();
        m.l2_strength = j.at("l2_strength").get<double>();
        m.max_iter = j.at("max_iter").get<int>();
        m.converged = j.at("converged").get<bool>();
        m.iterations = j.at("iterations").get<int>();
        return m;
    }
    if (family == "knn") {
        KnnModel m;
        m.enc = classes_from_json(j.at("classes"));
        m.k = j.at("k").get<int>();
        m.train = mat_from_json(j.at("train"));
        m.train_y = j.at("train_y").get<std::vector<int>>();
        return m;
    }
    if (family == "tree") {
        return tree_from_json(j.at("tree"));
    }
    if (family == "forest") {
        ForestModel m;
        m.enc = classes_from_json(j.at("classes"));
        m.n_features = j.at("n_features").get<std::size_t>();
        if (!j.at("max_depth").is_null()) m.max_depth = j.at("max_depth").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& tj : j.at("trees")) m.trees.push_back(tree_from_json(tj));
        return m;
    }
    throw DataError("model_from_json: unknown family '" + family + "'");
}

}  // namespace specsep::models
