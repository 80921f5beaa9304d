#include "specsep/attribution.hpp"

#include <cmath>
#include <sstream>

#include "specsep/common.hpp"
#include "specsep/rng.hpp"
#include "specsep/textio.hpp"

namespace specsep::attribution {

namespace {

using models::TreeModel;
using models::TreeNode;

double leaf_vote(const TreeNode& leaf) {
    return leaf.class_counts[1] > leaf.class_counts[0] ? 1.0 : 0.0;
}

// Decision-path bookkeeping of Lundberg & Lee's TreeExplainer. pweight[i]
// carries the permutation mass of feature subsets of size i along the path.
struct PathElement {
    int feature = -1;
    double zero_fraction = 1.0;  // flow-through fraction when the feature is excluded
    double one_fraction = 1.0;   // 1 when x follows this branch, else 0
    double pweight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature) {
    path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
    for (int i = depth - 1; i >= 0; --i) {
        path[i + 1].pweight +=
            one_fraction * path[i].pweight * (i + 1) / static_cast<double>(depth + 1);
        path[i].pweight =
            zero_fraction * path[i].pweight * (depth - i) / static_cast<double>(depth + 1);
    }
}

void unwind_path(PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next = path[depth].pweight;
    for (int i = depth - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp = path[i].pweight;
            path[i].pweight = next * (depth + 1) / static_cast<double>((i + 1) * one_fraction);
            next = tmp - path[i].pweight * zero_fraction * (depth - i) /
                             static_cast<double>(depth + 1);
        } else {
            path[i].pweight =
                path[i].pweight * (depth + 1) / (zero_fraction * static_cast<double>(depth - i));
        }
    }
    for (int i = index; i < depth; ++i) {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next = path[depth].pweight;
    double total = 0.0;
    if (one_fraction != 0.0) {
        for (int i = depth - 1; i >= 0; --i) {
            const double tmp = next / static_cast<double>((i + 1) * one_fraction);
            total += tmp;
            next = path[i].pweight - tmp * zero_fraction * static_cast<double>(depth - i);
        }
    } else {
        for (int i = depth - 1; i >= 0; --i) {
            total += path[i].pweight / (zero_fraction * static_cast<double>(depth - i));
        }
    }
    return total * (depth + 1);
}

struct ShapWalker {
    const TreeModel& tree;
    std::span<const double> x;
    std::vector<double>& phi;

    void recurse(int node_id, std::vector<PathElement> path, double parent_zero,
                 double parent_one, int parent_feature) {
        const int depth = static_cast<int>(path.size());
        path.resize(static_cast<std::size_t>(depth) + 1);
        extend_path(path.data(), depth, parent_zero, parent_one, parent_feature);

        const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        if (node.feature < 0) {
            const double value = leaf_vote(node);
            for (int i = 1; i <= depth; ++i) {
                const double w = unwound_path_sum(path.data(), depth, i);
                const auto& el = path[static_cast<std::size_t>(i)];
                phi[static_cast<std::size_t>(el.feature)] +=
                    w * (el.one_fraction - el.zero_fraction) * value;
            }
            return;
        }

        const bool go_left = x[static_cast<std::size_t>(node.feature)] <= node.threshold;
        const int hot = go_left ? node.left : node.right;
        const int cold = go_left ? node.right : node.left;
        const double hot_zero = tree.nodes[static_cast<std::size_t>(hot)].cover / node.cover;
        const double cold_zero = tree.nodes[static_cast<std::size_t>(cold)].cover / node.cover;

        double incoming_zero = 1.0;
        double incoming_one = 1.0;
        int found = -1;
        for (int i = 0; i <= depth; ++i) {
            if (path[static_cast<std::size_t>(i)].feature == node.feature) {
                found = i;
                break;
            }
        }
        if (found >= 0) {
            incoming_zero = path[static_cast<std::size_t>(found)].zero_fraction;
            incoming_one = path[static_cast<std::size_t>(found)].one_fraction;
            unwind_path(path.data(), depth, found);
            path.pop_back();
        }
        recurse(hot, path, hot_zero * incoming_zero, incoming_one, node.feature);
        recurse(cold, std::move(path), cold_zero * incoming_zero, 0.0, node.feature);
    }
};

}  // namespace

std::vector<double> tree_shap_single(const TreeModel& tree, std::span<const double> x,
                                     std::size_t n_features) {
    if (tree.nodes.empty()) throw ConfigError("tree_shap: empty tree");
    for (const auto& nd : tree.nodes) {
        if (nd.feature >= 0 && nd.cover <= 0.0) {
            throw ConfigError("tree_shap: tree lacks positive cover counts");
        }
    }
    std::vector<double> phi(n_features, 0.0);
    ShapWalker walker{tree, x, phi};
    walker.recurse(0, {}, 1.0, 1.0, -1);
    return phi;
}

double tree_expected_vote(const TreeModel& tree) {
    double acc = 0.0;
    const double root_cover = tree.nodes[0].cover;
    for (const auto& nd : tree.nodes) {
        if (nd.feature < 0) acc += nd.cover * leaf_vote(nd);
    }
    return acc / root_cover;
}

AttributionMap tree_shap(const models::ForestModel& forest, const SpectraMatrix& data,
                         bool keep_per_sample) {
    if (forest.trees.empty()) throw ConfigError("tree_shap: empty forest");
    if (data.n_cols != forest.n_features) {
        throw ConfigError("tree_shap: feature count does not match the forest");
    }
    const std::size_t n = forest.n_features;
    AttributionMap map;
    map.feature_indices.resize(n);
    for (std::size_t j = 0; j < n; ++j) map.feature_indices[j] = j;
    map.mean_abs_shap.assign(n, 0.0);

    double base = 0.0;
    for (const auto& tree : forest.trees) base += tree_expected_vote(tree);
    map.base_value = base / static_cast<double>(forest.trees.size());

    if (keep_per_sample) map.per_sample.reserve(data.n_rows);
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        std::fill(phi.begin(), phi.end(), 0.0);
        for (const auto& tree : forest.trees) {
            const auto tree_phi = tree_shap_single(tree, data.row(i), n);
            for (std::size_t j = 0; j < n; ++j) phi[j] += tree_phi[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            phi[j] /= static_cast<double>(forest.trees.size());
            map.mean_abs_shap[j] += std::abs(phi[j]);
        }
        if (keep_per_sample) map.per_sample.push_back(phi);
    }
    if (data.n_rows > 0) {
        for (auto& v : map.mean_abs_shap) v /= static_cast<double>(data.n_rows);
    }
    return map;
}

std::vector<AttributionMap> windowed_shap_map(const SpectraMatrix& data,
                                              const std::vector<std::size_t>& widths,
                                              const eval::ForestSpec& forest_spec,
                                              const eval::SplitScheme& split, std::uint64_t seed,
                                              bool keep_per_sample) {
    if (widths.empty()) throw ConfigError("windowed_shap_map: empty width list");
    std::vector<AttributionMap> maps;
    for (std::size_t w : widths) {
        if (w < 1 || w > data.n_cols) {
            throw ConfigError("windowed_shap_map: width " + std::to_string(w) +
                              " outside [1, " + std::to_string(data.n_cols) + "]");
        }
        for (std::size_t start = 0; start + w <= data.n_cols; start += w) {
            std::vector<std::size_t> cols(w);
            for (std::size_t j = 0; j < w; ++j) cols[j] = start + j;
            const auto sliced = select_columns(data, cols);

            const std::uint64_t model_seed = rng::derive(seed, w, start, 1);
            eval::EvalPlan plan{split, rng::derive(seed, w, start, 2)};
            const auto cv = eval::evaluate(forest_spec, sliced, plan, model_seed);

            // Full-data refit after the CV estimate; the map explains this
            // refit model.
            const auto forest = models::fit_forest(sliced, forest_spec.trees,
                                                   forest_spec.max_depth, model_seed);
            AttributionMap map = tree_shap(forest, sliced, keep_per_sample);
            for (auto& idx : map.feature_indices) idx += start;  // global coordinates
            map.window = WindowInfo{start, w, cv.mean, cv.sd};
            maps.push_back(std::move(map));
        }
    }
    return maps;
}

nlohmann::json attribution_to_json(const std::vector<AttributionMap>& maps) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& m : maps) {
        nlohmann::json mj;
        mj["feature_indices"] = m.feature_indices;
        mj["mean_abs_shap"] = m.mean_abs_shap;
        mj["base_value"] = m.base_value;
        if (m.window) {
            mj["window"] = {{"start", m.window->start},
                            {"width", m.window->width},
                            {"cv_mean_accuracy", m.window->cv_mean_accuracy},
                            {"cv_sd_accuracy", m.window->cv_sd_accuracy}};
        }
        if (!m.per_sample.empty()) mj["per_sample"] = m.per_sample;
        j.push_back(mj);
    }
    return j;
}

std::string attribution_to_csv(const std::vector<AttributionMap>& maps,
                               const std::vector<double>& axis) {
    std::ostringstream os;
    os << "width,start,pixel,wavelength,mean_abs_shap\n";
    for (const auto& m : maps) {
        for (std::size_t j = 0; j < m.feature_indices.size(); ++j) {
            const std::size_t pixel = m.feature_indices[j];
            if (m.window) os << m.window->width << ',' << m.window->start << ',';
            else os << m.feature_indices.size() << ",0,";
            os << pixel << ',';
            if (pixel < axis.size()) os << textio::format_double(axis[pixel]);
            os << ',' << textio::format_double(m.mean_abs_shap[j]) << '\n';
        }
    }
    return os.str();
}

}  // namespace specsep::attribution
