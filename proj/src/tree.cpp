#include <algorithm>
#include <cmath>
#include <numeric>

#include "model_internal.hpp"
#include "specsep/common.hpp"
#include "specsep/models.hpp"
#include "specsep/rng.hpp"

namespace specsep::models {

namespace {

struct SplitCandidate {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double gini(double c0, double c1) {
    const double total = c0 + c1;
    if (total <= 0.0) return 0.0;
    const double p0 = c0 / total;
    const double p1 = c1 / total;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeBuilder {
    const SpectraMatrix& data;
    const std::vector<int>& y;
    std::optional<int> max_depth;
    int min_leaf;
    int features_per_split;  // <= 0 means all features
    rng::Stream* stream;     // feature subsampling; null for deterministic trees
    std::vector<TreeNode> nodes;
    std::vector<std::pair<double, int>> scratch;  // (value, label) sort buffer

    // `samples` carries bootstrap multiplicity as repeated indices.
    int build(std::vector<std::size_t>& samples, int depth) {
        double c0 = 0.0;
        double c1 = 0.0;
        for (std::size_t i : samples) (y[i] == 0 ? c0 : c1) += 1.0;

        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node_id].cover = c0 + c1;
        nodes[node_id].class_counts = {c0, c1};

        const bool pure = c0 == 0.0 || c1 == 0.0;
        const bool depth_stop = max_depth && depth >= *max_depth;
        const bool size_stop = samples.size() < 2 * static_cast<std::size_t>(min_leaf) ||
                               samples.size() < 2;
        if (pure || depth_stop || size_stop) return node_id;

        const SplitCandidate split = best_split(samples, c0, c1);
        if (!split.found) return node_id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        left.reserve(samples.size());
        right.reserve(samples.size());
        for (std::size_t i : samples) {
            (data.at(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right)
                .push_back(i);
        }
        samples.clear();
        samples.shrink_to_fit();

        nodes[node_id].feature = split.feature;
        nodes[node_id].threshold = split.threshold;
        const int l = build(left, depth + 1);
        nodes[node_id].left = l;
        const int r = build(right, depth + 1);
        nodes[node_id].right = r;
        return node_id;
    }

    SplitCandidate best_split(const std::vector<std::size_t>& samples, double c0, double c1) {
        const std::size_t n_features = data.n_cols;
        std::vector<int> candidates;
        if (features_per_split > 0 &&
            static_cast<std::size_t>(features_per_split) < n_features) {
            candidates = sample_features(n_features);
        } else {
            candidates.resize(n_features);
            std::iota(candidates.begin(), candidates.end(), 0);
        }

        const double parent_impurity = gini(c0, c1);
        const double total = c0 + c1;
        SplitCandidate best;
        scratch.resize(samples.size());
        for (int f : candidates) {
            for (std::size_t i = 0; i < samples.size(); ++i) {
                scratch[i] = {data.at(samples[i], static_cast<std::size_t>(f)), y[samples[i]]};
            }
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double l0 = 0.0;
            double l1 = 0.0;
            std::size_t i = 0;
            while (i < scratch.size()) {
                // Consume the whole run of equal values before proposing a cut.
                const double v = scratch[i].first;
                while (i < scratch.size() && scratch[i].first == v) {
                    (scratch[i].second == 0 ? l0 : l1) += 1.0;
                    ++i;
                }
                if (i == scratch.size()) break;
                const double nl = l0 + l1;
                const double nr = total - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double gain = parent_impurity - (nl * gini(l0, l1) +
                                                       nr * gini(c0 - l0, c1 - l1)) /
                                                          total;
                if (gain > best.gain + 1e-12) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (v + scratch[i].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    std::vector<int> sample_features(std::size_t n_features) {
        // Without replacement by rejection; candidates are then sorted so the
        // split search scans features in ascending order no matter the draw
        // order.
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(features_per_split));
        while (out.size() < static_cast<std::size_t>(features_per_split)) {
            const int f = static_cast<int>(stream->next_below(n_features));
            if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

TreeModel build_tree(const SpectraMatrix& data, const std::vector<int>& y,
                     const LabelEncoding& enc, std::vector<std::size_t> samples,
                     std::optional<int> max_depth, int min_leaf, int features_per_split,
                     rng::Stream* stream) {
    TreeModel model;
    model.enc = enc;
    model.n_features = data.n_cols;
    model.max_depth = max_depth;
    model.min_leaf = min_leaf;
    TreeBuilder builder{data, y, max_depth, min_leaf, features_per_split, stream, {}, {}};
    builder.build(samples, 0);
    model.nodes = std::move(builder.nodes);
    return model;
}

}  // namespace

TreeModel fit_tree(const SpectraMatrix& train, std::optional<int> max_depth, int min_leaf,
                   std::uint64_t /*seed*/) {
    if (train.n_rows < 1) throw ConfigError("fit_tree: need at least one sample");
    if (min_leaf < 1) throw ConfigError("fit_tree: min_leaf must be >= 1");
    if (max_depth && *max_depth < 0) throw ConfigError("fit_tree: max_depth must be >= 0");
    LabelEncoding enc;
    const auto y = detail::encode_labels(train, enc);
    std::vector<std::size_t> all(train.n_rows);
    std::iota(all.begin(), all.end(), 0);
    return build_tree(train, y, enc, std::move(all), max_depth, min_leaf, 0, nullptr);
}

ForestModel fit_forest(const SpectraMatrix& train, int tree_count, std::optional<int> max_depth,
                       std::uint64_t seed) {
    if (train.n_rows < 2) throw ConfigError("fit_forest: need at least two samples");
    if (tree_count < 1) throw ConfigError("fit_forest: tree_count must be >= 1");
    ForestModel model;
    const auto y = detail::encode_labels(train, model.enc);
    model.n_features = train.n_cols;
    model.max_depth = max_depth;
    model.seed = seed;
    const int mtry = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(train.n_cols))));
    model.trees.reserve(static_cast<std::size_t>(tree_count));
    for (int t = 0; t < tree_count; ++t) {
        rng::Stream stream(rng::derive(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> bootstrap(train.n_rows);
        for (auto& idx : bootstrap) idx = stream.next_below(train.n_rows);
        model.trees.push_back(build_tree(train, y, model.enc, std::move(bootstrap), max_depth, 1,
                                         mtry, &stream));
    }
    return model;
}

}  // namespace specsep::models
