#include "specsep/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "specsep/common.hpp"
#include "specsep/rng.hpp"
#include "specsep/stats.hpp"

namespace specsep::eval {

namespace {

void shuffle_in_place(std::vector<std::size_t>& v, rng::Stream& stream) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[stream.next_below(i)]);
    }
}

// Class label -> member row indices, labels in sorted order.
std::map<std::string, std::vector<std::size_t>> group_by_class(
    const std::vector<std::string>& labels) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    return groups;
}

void sort_fold(SplitIndices& fold) {
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.test.begin(), fold.test.end());
}

}  // namespace

std::vector<SplitIndices> make_splits(const EvalPlan& plan,
                                      const std::vector<std::string>& labels) {
    if (labels.size() < 2) throw ConfigError("make_splits: need at least two samples");

    if (std::holds_alternative<LeaveOneOut>(plan.split)) {
        std::vector<SplitIndices> folds(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            folds[i].test = {i};
            folds[i].train.reserve(labels.size() - 1);
            for (std::size_t j = 0; j < labels.size(); ++j) {
                if (j != i) folds[i].train.push_back(j);
            }
        }
        return folds;
    }

    auto groups = group_by_class(labels);

    if (const auto* holdout = std::get_if<Holdout>(&plan.split)) {
        if (!(holdout->test_fraction > 0.0 && holdout->test_fraction < 1.0)) {
            throw ConfigError("make_splits: test_fraction must lie in (0,1)");
        }
        SplitIndices fold;
        std::uint64_t class_idx = 0;
        for (auto& [label, members] : groups) {
            rng::Stream stream(rng::derive(plan.seed, class_idx++));
            shuffle_in_place(members, stream);
            if (members.size() < 2) {
                throw ConfigError("make_splits: class '" + label +
                                  "' needs at least 2 samples for a holdout split");
            }
            auto n_test = static_cast<std::size_t>(std::llround(
                holdout->test_fraction * static_cast<double>(members.size())));
            n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
            fold.test.insert(fold.test.end(), members.begin(), members.begin() + n_test);
            fold.train.insert(fold.train.end(), members.begin() + n_test, members.end());
        }
        sort_fold(fold);
        return {fold};
    }

    const auto& kfold = std::get<StratifiedKFold>(plan.split);
    if (kfold.k < 2) throw ConfigError("make_splits: k must be >= 2");
    const auto k = static_cast<std::size_t>(kfold.k);
    std::vector<SplitIndices> folds(k);
    std::uint64_t class_idx = 0;
    for (auto& [label, members] : groups) {
        if (members.size() < k) {
            throw ConfigError("make_splits: class '" + label + "' has " +
                              std::to_string(members.size()) + " samples, fewer than k=" +
                              std::to_string(k));
        }
        rng::Stream stream(rng::derive(plan.seed, class_idx++));
        shuffle_in_place(members, stream);
        for (std::size_t i = 0; i < members.size(); ++i) {
            folds[i % k].test.push_back(members[i]);
        }
    }
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<bool> in_test(labels.size(), false);
        for (std::size_t i : folds[f].test) in_test[i] = true;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!in_test[i]) folds[f].train.push_back(i);
        }
        sort_fold(folds[f]);
    }
    return folds;
}

std::string model_name(const ModelSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, QdaSpec>) return "qda";
            else if constexpr (std::is_same_v<T, LogisticSpec>) return "logistic";
            else if constexpr (std::is_same_v<T, KnnSpec>) return "knn";
            else if constexpr (std::is_same_v<T, TreeSpec>) return "tree";
            else if constexpr (std::is_same_v<T, ForestSpec>) return "forest";
            else return "oracle";
        },
        spec);
}

std::vector<ModelSpec> standard_model_set() {
    return {LogisticSpec{}, KnnSpec{}, TreeSpec{}, ForestSpec{}};
}

models::TrainedModel fit_model(const ModelSpec& spec, const SpectraMatrix& train,
                               std::uint64_t seed) {
    return std::visit(
        [&](const auto& s) -> models::TrainedModel {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, QdaSpec>) {
                return models::fit_qda(train, s.lambda);
            } else if constexpr (std::is_same_v<T, LogisticSpec>) {
                return models::fit_logistic(train, s.l2_strength, s.max_iter);
            } else if constexpr (std::is_same_v<T, KnnSpec>) {
                return models::fit_knn(train, s.k);
            } else if constexpr (std::is_same_v<T, TreeSpec>) {
                return models::fit_tree(train, s.max_depth, s.min_leaf, seed);
            } else if constexpr (std::is_same_v<T, ForestSpec>) {
                return models::fit_forest(train, s.trees, s.max_depth, seed);
            } else {
                if (s.sigma1 == s.sigma2) {
                    // Degenerate rule: the classes are indistinguishable for
                    // the threshold statistic. Fall back to the constant
                    // smaller-label classifier (accuracy 0.5 on balanced data).
                    models::OracleThresholdModel m;
                    m.dim = train.n_cols;
                    m.mu = s.mu;
                    m.sigma1 = s.sigma1;
                    m.sigma2 = s.sigma2;
                    m.threshold = std::numeric_limits<double>::infinity();
                    m.label_small = s.label_small;
                    m.label_large = s.label_large;
                    return m;
                }
                auto m = models::oracle_threshold(train.n_cols, s.mu, s.sigma1, s.sigma2);
                m.label_small = s.label_small;
                m.label_large = s.label_large;
                if (s.sigma1 > s.sigma2) std::swap(m.label_small, m.label_large);
                return m;
            }
        },
        spec);
}

EvalResult evaluate(const ModelSpec& spec, const SpectraMatrix& data, const EvalPlan& plan,
                    std::optional<std::uint64_t> fixed_model_seed) {
    if (!data.has_labels()) throw ConfigError("evaluate: dataset has no labels");
    const auto folds = make_splits(plan, data.labels);

    EvalResult result;
    result.fold_accuracies.reserve(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto train = select_rows(data, folds[f].train);
        const auto test = select_rows(data, folds[f].test);
        const std::uint64_t model_seed =
            fixed_model_seed ? *fixed_model_seed : rng::derive(plan.seed, f, 1);
        const std::string fold_tag = "evaluate: fold " + std::to_string(f) + ": ";
        try {
            const auto model = fit_model(spec, train, model_seed);
            const auto predicted = models::predict(model, test);
            result.fold_accuracies.push_back(models::accuracy(predicted, test.labels));
        } catch (const ConfigError& e) {
            throw ConfigError(fold_tag + e.what());
        } catch (const NumericError& e) {
            throw NumericError(fold_tag + e.what());
        } catch (const DataError& e) {
            throw DataError(fold_tag + e.what());
        }
        if (f == 0) {
            result.n_train = folds[f].train.size();
            result.n_test = folds[f].test.size();
        }
    }
    result.mean = stats::mean(result.fold_accuracies);
    result.sd = folds.size() > 1 ? stats::stddev_population(result.fold_accuracies) : 0.0;
    return result;
}

}  // namespace specsep::eval
