#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specsep/attribution.hpp"
#include "specsep/common.hpp"
#include "specsep/models.hpp"
#include "specsep/rng.hpp"

using namespace specsep;
using namespace specsep::attribution;
using namespace specsep::models;

namespace {

TreeNode leaf(double c0, double c1) {
    TreeNode n;
    n.cover = c0 + c1;
    n.class_counts = {c0, c1};
    return n;
}

TreeNode split(int feature, double threshold, int left, int right, double cover) {
    TreeNode n;
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    n.cover = cover;
    return n;
}

LabelEncoding enc01() { return LabelEncoding{{"0", "1"}}; }

// depth-1 tree: x[f] <= t ? class0-ish leaf : class1-ish leaf; covers l/r.
TreeModel stump(std::size_t n_features, int feature, double threshold, double cover_left,
                double cover_right) {
    TreeModel t;
    t.enc = enc01();
    t.n_features = n_features;
    t.nodes.push_back(split(feature, threshold, 1, 2, cover_left + cover_right));
    t.nodes.push_back(leaf(cover_left, 0.0));   // votes class 0
    t.nodes.push_back(leaf(0.0, cover_right));  // votes class 1
    return t;
}

ForestModel forest_of(std::vector<TreeModel> trees, std::size_t n_features) {
    ForestModel f;
    f.enc = enc01();
    f.n_features = n_features;
    f.trees = std::move(trees);
    return f;
}

SpectraMatrix training_blobs(std::size_t n_features, std::size_t per_class, std::uint64_t seed,
                             double gap) {
    SpectraMatrix d = SpectraMatrix::zeros(2 * per_class, n_features);
    d.labels.assign(2 * per_class, "0");
    rng::Stream s(seed);
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        const bool cls1 = i >= per_class;
        if (cls1) d.labels[i] = "1";
        auto r = d.row(i);
        for (std::size_t j = 0; j < n_features; ++j) {
            r[j] = s.next_normal() + (cls1 ? gap : 0.0);
        }
    }
    return d;
}

void check_local_accuracy(const ForestModel& f, const SpectraMatrix& data, double tol = 1e-9) {
    const auto map = tree_shap(f, data, true);
    const auto frac = forest_vote_fraction(f, data);
    REQUIRE(map.per_sample.size() == data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        double total = map.base_value;
        for (double v : map.per_sample[i]) total += v;
        CHECK(std::abs(total - frac[static_cast<Eigen::Index>(i)]) < tol);
    }
}

void check_against_brute_force(const ForestModel& f, const SpectraMatrix& data,
                               double tol = 1e-9) {
    const auto map = tree_shap(f, data, true);
    CHECK(std::abs(map.base_value - test_oracles::brute_force_base_value(f)) < tol);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        const auto expected = test_oracles::brute_force_shapley(f, data.row(i));
        for (std::size_t j = 0; j < f.n_features; ++j) {
            CHECK(std::abs(map.per_sample[i][j] - expected[j]) < tol);
        }
    }
}

}  // namespace

TEST_CASE("single-leaf tree: zero attribution, base equals the leaf vote") {
    TreeModel t;
    t.enc = enc01();
    t.n_features = 3;
    t.nodes.push_back(leaf(2.0, 5.0));  // votes class 1
    const auto f = forest_of({t}, 3);
    SpectraMatrix d = SpectraMatrix::zeros(2, 3);
    const auto map = tree_shap(f, d, true);
    CHECK(map.base_value == doctest::Approx(1.0));
    for (double v : map.mean_abs_shap) CHECK(v == 0.0);
}

TEST_CASE("depth-1 tree: all mass on the split feature, sum = prediction - base") {
    const auto t = stump(4, 2, 0.5, 30.0, 10.0);
    const auto f = forest_of({t}, 4);
    SpectraMatrix d = SpectraMatrix::zeros(2, 4);
    d.at(0, 2) = 1.0;  // goes right -> vote 1
    d.at(1, 2) = 0.0;  // goes left  -> vote 0
    const auto map = tree_shap(f, d, true);
    const double base = 10.0 / 40.0;
    CHECK(map.base_value == doctest::Approx(base).epsilon(1e-12));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            if (j != 2) CHECK(map.per_sample[i][j] == 0.0);
        }
    }
    CHECK(map.per_sample[0][2] == doctest::Approx(1.0 - base).epsilon(1e-12));
    CHECK(map.per_sample[1][2] == doctest::Approx(0.0 - base).epsilon(1e-12));
    check_against_brute_force(f, d);
}

TEST_CASE("hand-built depth-2 trees match the exhaustive Shapley oracle") {
    // Tree A: splits x0 then x1 / x2 with uneven covers.
    TreeModel a;
    a.enc = enc01();
    a.n_features = 4;
    a.nodes.push_back(split(0, 0.0, 1, 2, 100.0));
    a.nodes.push_back(split(1, -0.3, 3, 4, 60.0));
    a.nodes.push_back(split(2, 0.7, 5, 6, 40.0));
    a.nodes.push_back(leaf(25.0, 5.0));
    a.nodes.push_back(leaf(10.0, 20.0));
    a.nodes.push_back(leaf(8.0, 22.0));
    a.nodes.push_back(leaf(9.0, 1.0));

    // Tree B: repeats feature 0 along a path (the duplicated-feature case).
    TreeModel b;
    b.enc = enc01();
    b.n_features = 4;
    b.nodes.push_back(split(0, 0.5, 1, 2, 100.0));
    b.nodes.push_back(split(0, -0.5, 3, 4, 70.0));
    b.nodes.push_back(leaf(5.0, 25.0));
    b.nodes.push_back(leaf(30.0, 10.0));
    b.nodes.push_back(leaf(10.0, 20.0));

    // Tree C: stump on feature 3.
    const auto c = stump(4, 3, 0.1, 45.0, 55.0);

    const auto f = forest_of({a, b, c}, 4);
    SpectraMatrix queries = SpectraMatrix::zeros(12, 4);
    rng::Stream s(7);
    for (auto& v : queries.values) v = s.next_normal();
    // Include points that sit exactly on thresholds.
    queries.at(0, 0) = 0.0;
    queries.at(1, 0) = 0.5;
    queries.at(2, 1) = -0.3;

    check_against_brute_force(f, queries);
    check_local_accuracy(f, queries);
}

TEST_CASE("symmetry: identical columns used symmetrically get equal attribution") {
    // Two trees, mirror images of each other over features 0 and 1.
    const auto t0 = stump(2, 0, 0.0, 50.0, 50.0);
    const auto t1 = stump(2, 1, 0.0, 50.0, 50.0);
    const auto f = forest_of({t0, t1}, 2);
    SpectraMatrix d = SpectraMatrix::zeros(40, 2);
    rng::Stream s(11);
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        const double v = s.next_normal();
        d.at(i, 0) = v;
        d.at(i, 1) = v;  // identical columns
    }
    const auto map = tree_shap(f, d, true);
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        CHECK(map.per_sample[i][0] == doctest::Approx(map.per_sample[i][1]).epsilon(1e-12));
    }
    CHECK(map.mean_abs_shap[0] == doctest::Approx(map.mean_abs_shap[1]).epsilon(1e-12));
    check_against_brute_force(f, d);
}

TEST_CASE("dummy feature: never split on, exactly zero attribution") {
    const auto data = training_blobs(5, 40, 13, 2.0);
    // Constant column 4 can never be split on.
    SpectraMatrix d = data;
    for (std::size_t i = 0; i < d.n_rows; ++i) d.at(i, 4) = 3.14;
    const auto f = fit_forest(d, 30, std::nullopt, 17);
    for (const auto& tree : f.trees) {
        for (const auto& nd : tree.nodes) CHECK(nd.feature != 4);
    }
    const auto map = tree_shap(f, d, false);
    CHECK(map.mean_abs_shap[4] == 0.0);
}

TEST_CASE("fitted small forests agree with brute force and satisfy local accuracy") {
    const auto data = training_blobs(4, 30, 23, 1.2);
    const auto f = fit_forest(data, 3, 2, 29);  // <= 3 trees, depth <= 2, 4 features
    check_against_brute_force(f, data);
    check_local_accuracy(f, data);
}

TEST_CASE("local accuracy holds on deeper fitted forests") {
    const auto data = training_blobs(8, 60, 31, 0.6);
    const auto f = fit_forest(data, 40, std::nullopt, 37);
    check_local_accuracy(f, data);
}

TEST_CASE("windowed map: planted signal concentrates attribution") {
    const std::size_t dim = 60;
    SpectraMatrix data = SpectraMatrix::zeros(160, dim);
    data.labels.assign(160, "0");
    rng::Stream noise(505);
    for (std::size_t i = 0; i < 160; ++i) {
        const bool cls1 = i >= 80;
        if (cls1) data.labels[i] = "1";
        auto r = data.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            r[j] = noise.next_normal();
            if (cls1 && j >= 30 && j < 40) r[j] += 1.2;
        }
    }
    const auto maps = windowed_shap_map(data, {20}, eval::ForestSpec{40, std::nullopt},
                                        eval::StratifiedKFold{4}, 44);
    REQUIRE(maps.size() == 3);
    // Window [20,40) holds the signal in its second half.
    const auto& hot = maps[1];
    REQUIRE(hot.window.has_value());
    CHECK(hot.window->start == 20);
    double inside = 0.0;
    double outside = 0.0;
    for (std::size_t j = 0; j < hot.feature_indices.size(); ++j) {
        const std::size_t pixel = hot.feature_indices[j];
        (pixel >= 30 && pixel < 40 ? inside : outside) += hot.mean_abs_shap[j];
    }
    CHECK(inside > 4.0 * outside);
    CHECK(hot.window->cv_mean_accuracy > 0.85);

    // Signal-free windows barely move from chance and attribute little.
    const auto& cold = maps[0];
    CHECK(cold.window->cv_mean_accuracy < 0.65);
}

TEST_CASE("attribution serialisation: csv covers every pixel of every window") {
    const auto data = training_blobs(10, 20, 53, 1.0);
    const auto maps = windowed_shap_map(data, {5}, eval::ForestSpec{10, std::nullopt},
                                        eval::StratifiedKFold{2}, 3);
    REQUIRE(maps.size() == 2);
    const auto csv = attribution_to_csv(maps, {});
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 10);
    const auto j = attribution_to_json(maps);
    CHECK(j.size() == 2);
    CHECK(j[0].contains("window"));
}

TEST_CASE("tree_shap input validation") {
    const auto data = training_blobs(3, 10, 61, 1.0);
    const auto f = fit_forest(data, 4, 2, 5);
    SpectraMatrix wrong = SpectraMatrix::zeros(2, 5);
    CHECK_THROWS_AS(tree_shap(f, wrong, false), ConfigError);

    // A tree with zeroed covers must be rejected.
    auto broken = f;
    for (auto& tree : broken.trees) {
        for (auto& nd : tree.nodes) nd.cover = 0.0;
    }
    SpectraMatrix ok = SpectraMatrix::zeros(1, 3);
    CHECK_THROWS_AS(tree_shap(broken, ok, false), ConfigError);
}
