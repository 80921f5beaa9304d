// Acceptance suite: one self-contained criterion per function, each printing
// a single [PASS]/[FAIL] line. Run with no arguments for all criteria, or
// with criterion numbers (plus --cli <path> for the CLI determinism check).
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "specsep/attribution.hpp"
#include "specsep/audits.hpp"
#include "specsep/common.hpp"
#include "specsep/dataio.hpp"
#include "specsep/evalharness.hpp"
#include "specsep/models.hpp"
#include "specsep/rng.hpp"
#include "specsep/stats.hpp"
#include "specsep/synthgen.hpp"
#include "specsep/textio.hpp"

namespace fs = std::filesystem;
using namespace specsep;
using textio::format_double;

namespace {

std::string g_cli_path;  // for criterion 10

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

void add_check(std::vector<Check>& checks, std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
}

// Aggregated mean accuracy per grid point (over repetitions) for one model.
std::map<std::string, double> point_means(const eval::AuditReport& report,
                                          const std::string& model) {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& rec : report.records) {
        if (rec.model != model) continue;
        std::string key;
        for (const auto& [axis, value] : rec.coords) key += axis + "=" + value + " ";
        auto& slot = acc[key];
        slot.first += rec.mean_accuracy;
        slot.second += 1;
    }
    std::map<std::string, double> out;
    for (const auto& [key, sum_count] : acc) out[key] = sum_count.first / sum_count.second;
    return out;
}

double single_point_accuracy(const eval::AuditReport& report, const std::string& model,
                             const eval::GridPoint& coords) {
    double sum = 0.0;
    int count = 0;
    for (const auto& rec : report.records) {
        if (rec.model == model && rec.coords == coords) {
            sum += rec.mean_accuracy;
            ++count;
        }
    }
    if (count == 0) throw Error("acceptance: no record for requested point");
    return sum / count;
}

// ----------------------------------------------------------- criterion 1 --

std::vector<Check> criterion1() {
    std::vector<Check> checks;
    auto config = eval::default_config("S1");
    config.master_seed = 101;
    config.samples_per_class = 1000;
    eval::override_axis(config, "n", {"100"});
    const auto report = eval::run_experiment(config, 1);
    for (const auto& rec : report.records) {
        add_check(checks, "S1 " + rec.model + " mean accuracy in [0.45, 0.58]",
                  rec.mean_accuracy >= 0.45 && rec.mean_accuracy <= 0.58,
                  "mean=" + format_double(rec.mean_accuracy) + " sd=" +
                      format_double(rec.sd_accuracy));
    }
    add_check(checks, "S1 produced all four models", report.records.size() == 4,
              std::to_string(report.records.size()) + " records");
    return checks;
}

// ----------------------------------------------------------- criterion 2 --

std::vector<Check> criterion2() {
    std::vector<Check> checks;
    auto config = eval::default_config("N2");
    config.master_seed = 202;
    config.samples_per_class = 1000;
    // 24 repetitions shrink the test-set binomial noise (~2.5pp per 400-sample
    // holdout evaluation) to ~0.5pp so the 2pp tolerance is a 4-sigma bound.
    config.repetitions = 24;
    eval::override_axis(config, "n", {"30", "100", "500", "1000"});
    const auto report = eval::run_experiment(config, 1);

    std::map<std::string, std::pair<double, int>> by_point;
    std::map<std::string, double> analytic;
    for (const auto& rec : report.records) {
        std::string key;
        for (const auto& [axis, value] : rec.coords) key += axis + "=" + value + " ";
        auto& slot = by_point[key];
        slot.first += rec.mean_accuracy;
        slot.second += 1;
        analytic[key] = rec.extras.at("analytic_accuracy");
    }
    double worst = 0.0;
    std::string worst_key;
    bool all_close = true;
    bool zero_ok = true;
    for (const auto& [key, sum_count] : by_point) {
        const double emp = sum_count.first / sum_count.second;
        const double gap = std::abs(emp - analytic[key]);
        if (gap > worst) {
            worst = gap;
            worst_key = key;
        }
        all_close = all_close && gap <= 0.02;
        if (key.find("dsigma=0 ") != std::string::npos) {
            zero_ok = zero_ok && std::abs(emp - 0.5) <= 0.03;
        }
    }
    add_check(checks, "N2 empirical within 2pp of analytic on every grid point", all_close,
              "worst gap " + format_double(worst) + " at " + worst_key);
    add_check(checks, "N2 dsigma=0 gives 0.50 +- 0.03", zero_ok, "");
    add_check(checks, "N2 grid complete", by_point.size() == 24,
              std::to_string(by_point.size()) + " points");
    return checks;
}

// ----------------------------------------------------------- criterion 3 --

std::vector<Check> criterion3() {
    std::vector<Check> checks;
    auto ends = eval::default_config("N3");
    ends.master_seed = 303;
    eval::override_axis(ends, "n", {"10", "5000"});
    const auto report = eval::run_experiment(ends, 1);

    const std::vector<std::string> dsigmas = {"0.1", "0.3", "0.6", "0.9", "1.2", "1.5", "2"};
    bool monotone = true;
    std::string detail;
    for (const auto& ds : dsigmas) {
        const double lo = single_point_accuracy(report, "qda", {{"dsigma", ds}, {"n", "10"}});
        const double hi = single_point_accuracy(report, "qda", {{"dsigma", ds}, {"n", "5000"}});
        if (hi < lo - 0.02) {
            monotone = false;
            detail += "dsigma=" + ds + ": " + format_double(hi) + " < " + format_double(lo) +
                      "-0.02; ";
        }
    }
    if (!monotone) {
        detail +=
            "(regularised-covariance QDA loses the radial discriminant once n exceeds the "
            "per-class training count, so accuracy decays back to chance at large n; the "
            "analytic threshold rule of criterion 2 does reach ~1.0 there)";
    }
    add_check(checks, "N3 accuracy(n=5000) >= accuracy(n=10) - 0.02 for every dsigma", monotone,
              detail);

    auto mid = eval::default_config("N3");
    mid.master_seed = 303;
    eval::override_axis(mid, "n", {"1000"});
    eval::override_axis(mid, "dsigma", {"0.3"});
    const auto mid_report = eval::run_experiment(mid, 1);
    const double acc = mid_report.records.at(0).mean_accuracy;
    add_check(checks, "N3 QDA(0.4) accuracy at (dsigma=0.3, n=1000) >= 0.95", acc >= 0.95,
              "accuracy=" + format_double(acc));
    return checks;
}

// ----------------------------------------------------------- criterion 4 --

std::vector<Check> criterion4() {
    std::vector<Check> checks;
    auto slow = eval::default_config("N1");
    slow.master_seed = 404;
    eval::override_axis(slow, "dsigma", {"0.5"});
    eval::override_axis(slow, "n", {"50"});
    const auto r1 = eval::run_experiment(slow, 1);
    const double iso =
        single_point_accuracy(r1, "qda", {{"dsigma", "0.5"}, {"n", "50"}, {"cov", "isotropic"}});
    const double toe =
        single_point_accuracy(r1, "qda", {{"dsigma", "0.5"}, {"n", "50"}, {"cov", "toeplitz"}});
    add_check(checks, "N1 Toeplitz(0.95) accuracy <= isotropic accuracy at (n=50, dsigma=0.5)",
              toe <= iso,
              "toeplitz=" + format_double(toe) + " isotropic=" + format_double(iso));

    auto strong = eval::default_config("N1");
    strong.master_seed = 405;
    eval::override_axis(strong, "dsigma", {"2"});
    eval::override_axis(strong, "n", {"500"});
    strong.axes[2].second = {"toeplitz"};
    const auto r2 = eval::run_experiment(strong, 1);
    const double toe2 = r2.records.at(0).mean_accuracy;
    add_check(checks, "N1 Toeplitz accuracy at (n=500, dsigma=2) >= 0.95", toe2 >= 0.95,
              "accuracy=" + format_double(toe2));
    return checks;
}

// ----------------------------------------------------------- criterion 5 --

std::vector<Check> criterion5() {
    using namespace synthgen;
    std::vector<Check> checks;
    const std::size_t samples = 10000;
    const std::size_t bins = 50;
    double prev_overlap = 2.0;
    bool decreasing = true;
    double overlap_5000 = 1.0;
    for (std::size_t n : {2UL, 50UL, 500UL, 5000UL}) {
        GaussianClassSpec narrow{.dim = n, .mean = 0.0, .sigma = 1.0, .covariance = Isotropic{}};
        GaussianClassSpec wide = narrow;
        wide.sigma = 1.1;
        const auto a = sample_gaussian_class(narrow, samples, rng::derive(505, n, 0));
        const auto b = sample_gaussian_class(wide, samples, rng::derive(505, n, 1));
        const auto na = row_norms(a);
        const auto nb = row_norms(b);
        const double lo = std::min(*std::min_element(na.begin(), na.end()),
                                   *std::min_element(nb.begin(), nb.end()));
        const double hi = std::max(*std::max_element(na.begin(), na.end()),
                                   *std::max_element(nb.begin(), nb.end()));
        const auto ha = norm_histogram_on_grid(a, bins, lo, hi);
        const auto hb = norm_histogram_on_grid(b, bins, lo, hi);
        const double overlap = histogram_overlap(ha, hb);
        decreasing = decreasing && overlap < prev_overlap;
        prev_overlap = overlap;
        if (n == 5000) {
            overlap_5000 = overlap;
            const double target = std::sqrt(5000.0);
            add_check(checks, "concentration: mean norm within 1% of sigma*sqrt(5000)",
                      std::abs(ha.mean / target - 1.0) < 0.01 &&
                          std::abs(hb.mean / (1.1 * target) - 1.0) < 0.01,
                      "means " + format_double(ha.mean) + ", " + format_double(hb.mean));
        }
    }
    add_check(checks, "concentration: overlap strictly decreasing over n in {2,50,500,5000}",
              decreasing, "");
    add_check(checks, "concentration: overlap < 1% at n=5000", overlap_5000 < 0.01,
              "overlap=" + format_double(overlap_5000));
    return checks;
}

// ----------------------------------------------------------- criterion 6 --

std::vector<Check> criterion6() {
    std::vector<Check> checks;
    auto config = eval::default_config("S2");
    config.master_seed = 606;
    config.models = {eval::LogisticSpec{}, eval::ForestSpec{}};
    eval::override_axis(config, "n", {"10", "10000"});
    const auto report = eval::run_experiment(config, 1);
    for (const std::string model : {"logistic", "forest"}) {
        const double lo = single_point_accuracy(report, model, {{"n", "10"}});
        const double hi = single_point_accuracy(report, model, {{"n", "10000"}});
        add_check(checks, "S2 " + model + " CV accuracy >= 0.95 at n=10000", hi >= 0.95,
                  "accuracy=" + format_double(hi));
        add_check(checks, "S2 " + model + " gains >= 0.1 from n=10 to n=10000", hi >= lo + 0.1,
                  "n10=" + format_double(lo) + " n10000=" + format_double(hi));
    }
    return checks;
}

// ----------------------------------------------------------- criterion 7 --

std::vector<Check> criterion7() {
    std::vector<Check> checks;
    auto small = eval::default_config("S3");
    small.master_seed = 707;
    small.models = {eval::ForestSpec{}};
    eval::override_axis(small, "n", {"50"});
    const auto r_small = eval::run_experiment(small, 1);
    const double forest50 = r_small.records.at(0).mean_accuracy;
    add_check(checks, "S3 forest CV accuracy >= 0.97 at n=50", forest50 >= 0.97,
              "accuracy=" + format_double(forest50));

    auto large = eval::default_config("S3");
    large.master_seed = 708;
    large.models = {eval::TreeSpec{}, eval::KnnSpec{}};
    eval::override_axis(large, "n", {"5000"});
    const auto r_large = eval::run_experiment(large, 1);
    const double tree5000 = single_point_accuracy(r_large, "tree", {{"n", "5000"}});
    const double knn5000 = single_point_accuracy(r_large, "knn", {{"n", "5000"}});
    add_check(checks, "S3 depth-5 tree mean accuracy in [0.72, 0.88] at n=5000",
              tree5000 >= 0.72 && tree5000 <= 0.88, "accuracy=" + format_double(tree5000));
    add_check(checks, "S3 kNN accuracy in [0.90, 0.97] at n=5000",
              knn5000 >= 0.90 && knn5000 <= 0.97, "accuracy=" + format_double(knn5000));
    return checks;
}

// ----------------------------------------------------------- criterion 8 --

// Synthetic stand-ins used when the measured dataset is not available (see
// README): a planted-signal control, a null-data control, and the
// global-vs-row shuffle contrast on column-structured classes.
SpectraMatrix planted_signal_data(std::uint64_t seed) {
    const std::size_t dim = 120;
    SpectraMatrix data = SpectraMatrix::zeros(200, dim);
    data.labels.assign(200, "0");
    rng::Stream noise(seed);
    for (std::size_t i = 0; i < 200; ++i) {
        const bool cls1 = i >= 100;
        if (cls1) data.labels[i] = "1";
        auto r = data.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            r[j] = noise.next_normal();
            if (cls1 && j >= 60 && j < 80) r[j] += 1.0;
        }
    }
    return data;
}

SpectraMatrix alternating_mean_data(std::uint64_t seed) {
    const std::size_t dim = 40;
    const std::size_t rows = 600;
    SpectraMatrix out = SpectraMatrix::zeros(rows, dim);
    out.labels.assign(rows, "0");
    for (std::size_t i = 0; i < rows; ++i) {
        const bool cls1 = i >= rows / 2;
        if (cls1) out.labels[i] = "1";
        rng::Stream stream(rng::derive(seed, i));
        auto r = out.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            const bool even = j % 2 == 0;
            r[j] = ((even != cls1) ? 0.4 : -0.4) + stream.next_normal();
        }
    }
    return out;
}

std::vector<Check> criterion8_synthetic() {
    std::vector<Check> checks;

    // Planted signal: only windows overlapping [60, 80) leave chance, and the
    // attribution map concentrates inside the planted band.
    const auto planted = planted_signal_data(808);
    const auto sweep = audits::window_sweep(planted, {20, 50}, eval::ForestSpec{},
                                            eval::StratifiedKFold{5}, 11);
    bool hot_ok = true;
    bool cold_ok = true;
    for (const auto& p : sweep.points) {
        const auto width = static_cast<std::size_t>(p.coords[0].second);
        const auto start = static_cast<std::size_t>(p.coords[1].second);
        const bool overlaps = start < 80 && start + width > 60;
        if (overlaps) hot_ok = hot_ok && p.mean > 0.8;
        else cold_ok = cold_ok && std::abs(p.mean - 0.5) < 3.0 * 0.5 / std::sqrt(200.0) + 0.03;
    }
    add_check(checks, "planted signal: overlapping windows exceed chance", hot_ok, "");
    add_check(checks, "planted signal: non-overlapping windows stay at chance", cold_ok, "");

    // Width-50 windows: [50, 100) holds the planted band in 20 of its 50
    // pixels; within that window the attribution must concentrate on them.
    const auto maps = attribution::windowed_shap_map(planted, {50}, eval::ForestSpec{},
                                                     eval::StratifiedKFold{5}, 12);
    double inside = 0.0;
    double outside = 0.0;
    for (const auto& m : maps) {
        if (!m.window || m.window->start != 50) continue;
        for (std::size_t j = 0; j < m.feature_indices.size(); ++j) {
            const std::size_t pixel = m.feature_indices[j];
            (pixel >= 60 && pixel < 80 ? inside : outside) += m.mean_abs_shap[j];
        }
    }
    add_check(checks, "planted signal: attribution concentrates on the band within its window",
              inside > 2.0 * outside,
              "inside=" + format_double(inside) + " outside=" + format_double(outside));

    // Null data: identical generating spectra, accuracy hugs chance for all k.
    using namespace synthgen;
    LorentzianSpectrumSpec spec{.dim = 60,
                                .centre_mean = 50.0,
                                .centre_sd = 10.0,
                                .fwhm = 7.0,
                                .count = 30,
                                .noise = LorentzianNoise{0.0, 0.01}};
    auto a = generate_lorentzian_class(spec, rng::derive(813, 0));
    auto b = generate_lorentzian_class(spec, rng::derive(813, 1));
    a.labels.assign(30, "0");
    b.labels.assign(30, "1");
    const auto null_data = vstack(a, b);
    const auto region = audits::RegionMask::from_pixels(null_data, "head", 0, 50);
    const auto null_sweep = audits::pixel_count_sweep(null_data, region, 2, 20, 3,
                                                      eval::ForestSpec{}, eval::LeaveOneOut{}, 14);
    const double se = 0.5 / std::sqrt(60.0);
    bool null_ok = true;
    for (const auto& p : null_sweep.points) {
        null_ok = null_ok && std::abs(p.mean - 0.5) <= 3.0 * se + 0.02;
    }
    add_check(checks, "null data: pixel sweep stays within 3 SE of chance", null_ok, "");

    // Shuffle contrast: global permutation preserves separability driven by
    // column structure, independent row permutation removes it.
    const auto structured = alternating_mean_data(821);
    auto eval_forest = [&](const SpectraMatrix& d, std::uint64_t seed) {
        return eval::evaluate(eval::ForestSpec{}, d,
                              eval::EvalPlan{eval::StratifiedKFold{5}, seed},
                              rng::derive(seed, 1))
            .mean;
    };
    const double global =
        eval_forest(audits::global_pixel_permutation(structured, 15), 16);
    const double row =
        eval_forest(audits::independent_row_permutation(structured, 17), 18);
    const double baseline = audits::majority_baseline(structured.labels);
    add_check(checks, "shuffle contrast: global minus row-shuffled accuracy >= 0.10",
              global - row >= 0.10,
              "global=" + format_double(global) + " row=" + format_double(row));
    add_check(checks, "row shuffle collapses to the majority baseline + 0.05",
              row <= baseline + 0.05,
              "row=" + format_double(row) + " baseline=" + format_double(baseline));
    return checks;
}

std::vector<Check> criterion8_oil(const fs::path& csv) {
    std::vector<Check> checks;
    auto raw = dataio::load_spectra(csv);
    raw = dataio::apply_mask(raw, {{380.0, 420.0}});

    struct TaskCase {
        std::string neg;
        double expected;
    };
    for (const auto& [neg, expected] : std::vector<TaskCase>{{"LOO", 0.90}, {"VOO", 0.80}}) {
        const auto data = dataio::filter_classes(raw, dataio::ClassPairTask{"EVOO", neg});
        const double baseline = audits::majority_baseline(data.labels);
        auto loocv = [&](const SpectraMatrix& d, std::uint64_t seed) {
            return eval::evaluate(eval::ForestSpec{}, d, eval::EvalPlan{eval::LeaveOneOut{}, seed},
                                  rng::derive(seed, 1))
                .mean;
        };
        const double full = loocv(data, 21);
        add_check(checks, "olive oil EVOO:" + neg + " forest LOO-CV = " + format_double(expected) +
                              " +- 0.05",
                  std::abs(full - expected) <= 0.05, "accuracy=" + format_double(full));
        const double global = loocv(audits::global_pixel_permutation(data, 22), 23);
        add_check(checks, "olive oil EVOO:" + neg + " global shuffle retains >= 0.75",
                  global >= 0.75, "accuracy=" + format_double(global));
        const double row = loocv(audits::independent_row_permutation(data, 24), 25);
        add_check(checks, "olive oil EVOO:" + neg + " row shuffle <= baseline + 0.05",
                  row <= baseline + 0.05,
                  "accuracy=" + format_double(row) + " baseline=" + format_double(baseline));
        if (neg == "LOO") {
            const auto rho1 = audits::named_region(data, "rho1");
            const auto sweep = audits::pixel_count_sweep(
                data, rho1, 2, std::min<std::size_t>(20, rho1.indices.size()), 20,
                eval::ForestSpec{}, eval::LeaveOneOut{}, 26);
            double best = 0.0;
            for (const auto& p : sweep.points) best = std::max(best, p.mean);
            add_check(checks, "olive oil rho1 pixel sweep reaches >= 0.80 by k=20", best >= 0.80,
                      "best=" + format_double(best));
        }
    }
    return checks;
}

std::vector<Check> criterion8() {
    if (const char* env = std::getenv("SPECSEP_OIL_CSV")) return criterion8_oil(env);
    return criterion8_synthetic();
}

// ----------------------------------------------------------- criterion 9 --

std::vector<Check> criterion9() {
    using namespace models;
    std::vector<Check> checks;

    auto leaf = [](double c0, double c1) {
        TreeNode n;
        n.cover = c0 + c1;
        n.class_counts = {c0, c1};
        return n;
    };
    auto split = [](int f, double t, int l, int r, double cover) {
        TreeNode n;
        n.feature = f;
        n.threshold = t;
        n.left = l;
        n.right = r;
        n.cover = cover;
        return n;
    };
    const LabelEncoding enc{{"0", "1"}};

    // Hand-built forest with 3 depth-<=2 trees on 4 features, including a
    // duplicated split feature along one path.
    TreeModel a;
    a.enc = enc;
    a.n_features = 4;
    a.nodes = {split(0, 0.0, 1, 2, 100.0), split(1, -0.3, 3, 4, 60.0),
               split(2, 0.7, 5, 6, 40.0),  leaf(25.0, 5.0),
               leaf(10.0, 20.0),           leaf(8.0, 22.0),
               leaf(9.0, 1.0)};
    TreeModel b;
    b.enc = enc;
    b.n_features = 4;
    b.nodes = {split(0, 0.5, 1, 2, 100.0), split(0, -0.5, 3, 4, 70.0), leaf(5.0, 25.0),
               leaf(30.0, 10.0), leaf(10.0, 20.0)};
    TreeModel c;
    c.enc = enc;
    c.n_features = 4;
    c.nodes = {split(3, 0.1, 1, 2, 100.0), leaf(45.0, 0.0), leaf(0.0, 55.0)};
    ForestModel built;
    built.enc = enc;
    built.n_features = 4;
    built.trees = {a, b, c};

    SpectraMatrix queries = SpectraMatrix::zeros(16, 4);
    rng::Stream qs(909);
    for (auto& v : queries.values) v = qs.next_normal();
    queries.at(0, 0) = 0.0;
    queries.at(1, 0) = 0.5;

    // A fitted forest within the oracle envelope (4 features, 3 trees,
    // depth 2).
    SpectraMatrix train = SpectraMatrix::zeros(60, 4);
    train.labels.assign(60, "0");
    rng::Stream ts(910);
    for (std::size_t i = 0; i < 60; ++i) {
        const bool cls1 = i >= 30;
        if (cls1) train.labels[i] = "1";
        auto r = train.row(i);
        for (std::size_t j = 0; j < 4; ++j) r[j] = ts.next_normal() + (cls1 ? 1.0 : 0.0);
    }
    const auto fitted = fit_forest(train, 3, 2, 911);

    double worst_gap = 0.0;
    const std::vector<const ForestModel*> candidates = {&built, &fitted};
    for (const ForestModel* forest : candidates) {
        const auto map = attribution::tree_shap(*forest, queries, true);
        const double base_gap =
            std::abs(map.base_value - test_oracles::brute_force_base_value(*forest));
        worst_gap = std::max(worst_gap, base_gap);
        for (std::size_t i = 0; i < queries.n_rows; ++i) {
            const auto expected = test_oracles::brute_force_shapley(*forest, queries.row(i));
            for (std::size_t j = 0; j < 4; ++j) {
                worst_gap = std::max(worst_gap, std::abs(map.per_sample[i][j] - expected[j]));
            }
        }
    }
    add_check(checks, "SHAP equals exhaustive-coalition Shapley (<= 1e-9)", worst_gap <= 1e-9,
              "worst gap " + format_double(worst_gap));

    // Local accuracy on a deeper fitted forest over every explained sample.
    SpectraMatrix wide = SpectraMatrix::zeros(120, 12);
    wide.labels.assign(120, "0");
    rng::Stream ws(912);
    for (std::size_t i = 0; i < 120; ++i) {
        const bool cls1 = i >= 60;
        if (cls1) wide.labels[i] = "1";
        auto r = wide.row(i);
        for (std::size_t j = 0; j < 12; ++j) r[j] = ws.next_normal() + (cls1 ? 0.4 : 0.0);
    }
    const auto deep = fit_forest(wide, 50, std::nullopt, 913);
    const auto map = attribution::tree_shap(deep, wide, true);
    const auto frac = forest_vote_fraction(deep, wide);
    double worst_local = 0.0;
    for (std::size_t i = 0; i < wide.n_rows; ++i) {
        double total = map.base_value;
        for (double v : map.per_sample[i]) total += v;
        worst_local = std::max(worst_local,
                               std::abs(total - frac[static_cast<Eigen::Index>(i)]));
    }
    add_check(checks, "SHAP local accuracy <= 1e-9 on every explained sample",
              worst_local <= 1e-9, "worst " + format_double(worst_local));

    // Dummy: feature 3 is used only by tree c, so the {a, b} forest never
    // touches it and its attribution must be exactly zero.
    ForestModel no_c = built;
    no_c.trees = {a, b};
    const auto map_no_c = attribution::tree_shap(no_c, queries, false);
    add_check(checks, "SHAP dummy feature gets exactly zero", map_no_c.mean_abs_shap[3] == 0.0,
              "mean_abs=" + format_double(map_no_c.mean_abs_shap[3]));

    // Symmetry: identical columns used symmetrically by the model.
    TreeModel s0;
    s0.enc = enc;
    s0.n_features = 2;
    s0.nodes = {split(0, 0.0, 1, 2, 100.0), leaf(50.0, 0.0), leaf(0.0, 50.0)};
    TreeModel s1 = s0;
    s1.nodes[0].feature = 1;
    ForestModel sym;
    sym.enc = enc;
    sym.n_features = 2;
    sym.trees = {s0, s1};
    SpectraMatrix twin = SpectraMatrix::zeros(30, 2);
    rng::Stream ss(914);
    for (std::size_t i = 0; i < 30; ++i) {
        const double v = ss.next_normal();
        twin.at(i, 0) = v;
        twin.at(i, 1) = v;
    }
    const auto sym_map = attribution::tree_shap(sym, twin, true);
    double sym_gap = std::abs(sym_map.mean_abs_shap[0] - sym_map.mean_abs_shap[1]);
    for (std::size_t i = 0; i < twin.n_rows; ++i) {
        sym_gap = std::max(sym_gap,
                           std::abs(sym_map.per_sample[i][0] - sym_map.per_sample[i][1]));
    }
    add_check(checks, "SHAP symmetry for identical columns (<= 1e-9)", sym_gap <= 1e-9,
              "gap " + format_double(sym_gap));
    return checks;
}

// ---------------------------------------------------------- criterion 10 --

std::vector<Check> criterion10() {
    std::vector<Check> checks;
    if (g_cli_path.empty()) {
        add_check(checks, "CLI determinism (needs --cli <path>)", false, "no CLI path given");
        return checks;
    }
    const fs::path base = fs::temp_directory_path() / "specsep_acceptance_c10";
    fs::remove_all(base);
    fs::create_directories(base);
    // Reduced N3 grid keeps this quick; the property under test is that the
    // worker count and rerunning never change report bytes.
    const std::string common = std::string("\"") + g_cli_path +
                               "\" run N3 --seed 7 --samples 300 "
                               "--grid-override n=5,50,200 --grid-override dsigma=0.3,1.5";
    auto run_into = [&](const std::string& dir, int jobs) {
        const std::string cmd = common + " --jobs " + std::to_string(jobs) + " --out-dir " +
                                (base / dir).string() + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const int rc1 = run_into("jobs1", 1);
    const int rc8 = run_into("jobs8", 8);
    const int rc1b = run_into("jobs1b", 1);
    add_check(checks, "CLI runs exit 0", rc1 == 0 && rc8 == 0 && rc1b == 0,
              "exit codes " + std::to_string(rc1) + "," + std::to_string(rc8) + "," +
                  std::to_string(rc1b));

    auto file_bytes = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    };
    bool identical = true;
    std::string detail;
    for (const std::string file : {"N3_report.json", "N3_report.csv"}) {
        const auto j1 = file_bytes(base / "jobs1" / file);
        const auto j8 = file_bytes(base / "jobs8" / file);
        const auto j1b = file_bytes(base / "jobs1b" / file);
        if (j1.empty() || j1 != j8 || j1 != j1b) {
            identical = false;
            detail += file + " differs; ";
        }
    }
    add_check(checks, "run N3 --seed 7: --jobs 1 vs --jobs 8 vs rerun are byte-identical",
              identical, detail);
    return checks;
}

// ------------------------------------------------------------------ main --

struct Criterion {
    std::string label;
    std::function<std::vector<Check>()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, Criterion> criteria = {
        {1, {"S1 chance level for all four models", criterion1}},
        {2, {"N2 Bayes threshold matches the analytic chi-square accuracy", criterion2}},
        {3, {"N3 dimensional amplification of small variance gaps", criterion3}},
        {4, {"N1 correlation slows but does not stop separability", criterion4}},
        {5, {"norm concentration and vanishing histogram overlap", criterion5}},
        {6, {"S2 width difference becomes separable at large n", criterion6}},
        {7, {"S3 noise-offset separation per model family", criterion7}},
        {8, {"regional audits (measured dataset or synthetic controls)", criterion8}},
        {9, {"TreeSHAP exactness, additivity, dummy and symmetry", criterion9}},
        {10, {"CLI determinism across worker counts", criterion10}},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) {
            g_cli_path = argv[++i];
        } else {
            selected.push_back(std::atoi(arg.c_str()));
        }
    }
    if (selected.empty()) {
        for (const auto& [num, criterion] : criteria) {
            (void)criterion;
            selected.push_back(num);
        }
    }

    int failures = 0;
    for (int num : selected) {
        const auto it = criteria.find(num);
        if (it == criteria.end()) {
            std::cerr << "unknown criterion " << num << "\n";
            return 2;
        }
        const auto start = std::chrono::steady_clock::now();
        std::vector<Check> checks;
        bool threw = false;
        std::string what;
        try {
            checks = it->second.fn();
        } catch (const std::exception& e) {
            threw = true;
            what = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool pass = !threw;
        for (const auto& c : checks) pass = pass && c.pass;
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << num << ": "
                  << it->second.label << " (" << format_double(std::round(secs * 10.0) / 10.0)
                  << " s)\n";
        if (threw) std::cout << "       exception: " << what << "\n";
        for (const auto& c : checks) {
            if (!c.pass || std::getenv("SPECSEP_ACCEPTANCE_VERBOSE")) {
                std::cout << "       " << (c.pass ? "ok    " : "FAILED") << " " << c.name
                          << (c.detail.empty() ? "" : "  [" + c.detail + "]") << "\n";
            }
        }
        if (!pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
