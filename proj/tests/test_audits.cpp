#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "specsep/audits.hpp"
#include "specsep/common.hpp"
#include "specsep/rng.hpp"
#include "specsep/stats.hpp"
#include "specsep/synthgen.hpp"

using namespace specsep;
using namespace specsep::audits;

namespace {

// Two classes whose rows have identical value multisets in distribution but
// opposite per-column mean patterns (+d on even columns for one class, on odd
// columns for the other). Column structure separates them; row-multiset
// statistics do not.
SpectraMatrix alternating_mean_pair(std::size_t dim, double d, std::size_t per_class,
                                    std::uint64_t seed) {
    SpectraMatrix out = SpectraMatrix::zeros(2 * per_class, dim);
    out.labels.assign(2 * per_class, "0");
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool cls1 = i >= per_class;
        if (cls1) out.labels[i] = "1";
        rng::Stream stream(rng::derive(seed, i));
        auto r = out.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            const bool even = j % 2 == 0;
            const double mean = (even != cls1) ? d : -d;
            r[j] = mean + stream.next_normal();
        }
    }
    return out;
}

SpectraMatrix identical_lorentzian_pair(std::size_t dim, std::size_t per_class,
                                        std::uint64_t seed) {
    using namespace synthgen;
    LorentzianSpectrumSpec spec{.dim = dim,
                                .centre_mean = 50.0,
                                .centre_sd = 10.0,
                                .fwhm = 7.0,
                                .count = per_class,
                                .noise = LorentzianNoise{0.0, 0.01}};
    auto a = generate_lorentzian_class(spec, rng::derive(seed, 0));
    auto b = generate_lorentzian_class(spec, rng::derive(seed, 1));
    a.labels.assign(per_class, "0");
    b.labels.assign(per_class, "1");
    return vstack(a, b);
}

std::multiset<double> row_multiset(const SpectraMatrix& m, std::size_t i) {
    auto r = m.row(i);
    return {r.begin(), r.end()};
}

SpectraMatrix with_axis(SpectraMatrix m, double start, double step) {
    m.axis.resize(m.n_cols);
    for (std::size_t j = 0; j < m.n_cols; ++j) m.axis[j] = start + step * static_cast<double>(j);
    return m;
}

}  // namespace

TEST_CASE("region masks: axis and pixel based") {
    auto data = with_axis(SpectraMatrix::zeros(3, 100), 337.0, 4.65);  // ~337..797 nm
    const auto rho1 = named_region(data, "rho1");
    for (std::size_t j : rho1.indices) {
        CHECK(data.axis[j] >= 337.0);
        CHECK(data.axis[j] < 380.0);
    }
    const auto rho4 = named_region(data, "rho4");
    CHECK(rho4.indices.front() > rho1.indices.back());

    const auto first50 = RegionMask::from_pixels(data, "first50", 0, 50);
    CHECK(first50.indices.size() == 50);
    CHECK(first50.indices.front() == 0);
    CHECK_THROWS_AS(RegionMask::from_pixels(data, "bad", 50, 50), ConfigError);
    CHECK_THROWS_AS(RegionMask::from_pixels(data, "bad", 0, 101), ConfigError);
    CHECK_THROWS_AS(named_region(data, "rho9"), ConfigError);

    SpectraMatrix no_axis = SpectraMatrix::zeros(3, 10);
    CHECK_THROWS_AS(named_region(no_axis, "rho1"), ConfigError);
}

TEST_CASE("global permutation: same shuffle everywhere, inverse restores input") {
    auto data = alternating_mean_pair(16, 0.5, 10, 3);
    data = with_axis(std::move(data), 0.0, 1.0);
    const auto shuffled = global_pixel_permutation(data, 99);
    CHECK(shuffled.labels == data.labels);
    CHECK_FALSE(shuffled.has_axis());  // axis no longer meaningful
    CHECK(shuffled.values != data.values);

    // Recover the permutation from the first row and check every other row
    // uses the same one; applying the inverse restores the original matrix.
    std::vector<std::size_t> perm(data.n_cols, SIZE_MAX);
    for (std::size_t j = 0; j < data.n_cols; ++j) {
        for (std::size_t k = 0; k < data.n_cols; ++k) {
            if (shuffled.at(0, j) == data.at(0, k)) perm[j] = k;
        }
    }
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        for (std::size_t j = 0; j < data.n_cols; ++j) {
            REQUIRE(shuffled.at(i, j) == data.at(i, perm[j]));
        }
    }

    // Column means are a rearrangement of the originals.
    for (std::size_t j = 0; j < data.n_cols; ++j) {
        double a = 0.0;
        double b = 0.0;
        for (std::size_t i = 0; i < data.n_rows; ++i) {
            a += shuffled.at(i, j);
            b += data.at(i, perm[j]);
        }
        CHECK(a == doctest::Approx(b));
    }
}

TEST_CASE("independent row permutation preserves row multisets, kills covariance") {
    using namespace synthgen;
    GaussianClassSpec spec{
        .dim = 100, .mean = 0.0, .sigma = 1.0, .covariance = ToeplitzGeometric{0.5}};
    auto data = sample_gaussian_class(spec, 4000, 5);
    data.labels.assign(4000, "0");
    data.labels[0] = "1";  // labels must survive untouched
    const auto shuffled = independent_row_permutation(data, 41);
    CHECK(shuffled.labels == data.labels);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(row_multiset(shuffled, i) == row_multiset(data, i));
    }

    // Mean covariance at a given lag.
    auto lag_cov = [](const SpectraMatrix& m, std::size_t lag) {
        const std::size_t n = m.n_cols;
        std::vector<double> means(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < m.n_rows; ++i) means[j] += m.at(i, j);
            means[j] /= static_cast<double>(m.n_rows);
        }
        double acc = 0.0;
        for (std::size_t a = 0; a + lag < n; ++a) {
            double c = 0.0;
            for (std::size_t i = 0; i < m.n_rows; ++i) {
                c += (m.at(i, a) - means[a]) * (m.at(i, a + lag) - means[a + lag]);
            }
            acc += c / static_cast<double>(m.n_rows - 1);
        }
        return acc / static_cast<double>(n - lag);
    };
    // The AR(1) structure (lag-1 covariance = rho) collapses to the flat
    // exchangeable level ~ 2*rho/((1-rho)*n), i.e. towards 0 for large n.
    CHECK(lag_cov(data, 1) > 0.45);
    CHECK(lag_cov(data, 40) < 0.05);
    CHECK(std::abs(lag_cov(shuffled, 1)) < 0.06);
    CHECK(std::abs(lag_cov(shuffled, 40)) < 0.06);
}

TEST_CASE("majority baseline") {
    std::vector<std::string> evoo_loo(12, "EVOO");
    evoo_loo.insert(evoo_loo.end(), 7, "LOO");
    CHECK(majority_baseline(evoo_loo) == doctest::Approx(12.0 / 19.0));

    std::vector<std::string> evoo_voo(12, "EVOO");
    evoo_voo.insert(evoo_voo.end(), 8, "VOO");
    CHECK(majority_baseline(evoo_voo) == doctest::Approx(0.6));

    std::vector<std::string> balanced = {"a", "b", "a", "b"};
    CHECK(majority_baseline(balanced) == doctest::Approx(0.5));
    CHECK_THROWS_AS(majority_baseline({}), ConfigError);
}

TEST_CASE("global-vs-independent shuffle contrast on column-structured classes") {
    const auto data = alternating_mean_pair(40, 0.4, 100, 7);
    const eval::ForestSpec forest{100, std::nullopt};
    const eval::SplitScheme plan = eval::StratifiedKFold{5};

    auto eval_on = [&](const SpectraMatrix& d, std::uint64_t seed) {
        return eval::evaluate(forest, d, eval::EvalPlan{plan, seed}, rng::derive(seed, 1)).mean;
    };
    const double raw = eval_on(data, 1);
    const double global = eval_on(global_pixel_permutation(data, 11), 2);
    const double row = eval_on(independent_row_permutation(data, 12), 3);

    CHECK(raw > 0.9);
    CHECK(global > 0.9);  // column statistics survive a global shuffle
    const double baseline = majority_baseline(data.labels);
    CHECK(row <= baseline + 0.05);  // row shuffling removes the signal entirely
    CHECK(global - row >= 0.10);
}

TEST_CASE("pixel count sweep: forced subset at k = region width, determinism") {
    const auto data = alternating_mean_pair(10, 0.8, 30, 9);
    const auto region = RegionMask::from_pixels(data, "all", 0, 10);
    const eval::ModelSpec forest = eval::ForestSpec{20, std::nullopt};
    const auto r1 = pixel_count_sweep(data, region, 10, 10, 5, forest,
                                      eval::StratifiedKFold{3}, 15);
    REQUIRE(r1.points.size() == 1);
    // k equal to the region width admits exactly one subset.
    CHECK(r1.points[0].n_repeats == 1);
    CHECK(r1.points[0].pixels[0].size() == 10);
    CHECK(r1.points[0].sd == 0.0);

    const auto r2 = pixel_count_sweep(data, region, 10, 10, 5, forest,
                                      eval::StratifiedKFold{3}, 15);
    CHECK(sweep_to_json(r1).dump() == sweep_to_json(r2).dump());

    CHECK_THROWS_AS(
        pixel_count_sweep(data, region, 2, 11, 5, forest, eval::StratifiedKFold{3}, 1),
        ConfigError);
}

TEST_CASE("pixel count sweep: null data stays at chance for every k") {
    const auto data = identical_lorentzian_pair(60, 30, 21);
    const auto region = RegionMask::from_pixels(data, "head", 0, 50);
    const eval::ModelSpec forest = eval::ForestSpec{50, std::nullopt};
    const auto sweep = pixel_count_sweep(data, region, 2, 20, 3, forest, eval::LeaveOneOut{}, 33);
    const double se = 0.5 / std::sqrt(static_cast<double>(data.n_rows));
    int inside = 0;
    for (const auto& p : sweep.points) {
        if (std::abs(p.mean - 0.5) <= 3.0 * se + 0.02) ++inside;
    }
    // Every k level must hug chance (allow one excursion for 19 points).
    CHECK(inside >= static_cast<int>(sweep.points.size()) - 1);
}

TEST_CASE("pixel count sweep: accuracy climbs with k on structured data") {
    const auto data = alternating_mean_pair(50, 0.35, 80, 29);
    const auto region = RegionMask::from_pixels(data, "all", 0, 50);
    const eval::ModelSpec forest = eval::ForestSpec{60, std::nullopt};
    const auto sweep =
        pixel_count_sweep(data, region, 2, 30, 4, forest, eval::StratifiedKFold{4}, 51);
    const auto& points = sweep.points;
    const double first = points.front().mean;  // k=2
    const double last = points.back().mean;    // k=30
    CHECK(last > first + 0.15);
    CHECK(last > 0.85);
}

TEST_CASE("window sweep: degenerate full-width window equals whole-spectrum eval") {
    const auto data = alternating_mean_pair(24, 0.5, 40, 31);
    const eval::ModelSpec forest = eval::ForestSpec{30, std::nullopt};
    const auto sweep = window_sweep(data, {24}, forest, eval::StratifiedKFold{4}, 61);
    REQUIRE(sweep.points.size() == 1);
    const auto whole = eval::evaluate(forest, data,
                                      eval::EvalPlan{eval::StratifiedKFold{4},
                                                     rng::derive(61UL, 24UL, 0UL)},
                                      rng::derive(61UL, rng::hash_string("model")));
    CHECK(sweep.points[0].mean == doctest::Approx(whole.mean));
}

TEST_CASE("window sweep: planted signal lights up only overlapping windows") {
    // Signal only in columns [60, 80).
    const std::size_t dim = 120;
    SpectraMatrix data = SpectraMatrix::zeros(200, dim);
    data.labels.assign(200, "0");
    for (std::size_t i = 100; i < 200; ++i) data.labels[i] = "1";
    rng::Stream noise(404);
    for (std::size_t i = 0; i < 200; ++i) {
        auto r = data.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            r[j] = noise.next_normal();
            if (i >= 100 && j >= 60 && j < 80) r[j] += 1.0;
        }
    }
    const eval::ModelSpec forest = eval::ForestSpec{50, std::nullopt};
    const auto sweep = window_sweep(data, {20, 50}, forest, eval::StratifiedKFold{5}, 71);
    const double se = 0.5 / std::sqrt(200.0);
    for (const auto& p : sweep.points) {
        const auto width = static_cast<std::size_t>(p.coords[0].second);
        const auto start = static_cast<std::size_t>(p.coords[1].second);
        const bool overlaps = start < 80 && start + width > 60;
        if (overlaps) {
            CHECK(p.mean > 0.8);
        } else {
            CHECK(std::abs(p.mean - 0.5) < 3.0 * se + 0.03);
        }
    }
    CHECK_THROWS_AS(window_sweep(data, {}, forest, eval::StratifiedKFold{5}, 1), ConfigError);
    CHECK_THROWS_AS(window_sweep(data, {121}, forest, eval::StratifiedKFold{5}, 1), ConfigError);
}

TEST_CASE("sweep csv shape") {
    const auto data = alternating_mean_pair(8, 0.9, 15, 77);
    const auto region = RegionMask::from_pixels(data, "all", 0, 8);
    const auto sweep = pixel_count_sweep(data, region, 2, 4, 2, eval::ForestSpec{10, std::nullopt},
                                         eval::StratifiedKFold{3}, 5);
    const auto csv = sweep_to_csv(sweep);
    CHECK(csv.rfind("kind,k,mean,sd,n_repeats,pixels\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);
}
