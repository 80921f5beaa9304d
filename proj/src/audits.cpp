#include "specsep/audits.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "specsep/common.hpp"
#include "specsep/rng.hpp"
#include "specsep/stats.hpp"
#include "specsep/textio.hpp"

namespace specsep::audits {

RegionMask RegionMask::from_axis(const SpectraMatrix& data, std::string name, double lo,
                                 double hi) {
    if (!data.has_axis()) throw ConfigError("RegionMask: dataset has no wavelength axis");
    if (!(hi > lo)) throw ConfigError("RegionMask: empty interval");
    RegionMask r;
    r.name = std::move(name);
    r.lo = lo;
    r.hi = hi;
    r.by_axis = true;
    for (std::size_t j = 0; j < data.n_cols; ++j) {
        if (data.axis[j] >= lo && data.axis[j] < hi) r.indices.push_back(j);
    }
    if (r.indices.empty()) {
        throw ConfigError("RegionMask '" + r.name + "': no columns in [" +
                          textio::format_double(lo) + ", " + textio::format_double(hi) + ")");
    }
    return r;
}

RegionMask RegionMask::from_pixels(const SpectraMatrix& data, std::string name, std::size_t lo,
                                   std::size_t hi) {
    if (!(hi > lo)) throw ConfigError("RegionMask: empty pixel range");
    if (hi > data.n_cols) throw ConfigError("RegionMask: pixel range exceeds dataset width");
    RegionMask r;
    r.name = std::move(name);
    r.lo = static_cast<double>(lo);
    r.hi = static_cast<double>(hi);
    r.by_axis = false;
    for (std::size_t j = lo; j < hi; ++j) r.indices.push_back(j);
    return r;
}

RegionMask named_region(const SpectraMatrix& data, const std::string& name) {
    static const std::map<std::string, std::pair<double, double>> bounds = {
        {"rho1", {337.0, 380.0}},
        {"rho2", {380.0, 420.0}},
        {"rho3", {420.0, 630.0}},
        {"rho4", {630.0, 775.0}},
        {"rho5", {775.0, 800.0}},
    };
    const auto it = bounds.find(name);
    if (it == bounds.end()) {
        throw ConfigError("unknown region '" + name + "' (expected rho1..rho5)");
    }
    return RegionMask::from_axis(data, name, it->second.first, it->second.second);
}

namespace {

std::vector<std::size_t> permutation(std::size_t n, rng::Stream& stream) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[stream.next_below(i)]);
    return p;
}

}  // namespace

SpectraMatrix global_pixel_permutation(const SpectraMatrix& data, std::uint64_t seed) {
    if (data.n_cols < 2) throw ConfigError("global_pixel_permutation: width must be >= 2");
    rng::Stream stream(rng::derive(seed));
    const auto perm = permutation(data.n_cols, stream);
    SpectraMatrix out = SpectraMatrix::zeros(data.n_rows, data.n_cols);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        const auto src = data.row(i);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < data.n_cols; ++j) dst[j] = src[perm[j]];
    }
    out.labels = data.labels;
    return out;
}

SpectraMatrix independent_row_permutation(const SpectraMatrix& data, std::uint64_t seed) {
    if (data.n_cols < 2) throw ConfigError("independent_row_permutation: width must be >= 2");
    SpectraMatrix out = SpectraMatrix::zeros(data.n_rows, data.n_cols);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        rng::Stream stream(rng::derive(seed, i));
        const auto perm = permutation(data.n_cols, stream);
        const auto src = data.row(i);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < data.n_cols; ++j) dst[j] = src[perm[j]];
    }
    out.labels = data.labels;
    return out;
}

double majority_baseline(const std::vector<std::string>& labels) {
    if (labels.empty()) throw ConfigError("majority_baseline: empty label vector");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    std::size_t best = 0;
    for (const auto& [label, count] : counts) {
        (void)label;
        best = std::max(best, count);
    }
    return static_cast<double>(best) / static_cast<double>(labels.size());
}

SweepResult pixel_count_sweep(const SpectraMatrix& data, const RegionMask& region,
                              std::size_t k_lo, std::size_t k_hi, int repeats,
                              const eval::ModelSpec& model, const eval::SplitScheme& split,
                              std::uint64_t seed) {
    if (k_lo < 1 || k_hi < k_lo) throw ConfigError("pixel_count_sweep: bad k range");
    if (k_hi > region.indices.size()) {
        throw ConfigError("pixel_count_sweep: k exceeds region width " +
                          std::to_string(region.indices.size()));
    }
    if (repeats < 1) throw ConfigError("pixel_count_sweep: repeats must be >= 1");

    const std::uint64_t model_seed = rng::derive(seed, rng::hash_string("model"));
    SweepResult result;
    result.kind = "pixel-count";
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        SweepPoint point;
        point.coords = {{"k", static_cast<double>(k)}};
        const int effective_repeats = k == region.indices.size() ? 1 : repeats;
        point.n_repeats = effective_repeats;
        for (int rep = 0; rep < effective_repeats; ++rep) {
            rng::Stream stream(rng::derive(seed, k, static_cast<std::uint64_t>(rep)));
            // Distinct columns via partial Fisher-Yates over the region.
            std::vector<std::size_t> pool = region.indices;
            std::vector<std::size_t> subset;
            subset.reserve(k);
            for (std::size_t pick = 0; pick < k; ++pick) {
                const std::size_t j = pick + stream.next_below(pool.size() - pick);
                std::swap(pool[pick], pool[j]);
                subset.push_back(pool[pick]);
            }
            std::sort(subset.begin(), subset.end());
            const auto sliced = select_columns(data, subset);
            eval::EvalPlan plan{split, rng::derive(seed, k, static_cast<std::uint64_t>(rep), 7)};
            const auto r = eval::evaluate(model, sliced, plan, model_seed);
            point.values.push_back(r.mean);
            point.pixels.push_back(std::move(subset));
        }
        point.mean = stats::mean(point.values);
        point.sd = point.values.size() > 1 ? stats::stddev_population(point.values) : 0.0;
        result.points.push_back(std::move(point));
    }
    return result;
}

SweepResult window_sweep(const SpectraMatrix& data, const std::vector<std::size_t>& widths,
                         const eval::ModelSpec& model, const eval::SplitScheme& split,
                         std::uint64_t seed) {
    if (widths.empty()) throw ConfigError("window_sweep: empty width list");
    const std::uint64_t model_seed = rng::derive(seed, rng::hash_string("model"));
    SweepResult result;
    result.kind = "window";
    for (std::size_t w : widths) {
        if (w < 1 || w > data.n_cols) {
            throw ConfigError("window_sweep: width " + std::to_string(w) +
                              " outside [1, " + std::to_string(data.n_cols) + "]");
        }
        for (std::size_t start = 0; start + w <= data.n_cols; start += w) {
            std::vector<std::size_t> cols(w);
            for (std::size_t j = 0; j < w; ++j) cols[j] = start + j;
            const auto sliced = select_columns(data, cols);
            eval::EvalPlan plan{split, rng::derive(seed, w, start)};
            const auto r = eval::evaluate(model, sliced, plan, model_seed);
            SweepPoint point;
            point.coords = {{"width", static_cast<double>(w)},
                            {"start", static_cast<double>(start)}};
            point.mean = r.mean;
            point.sd = r.sd;
            point.n_repeats = 1;
            point.values = r.fold_accuracies;
            point.pixels.push_back(std::move(cols));
            result.points.push_back(std::move(point));
        }
    }
    return result;
}

nlohmann::json sweep_to_json(const SweepResult& result) {
    nlohmann::json j;
    j["kind"] = result.kind;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : result.points) {
        nlohmann::json pj;
        for (const auto& [name, value] : p.coords) pj[name] = value;
        pj["mean"] = p.mean;
        pj["sd"] = p.sd;
        pj["n_repeats"] = p.n_repeats;
        pj["values"] = p.values;
        nlohmann::json pixel_sets = nlohmann::json::array();
        for (const auto& set : p.pixels) pixel_sets.push_back(set);
        pj["pixels"] = pixel_sets;
        pts.push_back(pj);
    }
    j["points"] = pts;
    return j;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::set<std::string> coord_names;
    for (const auto& p : result.points) {
        for (const auto& [name, value] : p.coords) {
            (void)value;
            coord_names.insert(name);
        }
    }
    std::ostringstream os;
    os << "kind";
    for (const auto& c : coord_names) os << ',' << c;
    os << ",mean,sd,n_repeats,pixels\n";
    for (const auto& p : result.points) {
        os << result.kind;
        for (const auto& c : coord_names) {
            os << ',';
            for (const auto& [name, value] : p.coords) {
                if (name == c) os << textio::format_double(value);
            }
        }
        os << ',' << textio::format_double(p.mean) << ',' << textio::format_double(p.sd) << ','
           << p.n_repeats << ',';
        // Repeat subsets joined by '|', pixels within a subset by ';'.
        for (std::size_t s = 0; s < p.pixels.size(); ++s) {
            if (s) os << '|';
            for (std::size_t i = 0; i < p.pixels[s].size(); ++i) {
                if (i) os << ';';
                os << p.pixels[s][i];
            }
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace specsep::audits
