#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "specsep/evalharness.hpp"
#include "specsep/matrix.hpp"
#include "specsep/models.hpp"

namespace specsep::attribution {

struct WindowInfo {
    std::size_t start = 0;
    std::size_t width = 0;
    double cv_mean_accuracy = 0.0;
    double cv_sd_accuracy = 0.0;
};

struct AttributionMap {
    std::vector<std::size_t> feature_indices;  // global column positions
    std::vector<double> mean_abs_shap;         // per feature, arbitrary units
    double base_value = 0.0;                   // expected explained output
    // Per-sample SHAP matrix (rows x features), kept when requested so the
    // additivity audit can run downstream.
    std::vector<std::vector<double>> per_sample;
    std::optional<WindowInfo> window;
};

// Exact path-dependent TreeSHAP over the forest's decision paths, using the
// training cover stored on every node. The explained output is the fraction
// of trees voting for class 1, so for every row
//   base_value + sum(shap values) == forest vote fraction.
AttributionMap tree_shap(const models::ForestModel& forest, const SpectraMatrix& data,
                         bool keep_per_sample = false);

// SHAP values for a single row of `data` under one tree (vote output 0/1).
// Building block of tree_shap, exposed for the exhaustive-coalition tests.
std::vector<double> tree_shap_single(const models::TreeModel& tree, std::span<const double> x,
                                     std::size_t n_features);
double tree_expected_vote(const models::TreeModel& tree);

// For every non-overlapping window of every width: evaluates the forest with
// the plan, refits on the full window data, and maps mean |SHAP| per pixel in
// global coordinates.
std::vector<AttributionMap> windowed_shap_map(const SpectraMatrix& data,
                                              const std::vector<std::size_t>& widths,
                                              const eval::ForestSpec& forest_spec,
                                              const eval::SplitScheme& split, std::uint64_t seed,
                                              bool keep_per_sample = false);

nlohmann::json attribution_to_json(const std::vector<AttributionMap>& maps);
// Columns: width, start, pixel, wavelength (blank without an axis), mean_abs_shap.
std::string attribution_to_csv(const std::vector<AttributionMap>& maps,
                               const std::vector<double>& axis);

}  // namespace specsep::attribution
