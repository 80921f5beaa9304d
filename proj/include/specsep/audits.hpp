#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsep/evalharness.hpp"
#include "specsep/matrix.hpp"

namespace specsep::audits {

// Contiguous slice of the detector, named either by a wavelength interval
// [lo, hi) resolved against the dataset axis, or directly by pixel indices.
struct RegionMask {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    bool by_axis = false;
    std::vector<std::size_t> indices;  // strictly increasing

    static RegionMask from_axis(const SpectraMatrix& data, std::string name, double lo, double hi);
    static RegionMask from_pixels(const SpectraMatrix& data, std::string name, std::size_t lo,
                                  std::size_t hi);
};

// The named spectral regions used throughout the real-data audits, in nm.
// rho1 337-380 (noise only), rho2 380-420 (excitation peak, normally
// masked), rho3 420-630, rho4 630-775 (main fluorescence), rho5 775-800.
RegionMask named_region(const SpectraMatrix& data, const std::string& name);

// One column permutation drawn from the seed and applied to every row.
// Column statistics survive (reindexed); physical contiguity does not. The
// axis is dropped since it no longer means anything.
SpectraMatrix global_pixel_permutation(const SpectraMatrix& data, std::uint64_t seed);

// An independent permutation per row; destroys inter-pixel covariance while
// preserving each row's multiset of values.
SpectraMatrix independent_row_permutation(const SpectraMatrix& data, std::uint64_t seed);

// Accuracy of always predicting the most frequent class.
double majority_baseline(const std::vector<std::string>& labels);

struct SweepPoint {
    // pixel-count sweeps: {"k": k}; window sweeps: {"width": W, "start": s}.
    std::vector<std::pair<std::string, double>> coords;
    double mean = 0.0;
    double sd = 0.0;
    int n_repeats = 1;
    std::vector<double> values;                    // per repeat (or per fold set)
    std::vector<std::vector<std::size_t>> pixels;  // per repeat
};

struct SweepResult {
    std::string kind;  // "pixel-count" | "window"
    std::vector<SweepPoint> points;
};

// For each subset size k in [k_lo, k_hi], draws `repeats` random k-subsets of
// the region's columns (without replacement within a subset), evaluates the
// model on each subset with the plan, and aggregates mean +- sd over subsets.
// The model seed is pinned once per audit so fold scatter reflects data.
SweepResult pixel_count_sweep(const SpectraMatrix& data, const RegionMask& region,
                              std::size_t k_lo, std::size_t k_hi, int repeats,
                              const eval::ModelSpec& model, const eval::SplitScheme& split,
                              std::uint64_t seed);

// Tiles the column axis into consecutive non-overlapping windows of each
// width (trailing partial window dropped) and evaluates the model per window.
SweepResult window_sweep(const SpectraMatrix& data, const std::vector<std::size_t>& widths,
                         const eval::ModelSpec& model, const eval::SplitScheme& split,
                         std::uint64_t seed);

nlohmann::json sweep_to_json(const SweepResult& result);
std::string sweep_to_csv(const SweepResult& result);

}  // namespace specsep::audits
