#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "specsep/audits.hpp"
#include "specsep/matrix.hpp"

namespace specsep::dataio {

// Canonical labelled-spectra CSV: header "label,<wl1>,<wl2>,..." with
// strictly increasing numeric wavelengths, one measured spectrum per row.
// Intensities are carried raw; nothing here rescales, centres or otherwise
// normalises them.
SpectraMatrix load_spectra(const std::filesystem::path& path,
                           const std::vector<std::string>* allowed_labels = nullptr);

// Lossless inverse of load_spectra (values written with round-trip
// precision).
void save_spectra(const SpectraMatrix& data, const std::filesystem::path& path);

// Drops every column whose wavelength lies in any [lo, hi) interval.
SpectraMatrix apply_mask(const SpectraMatrix& data,
                         const std::vector<std::pair<double, double>>& intervals);

SpectraMatrix select_region(const SpectraMatrix& data, const audits::RegionMask& region);

struct ClassPairTask {
    std::string positive;
    std::string negative;
    // Default mask removes the excitation-peak band.
    std::vector<std::pair<double, double>> masks = {{380.0, 420.0}};
};

// Rows belonging to either task class, in their original order.
SpectraMatrix filter_classes(const SpectraMatrix& data, const ClassPairTask& task);

// Unbiased sample covariance of one class's rows; exactly symmetric.
Eigen::MatrixXd class_covariance(const SpectraMatrix& data, const std::string& label);
std::string covariance_to_csv(const Eigen::MatrixXd& cov);

// Dataset manifest: declared class names with expected row counts.
struct DatasetManifest {
    std::vector<std::pair<std::string, std::size_t>> expected_counts;
};

DatasetManifest load_manifest(const std::filesystem::path& path);

struct ManifestCheck {
    bool all_match = true;
    // class, expected, actual (0 for classes absent from the data).
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> rows;
};

// Reports expected vs. actual per-class counts; never throws on mismatch.
ManifestCheck check_manifest(const SpectraMatrix& data, const DatasetManifest& manifest);

}  // namespace specsep::dataio
