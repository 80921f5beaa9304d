#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace specsep {

// Row-major matrix of intensities. `axis` (strictly increasing wavelengths or
// pixel positions) and `labels` (one class string per row) are optional and
// empty when absent. This is the carrier type every module exchanges.
struct SpectraMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;       // n_rows * n_cols
    std::vector<double> axis;         // empty or n_cols
    std::vector<std::string> labels;  // empty or n_rows

    static SpectraMatrix zeros(std::size_t rows, std::size_t cols);

    bool has_axis() const { return !axis.empty(); }
    bool has_labels() const { return !labels.empty(); }

    double& at(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }

    std::span<double> row(std::size_t i) { return {values.data() + i * n_cols, n_cols}; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }

    // Throws ConfigError on shape/axis/label violations.
    void validate() const;
};

SpectraMatrix select_columns(const SpectraMatrix& m, std::span<const std::size_t> cols);
SpectraMatrix select_rows(const SpectraMatrix& m, std::span<const std::size_t> rows);
// Stacks rows of a on top of b; requires equal column counts and consistent
// axis/label presence.
SpectraMatrix vstack(const SpectraMatrix& a, const SpectraMatrix& b);

}  // namespace specsep
