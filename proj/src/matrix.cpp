#include "specsep/matrix.hpp"

#include "specsep/common.hpp"

namespace specsep {

SpectraMatrix SpectraMatrix::zeros(std::size_t rows, std::size_t cols) {
    SpectraMatrix m;
    m.n_rows = rows;
    m.n_cols = cols;
    m.values.assign(rows * cols, 0.0);
    return m;
}

void SpectraMatrix::validate() const {
    if (values.size() != n_rows * n_cols) {
        throw ConfigError("SpectraMatrix: value buffer does not match shape");
    }
    if (!axis.empty()) {
        if (axis.size() != n_cols) {
            throw ConfigError("SpectraMatrix: axis length does not match column count");
        }
        for (std::size_t j = 1; j < axis.size(); ++j) {
            if (!(axis[j] > axis[j - 1])) {
                throw ConfigError("SpectraMatrix: axis must be strictly increasing at index " +
                                  std::to_string(j));
            }
        }
    }
    if (!labels.empty() && labels.size() != n_rows) {
        throw ConfigError("SpectraMatrix: label count does not match row count");
    }
}

SpectraMatrix select_columns(const SpectraMatrix& m, std::span<const std::size_t> cols) {
    for (std::size_t j : cols) {
        if (j >= m.n_cols) throw ConfigError("select_columns: column index out of range");
    }
    SpectraMatrix out;
    out.n_rows = m.n_rows;
    out.n_cols = cols.size();
    out.values.resize(out.n_rows * out.n_cols);
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
            out.values[i * out.n_cols + k] = m.at(i, cols[k]);
        }
    }
    if (m.has_axis()) {
        out.axis.reserve(cols.size());
        for (std::size_t j : cols) out.axis.push_back(m.axis[j]);
    }
    out.labels = m.labels;
    out.validate();
    return out;
}

SpectraMatrix select_rows(const SpectraMatrix& m, std::span<const std::size_t> rows) {
    for (std::size_t i : rows) {
        if (i >= m.n_rows) throw ConfigError("select_rows: row index out of range");
    }
    SpectraMatrix out;
    out.n_rows = rows.size();
    out.n_cols = m.n_cols;
    out.values.resize(out.n_rows * out.n_cols);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto src = m.row(rows[k]);
        std::copy(src.begin(), src.end(), out.values.begin() + k * out.n_cols);
    }
    out.axis = m.axis;
    if (m.has_labels()) {
        out.labels.reserve(rows.size());
        for (std::size_t i : rows) out.labels.push_back(m.labels[i]);
    }
    return out;
}

SpectraMatrix vstack(const SpectraMatrix& a, const SpectraMatrix& b) {
    if (a.n_cols != b.n_cols) throw ConfigError("vstack: column counts differ");
    if (a.has_labels() != b.has_labels()) {
        throw ConfigError("vstack: label presence differs between operands");
    }
    SpectraMatrix out;
    out.n_rows = a.n_rows + b.n_rows;
    out.n_cols = a.n_cols;
    out.values = a.values;
    out.values.insert(out.values.end(), b.values.begin(), b.values.end());
    out.axis = a.axis;
    if (a.has_labels()) {
        out.labels = a.labels;
        out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    }
    return out;
}

}  // namespace specsep
