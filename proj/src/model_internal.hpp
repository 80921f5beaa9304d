#pragma once

#include <vector>

#include <Eigen/Dense>

#include "specsep/matrix.hpp"
#include "specsep/models.hpp"

namespace specsep::models::detail {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline RowMajorMap to_eigen(const SpectraMatrix& m) {
    return RowMajorMap(m.values.data(), static_cast<Eigen::Index>(m.n_rows),
                       static_cast<Eigen::Index>(m.n_cols));
}

// Encoded class index (0/1) per row; throws if labels are missing or not
// exactly two classes.
std::vector<int> encode_labels(const SpectraMatrix& train, LabelEncoding& enc);

void check_feature_count(std::size_t model_dim, const SpectraMatrix& data, const char* what);

}  // namespace specsep::models::detail
