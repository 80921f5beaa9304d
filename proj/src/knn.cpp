#include "model_internal.hpp"
#include "specsep/common.hpp"
#include "specsep/models.hpp"

namespace specsep::models {

KnnModel fit_knn(const SpectraMatrix& train, int k) {
    if (k < 1) throw ConfigError("fit_knn: k must be >= 1");
    if (static_cast<std::size_t>(k) > train.n_rows) {
        throw ConfigError("fit_knn: k exceeds training-set size");
    }
    KnnModel model;
    const auto y = detail::encode_labels(train, model.enc);
    model.train = detail::to_eigen(train);
    model.train_y = y;
    model.k = k;
    return model;
}

}  // namespace specsep::models
