#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "model_internal.hpp"
#include "specsep/common.hpp"
#include "specsep/models.hpp"

namespace specsep::models {

Eigen::VectorXd QdaClassFactor::quadratic_form(const Eigen::MatrixXd& centered) const {
    if (const auto* dense = std::get_if<Dense>(&rep)) {
        // Sigma = L L^T, so qf(x) = |L^-1 x|^2.
        Eigen::MatrixXd solved = dense->chol_lower.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd(centered.transpose()));
        return solved.colwise().squaredNorm().transpose();
    }
    const auto& dual = std::get<Dual>(rep);
    // Sigma^-1 = (I - V diag(w) V^T) / ridge on the whole space.
    const Eigen::MatrixXd proj = centered * dual.basis;  // rows x r
    const Eigen::VectorXd full = centered.rowwise().squaredNorm();
    const Eigen::VectorXd reduced = (proj.array().square().rowwise() *
                                     dual.weights.transpose().array())
                                        .rowwise()
                                        .sum();
    return (full - reduced) / dual.ridge;
}

namespace {

QdaClassFactor make_dense_factor(const Eigen::MatrixXd& centered, double lambda,
                                 std::size_t n_samples) {
    const auto n = centered.cols();
    Eigen::MatrixXd cov = (centered.transpose() * centered) /
                          static_cast<double>(n_samples - 1);
    const double ridge = lambda * cov.trace() / static_cast<double>(n);
    cov *= (1.0 - lambda);
    cov.diagonal().array() += ridge;

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericError(
            "fit_qda: regularised covariance is singular (increase lambda or sample count)");
    }
    QdaClassFactor f;
    double log_det = 0.0;
    const Eigen::MatrixXd L = llt.matrixL();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(L(i, i) > 0.0)) {
            throw NumericError("fit_qda: covariance factorisation produced a zero pivot");
        }
        log_det += 2.0 * std::log(L(i, i));
    }
    f.rep = QdaClassFactor::Dense{L};
    f.log_det = log_det;
    return f;
}

// Gram-space factor for the n > N regime: Sigma_hat = B^T B with B the
// centered rows divided by sqrt(N-1), so its nonzero spectrum equals that of
// the small matrix B B^T.
QdaClassFactor make_dual_factor(const Eigen::MatrixXd& centered, double lambda,
                                std::size_t n_samples) {
    const auto n = centered.cols();
    const auto rows = centered.rows();
    const double scale = 1.0 / static_cast<double>(n_samples - 1);
    Eigen::MatrixXd gram = centered * centered.transpose() * scale;  // rows x rows
    const double ridge = lambda * gram.trace() / static_cast<double>(n);
    if (!(ridge > 0.0)) {
        throw NumericError("fit_qda: degenerate class (zero total variance)");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) {
        throw NumericError("fit_qda: eigendecomposition of the Gram matrix failed");
    }
    const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(0.0);

    QdaClassFactor f;
    double log_det = static_cast<double>(n - rows) * std::log(ridge);
    Eigen::VectorXd weights(rows);
    Eigen::MatrixXd basis(n, rows);
    const double tol = 1e-12 * d.maxCoeff();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double spectrum = ridge + (1.0 - lambda) * d[i];
        log_det += std::log(spectrum);
        if (d[i] <= tol) continue;  // below-rank directions behave like the ridge
        basis.col(r) = (centered.transpose() * eig.eigenvectors().col(i)) *
                       (std::sqrt(scale) / std::sqrt(d[i]));
        weights[r] = (1.0 - lambda) * d[i] / spectrum;
        ++r;
    }
    QdaClassFactor::Dual dual;
    dual.ridge = ridge;
    dual.basis = basis.leftCols(r);
    dual.weights = weights.head(r);
    f.rep = std::move(dual);
    f.log_det = log_det;
    return f;
}

}  // namespace

QdaModel fit_qda(const SpectraMatrix& train, double lambda, QdaPath path) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("fit_qda: lambda must be in [0,1]");
    QdaModel model;
    model.lambda = lambda;
    const std::vector<int> y = detail::encode_labels(train, model.enc);
    const auto X = detail::to_eigen(train);

    std::array<std::vector<Eigen::Index>, 2> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
        members[static_cast<std::size_t>(y[i])].push_back(static_cast<Eigen::Index>(i));
    }
    for (int c = 0; c < 2; ++c) {
        if (members[static_cast<std::size_t>(c)].size() < 2) {
            throw ConfigError("fit_qda: class '" + model.enc.classes[static_cast<std::size_t>(c)] +
                              "' needs at least 2 samples");
        }
    }
    for (int c = 0; c < 2; ++c) {
        const auto& idx = members[static_cast<std::size_t>(c)];
        Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), X.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            sub.row(static_cast<Eigen::Index>(r)) = X.row(idx[r]);
        }
        const Eigen::VectorXd mean = sub.colwise().mean().transpose();
        sub.rowwise() -= mean.transpose();

        const bool dual = path == QdaPath::Dual ||
                          (path == QdaPath::Auto && train.n_cols > idx.size());
        auto& factor = model.factors[static_cast<std::size_t>(c)];
        if (dual && lambda > 0.0) {
            factor = make_dual_factor(sub, lambda, idx.size());
        } else {
            factor = make_dense_factor(sub, lambda, idx.size());
        }
        model.means[static_cast<std::size_t>(c)] = mean;
        model.priors[static_cast<std::size_t>(c)] =
            static_cast<double>(idx.size()) / static_cast<double>(train.n_rows);
    }
    return model;
}

}  // namespace specsep::models
