#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "specsep/matrix.hpp"

namespace specsep::models {

// All classifiers are binary. Class 0 is the lexicographically smallest
// label; ties anywhere in prediction break toward class 0.
struct LabelEncoding {
    std::array<std::string, 2> classes;

    static LabelEncoding from_labels(const std::vector<std::string>& labels);
    int index_of(const std::string& label) const;
    bool operator==(const LabelEncoding&) const = default;
};

// --- QDA -------------------------------------------------------------------

// Factor of the regularised class covariance
//   Sigma_reg = (1 - lambda) * Sigma_hat + lambda * (tr(Sigma_hat)/n) * I.
// Dense keeps the Cholesky factor; Dual keeps the sample-space
// eigendecomposition used when the dimension exceeds the class sample count
// (Sigma_hat is rank-deficient there and the Gram form is much cheaper).
// Both evaluate the same quadratic form and log-determinant.
struct QdaClassFactor {
    struct Dense {
        Eigen::MatrixXd chol_lower;  // n x n lower triangular
    };
    struct Dual {
        double ridge = 0.0;        // lambda * tr(Sigma_hat) / n
        Eigen::MatrixXd basis;     // n x r, orthonormal columns
        Eigen::VectorXd weights;   // r, in [0, 1)
    };
    std::variant<Dense, Dual> rep;
    double log_det = 0.0;

    // Quadratic forms (x_i - mu)^T Sigma_reg^-1 (x_i - mu) for rows of
    // `centered` (already mean-subtracted).
    Eigen::VectorXd quadratic_form(const Eigen::MatrixXd& centered) const;
};

struct QdaModel {
    LabelEncoding enc;
    double lambda = 0.4;
    std::array<Eigen::VectorXd, 2> means;
    std::array<QdaClassFactor, 2> factors;
    std::array<double, 2> priors{};
};

enum class QdaPath { Auto, Dense, Dual };

QdaModel fit_qda(const SpectraMatrix& train, double lambda, QdaPath path = QdaPath::Auto);

// --- Analytic Bayes threshold ----------------------------------------------

// Optimal rule for two equal-mean isotropic Gaussians differing only in
// sigma: predict the larger-sigma class iff sum_j (x_j - mu)^2 > threshold.
struct OracleThresholdModel {
    std::size_t dim = 0;
    double mu = 0.0;
    double sigma1 = 0.0;  // canonicalised: sigma1 < sigma2
    double sigma2 = 0.0;
    double threshold = 0.0;
    std::string label_small = "0";  // predicted when S <= threshold
    std::string label_large = "1";
};

OracleThresholdModel oracle_threshold(std::size_t n, double mu, double sigma1, double sigma2);

// Closed-form accuracy of the threshold rule on balanced classes:
// 0.5 * (F_chi2_n(T / sigma1^2) + 1 - F_chi2_n(T / sigma2^2)).
double oracle_accuracy_analytic(std::size_t n, double sigma1, double sigma2);

// --- Logistic regression -----------------------------------------------------

struct LogisticModel {
    LabelEncoding enc;
    Eigen::VectorXd weights;
    double bias = 0.0;
    double l2_strength = 1.0;
    int max_iter = 3000;
    bool converged = false;
    int iterations = 0;
};

// Minimises sum_i log(1 + exp(-y_i f_i)) + 0.5 * l2 * |w|^2 (bias
// unpenalised) with L-BFGS; stops at max_iter with converged = false rather
// than erroring. The positive class (probability output) is class 1.
LogisticModel fit_logistic(const SpectraMatrix& train, double l2_strength = 1.0,
                           int max_iter = 3000);
double logistic_loss(const LogisticModel& m, const SpectraMatrix& data);
// Gradient of the training objective at (weights, bias); exposed for the
// finite-difference check.
Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& weights_and_bias,
                                  const SpectraMatrix& data, double l2_strength);
double logistic_objective(const Eigen::VectorXd& weights_and_bias, const SpectraMatrix& data,
                          double l2_strength);

// --- k nearest neighbours ----------------------------------------------------

struct KnnModel {
    LabelEncoding enc;
    Eigen::MatrixXd train;    // rows are stored training samples
    std::vector<int> train_y;
    int k = 5;
};

KnnModel fit_knn(const SpectraMatrix& train, int k = 5);

// --- CART tree and random forest ---------------------------------------------

struct TreeNode {
    int feature = -1;            // -1 for leaves
    double threshold = 0.0;      // go left iff x[feature] <= threshold
    int left = -1;
    int right = -1;
    double cover = 0.0;          // training samples (bootstrap-weighted) through the node
    std::array<double, 2> class_counts{};
};

struct TreeModel {
    LabelEncoding enc;
    std::size_t n_features = 0;
    std::vector<TreeNode> nodes;  // node 0 is the root
    std::optional<int> max_depth;
    int min_leaf = 1;
};

struct ForestModel {
    LabelEncoding enc;
    std::size_t n_features = 0;
    std::vector<TreeModel> trees;
    std::optional<int> max_depth;
    std::uint64_t seed = 0;
};

// Greedy CART on Gini impurity over all features; candidate thresholds are
// midpoints between consecutive distinct values, ties broken toward the
// lowest feature index then lowest threshold. `seed` is accepted for
// interface symmetry; the single tree is deterministic and ignores it.
TreeModel fit_tree(const SpectraMatrix& train, std::optional<int> max_depth = std::nullopt,
                   int min_leaf = 1, std::uint64_t seed = 0);

// Bootstrap-resampled CART trees with ceil(sqrt(n)) features considered per
// split. Per-tree sub-seeds are derived up front, so a parallel build equals
// the sequential one.
ForestModel fit_forest(const SpectraMatrix& train, int tree_count = 100,
                       std::optional<int> max_depth = std::nullopt, std::uint64_t seed = 0);

// Fraction of trees voting for class 1, one value per row.
Eigen::VectorXd forest_vote_fraction(const ForestModel& m, const SpectraMatrix& data);

// --- Unified prediction and serialisation ------------------------------------

using TrainedModel = std::variant<QdaModel, OracleThresholdModel, LogisticModel, KnnModel,
                                  TreeModel, ForestModel>;

std::vector<std::string> predict(const TrainedModel& model, const SpectraMatrix& data);
double accuracy(const std::vector<std::string>& predicted,
                const std::vector<std::string>& truth);

nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace specsep::models
