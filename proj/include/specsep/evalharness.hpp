#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "specsep/matrix.hpp"
#include "specsep/models.hpp"

namespace specsep::eval {

// --- Splits -------------------------------------------------------------------

struct Holdout {
    double test_fraction = 0.2;
};
struct StratifiedKFold {
    int k = 5;
};
struct LeaveOneOut {};
using SplitScheme = std::variant<Holdout, StratifiedKFold, LeaveOneOut>;

struct EvalPlan {
    SplitScheme split = Holdout{0.2};
    std::uint64_t seed = 0;
    // The only metric is accuracy.
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Deterministic given plan.seed. Holdout and k-fold are stratified per class;
// k-fold deals shuffled class members round-robin so fold sizes differ by at
// most one per class.
std::vector<SplitIndices> make_splits(const EvalPlan& plan,
                                      const std::vector<std::string>& labels);

// --- Model specifications -------------------------------------------------------

struct QdaSpec {
    double lambda = 0.4;
};
struct LogisticSpec {
    double l2_strength = 1.0;
    int max_iter = 3000;
};
struct KnnSpec {
    int k = 5;
};
struct TreeSpec {
    std::optional<int> max_depth = 5;
    int min_leaf = 1;
};
struct ForestSpec {
    int trees = 100;
    std::optional<int> max_depth;
};
// The Bayes threshold rule is built from true generating parameters, not
// fitted; label_small/label_large say which class labels map to the
// smaller/larger sigma.
struct OracleSpec {
    double mu = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    std::string label_small = "0";
    std::string label_large = "1";
};

using ModelSpec = std::variant<QdaSpec, LogisticSpec, KnnSpec, TreeSpec, ForestSpec, OracleSpec>;

std::string model_name(const ModelSpec& spec);
// The four classifiers benchmarked together in the S and N4 experiments.
std::vector<ModelSpec> standard_model_set();

models::TrainedModel fit_model(const ModelSpec& spec, const SpectraMatrix& train,
                               std::uint64_t seed);

// --- Evaluation ------------------------------------------------------------------

struct EvalResult {
    double mean = 0.0;
    double sd = 0.0;  // population sd over folds
    std::vector<double> fold_accuracies;
    std::size_t n_train = 0;  // of the first fold
    std::size_t n_test = 0;
};

// Trains a fresh model per fold. Fold model seeds derive from plan.seed and
// the fold index unless `fixed_model_seed` pins one seed for every fold (the
// audits do this so fold scatter reflects data, not reseeding).
EvalResult evaluate(const ModelSpec& spec, const SpectraMatrix& data, const EvalPlan& plan,
                    std::optional<std::uint64_t> fixed_model_seed = std::nullopt);

// --- Experiment registry -----------------------------------------------------------

// One grid coordinate: axis name -> canonical value string ("n" -> "500",
// "cov" -> "toeplitz"). Values are kept as text so numeric and categorical
// axes serialise the same way.
using GridPoint = std::vector<std::pair<std::string, std::string>>;

// Cartesian takes the product of all axis value lists. PairedPlanes (the
// skew-normal sweeps) takes, for every pair of numeric axes, the product of
// the pair while the remaining axis sits at "0".
enum class GridKind { Cartesian, PairedPlanes };

struct ExperimentConfig {
    std::string id;  // N1, N2, N3, N4, S1, S2, S3
    GridKind grid_kind = GridKind::Cartesian;
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    std::vector<ModelSpec> models;  // N2 ignores this: it always runs the threshold rule
    SplitScheme split = Holdout{0.2};
    std::size_t samples_per_class = 1000;
    int repetitions = 1;
    std::uint64_t master_seed = 0;
};

// Built-in grids and protocols per experiment id; throws ConfigError for
// unknown ids.
ExperimentConfig default_config(const std::string& experiment_id);
// Replaces one axis value list (numbers canonicalised through format_double)
// and leaves the rest of the protocol untouched.
void override_axis(ExperimentConfig& config, const std::string& axis,
                   const std::vector<std::string>& values);
std::vector<GridPoint> grid_points(const ExperimentConfig& config);

struct PointRecord {
    GridPoint coords;
    std::string model;
    int repetition = 0;
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    std::vector<double> fold_accuracies;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::uint64_t seed = 0;  // derived evaluation seed for this record
    std::map<std::string, double> extras;  // e.g. N2 analytic accuracy
};

struct AuditReport {
    std::string experiment_id;
    std::uint64_t master_seed = 0;
    std::string version;
    std::string config_hash;
    std::vector<PointRecord> records;
};

nlohmann::json report_to_json(const AuditReport& report);
// Long format: one row per grid point x model x repetition x fold.
std::string report_to_csv(const AuditReport& report);

nlohmann::json config_to_json(const ExperimentConfig& config);

// Runs every grid point x repetition, `jobs` worker threads. Results are
// independent of the worker count: all seeds are derived from
// (master seed, experiment id, coordinates, repetition) up front.
AuditReport run_experiment(const ExperimentConfig& config, int jobs = 1);

// Derived seed for one grid point; exposed for tests.
std::uint64_t point_seed(const ExperimentConfig& config, const GridPoint& coords, int repetition);

// Builds the two labelled class datasets for a grid point of the given
// experiment ("0" and "1" labels). Exposed for tests and the CLI.
SpectraMatrix build_point_dataset(const ExperimentConfig& config, const GridPoint& coords,
                                  std::uint64_t seed);

}  // namespace specsep::eval
