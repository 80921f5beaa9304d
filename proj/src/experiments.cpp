#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "specsep/common.hpp"
#include "specsep/evalharness.hpp"
#include "specsep/rng.hpp"
#include "specsep/synthgen.hpp"
#include "specsep/textio.hpp"

namespace specsep::eval {

namespace {

using textio::format_double;

std::vector<std::string> axis_values(double lo, double hi, double step) {
    std::vector<std::string> out;
    for (int i = 0;; ++i) {
        const double v = lo + step * i;
        if (v > hi + 1e-9) break;
        out.push_back(format_double(std::round(v * 1e9) / 1e9));
    }
    return out;
}

std::vector<std::string> axis_values(std::initializer_list<double> vals) {
    std::vector<std::string> out;
    for (double v : vals) out.push_back(format_double(v));
    return out;
}

std::vector<std::string> linspace_values(double lo, double hi, int count) {
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(format_double(std::round((lo + t * (hi - lo)) * 1e9) / 1e9));
    }
    return out;
}

double coord_num(const GridPoint& coords, const std::string& axis) {
    for (const auto& [name, value] : coords) {
        if (name == axis) return textio::parse_double(value);
    }
    throw ConfigError("grid point lacks axis '" + axis + "'");
}

std::string coord_str(const GridPoint& coords, const std::string& axis) {
    for (const auto& [name, value] : coords) {
        if (name == axis) return value;
    }
    throw ConfigError("grid point lacks axis '" + axis + "'");
}

// Models actually evaluated at a grid point. N2 always runs the analytic
// threshold rule parameterised by the point's variance gap.
std::vector<ModelSpec> resolve_models(const ExperimentConfig& config, const GridPoint& coords) {
    if (config.id == "N2") {
        const double dsigma = coord_num(coords, "dsigma");
        OracleSpec spec;
        spec.mu = 1.0;
        spec.sigma1 = 1.0;
        spec.sigma2 = 1.0 + dsigma;
        spec.label_small = "0";
        spec.label_large = "1";
        return {spec};
    }
    return config.models;
}

}  // namespace

ExperimentConfig default_config(const std::string& experiment_id) {
    ExperimentConfig c;
    c.id = experiment_id;
    if (experiment_id == "N1") {
        c.axes = {{"dsigma", axis_values(0.0, 2.0, 0.1)},
                  {"n", axis_values({5, 10, 50, 500})},
                  {"cov", {"isotropic", "toeplitz"}}};
        c.models = {QdaSpec{0.4}};
        c.split = Holdout{0.2};
        c.samples_per_class = 1000;
    } else if (experiment_id == "N2") {
        c.axes = {{"dsigma", axis_values({0.0, 0.05, 0.1, 0.3, 0.6, 1.0})},
                  {"n", axis_values({30, 100, 500, 1000, 5000})}};
        c.split = Holdout{0.2};
        c.samples_per_class = 1000;
    } else if (experiment_id == "N3") {
        c.axes = {{"dsigma", axis_values({0.1, 0.3, 0.6, 0.9, 1.2, 1.5, 2.0})},
                  {"n", axis_values({1, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000})}};
        c.models = {QdaSpec{0.4}};
        c.split = Holdout{0.2};
        c.samples_per_class = 1000;
    } else if (experiment_id == "N4") {
        c.grid_kind = GridKind::PairedPlanes;
        c.axes = {{"dmu_rel", linspace_values(0.0, 0.15, 7)},
                  {"dsigma_rel", linspace_values(0.0, 2.0, 7)},
                  {"dgamma_rel", linspace_values(0.0, 8.0, 7)}};
        c.models = standard_model_set();
        c.split = StratifiedKFold{5};
        c.samples_per_class = 100;
    } else if (experiment_id == "S1" || experiment_id == "S2" || experiment_id == "S3") {
        c.axes = {{"n", axis_values({5, 10, 50, 100, 1000, 2000, 5000, 10000})}};
        c.models = standard_model_set();
        c.split = StratifiedKFold{5};
        c.samples_per_class = 500;
    } else {
        throw ConfigError("unknown experiment id '" + experiment_id + "'");
    }
    return c;
}

void override_axis(ExperimentConfig& config, const std::string& axis,
                   const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("override_axis: empty value list for '" + axis + "'");
    for (auto& [name, vals] : config.axes) {
        if (name == axis) {
            vals = values;
            return;
        }
    }
    throw ConfigError("experiment " + config.id + " has no axis '" + axis + "'");
}

std::vector<GridPoint> grid_points(const ExperimentConfig& config) {
    if (config.axes.empty()) throw ConfigError("grid_points: no axes configured");
    std::vector<GridPoint> points;
    if (config.grid_kind == GridKind::Cartesian) {
        points.push_back({});
        for (const auto& [name, values] : config.axes) {
            std::vector<GridPoint> next;
            next.reserve(points.size() * values.size());
            for (const auto& p : points) {
                for (const auto& v : values) {
                    GridPoint q = p;
                    q.emplace_back(name, v);
                    next.push_back(std::move(q));
                }
            }
            points = std::move(next);
        }
        return points;
    }
    // PairedPlanes: every pair of axes sweeps while the remaining axes sit
    // at "0"; duplicate corner points are collapsed.
    std::set<GridPoint> uniq;
    const auto& axes = config.axes;
    for (std::size_t a = 0; a < axes.size(); ++a) {
        for (std::size_t b = a + 1; b < axes.size(); ++b) {
            for (const auto& va : axes[a].second) {
                for (const auto& vb : axes[b].second) {
                    GridPoint p;
                    for (std::size_t i = 0; i < axes.size(); ++i) {
                        if (i == a) p.emplace_back(axes[i].first, va);
                        else if (i == b) p.emplace_back(axes[i].first, vb);
                        else p.emplace_back(axes[i].first, "0");
                    }
                    uniq.insert(std::move(p));
                }
            }
        }
    }
    return {uniq.begin(), uniq.end()};
}

std::uint64_t point_seed(const ExperimentConfig& config, const GridPoint& coords,
                         int repetition) {
    GridPoint sorted = coords;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = rng::derive(config.master_seed, rng::hash_string(config.id));
    for (const auto& [name, value] : sorted) {
        h = rng::derive(h, rng::hash_string(name), rng::hash_string(value));
    }
    return rng::derive(h, static_cast<std::uint64_t>(repetition));
}

SpectraMatrix build_point_dataset(const ExperimentConfig& config, const GridPoint& coords,
                                  std::uint64_t seed) {
    using namespace synthgen;
    const std::uint64_t seed0 = rng::derive(seed, 0);
    const std::uint64_t seed1 = rng::derive(seed, 1);
    SpectraMatrix a;
    SpectraMatrix b;

    if (config.id == "N1" || config.id == "N2" || config.id == "N3") {
        const auto n = static_cast<std::size_t>(coord_num(coords, "n"));
        const double dsigma = coord_num(coords, "dsigma");
        const double mu = config.id == "N3" ? 0.0 : 1.0;
        CovarianceKind cov = Isotropic{};
        if (config.id == "N1" && coord_str(coords, "cov") == "toeplitz") {
            cov = ToeplitzGeometric{0.95};
        }
        GaussianClassSpec s0{.dim = n, .mean = mu, .sigma = 1.0, .covariance = cov};
        GaussianClassSpec s1 = s0;
        s1.sigma = 1.0 + dsigma;
        a = sample_gaussian_class(s0, config.samples_per_class, seed0);
        b = sample_gaussian_class(s1, config.samples_per_class, seed1);
    } else if (config.id == "N4") {
        const double dmu = coord_num(coords, "dmu_rel");
        const double dsg = coord_num(coords, "dsigma_rel");
        const double dgm = coord_num(coords, "dgamma_rel");
        SkewNormalClassSpec s0{.dim = 50, .location = 10.0, .scale = 1.0, .shape = 0.5};
        SkewNormalClassSpec s1{.dim = 50,
                               .location = 10.0 * (1.0 + dmu),
                               .scale = 1.0 * (1.0 + dsg),
                               .shape = 0.5 * (1.0 + dgm)};
        a = sample_skew_normal_class(s0, config.samples_per_class, seed0);
        b = sample_skew_normal_class(s1, config.samples_per_class, seed1);
    } else if (config.id == "S1" || config.id == "S2" || config.id == "S3") {
        const auto n = static_cast<std::size_t>(coord_num(coords, "n"));
        LorentzianSpectrumSpec s0{.dim = n,
                                  .centre_mean = 50.0,
                                  .centre_sd = 10.0,
                                  .fwhm = 7.0,
                                  .count = config.samples_per_class,
                                  .noise = std::nullopt};
        LorentzianSpectrumSpec s1 = s0;
        if (config.id == "S2") s1.fwhm = 9.0;
        if (config.id == "S3") {
            s0.noise = LorentzianNoise{0.0, 0.01};
            s1.noise = LorentzianNoise{0.01, 0.01};
        }
        a = generate_lorentzian_class(s0, seed0);
        b = generate_lorentzian_class(s1, seed1);
    } else {
        throw ConfigError("build_point_dataset: unknown experiment id '" + config.id + "'");
    }
    a.labels.assign(a.n_rows, "0");
    b.labels.assign(b.n_rows, "1");
    return vstack(a, b);
}

namespace {

std::vector<PointRecord> run_task(const ExperimentConfig& config, const GridPoint& coords,
                                  int repetition) {
    const std::uint64_t pseed = point_seed(config, coords, repetition);
    const SpectraMatrix dataset = build_point_dataset(config, coords, pseed);
    std::vector<PointRecord> records;
    for (const auto& spec : resolve_models(config, coords)) {
        const std::string name = model_name(spec);
        // Seeded per model name: adding or removing models never shifts the
        // results of the others.
        const std::uint64_t eval_seed = rng::derive(pseed, rng::hash_string(name), 2);
        EvalPlan plan{config.split, eval_seed};
        const EvalResult r = evaluate(spec, dataset, plan);
        PointRecord rec;
        rec.coords = coords;
        rec.model = name;
        rec.repetition = repetition;
        rec.mean_accuracy = r.mean;
        rec.sd_accuracy = r.sd;
        rec.fold_accuracies = r.fold_accuracies;
        rec.n_train = r.n_train;
        rec.n_test = r.n_test;
        rec.seed = eval_seed;
        if (config.id == "N2") {
            const double dsigma = coord_num(coords, "dsigma");
            rec.extras["analytic_accuracy"] = models::oracle_accuracy_analytic(
                static_cast<std::size_t>(coord_num(coords, "n")), 1.0, 1.0 + dsigma);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::uint64_t fnv_of(const std::string& text) { return rng::hash_string(text); }

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["id"] = config.id;
    j["grid_kind"] = config.grid_kind == GridKind::Cartesian ? "cartesian" : "paired_planes";
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& [name, values] : config.axes) {
        axes.push_back({{"axis", name}, {"values", values}});
    }
    j["axes"] = axes;
    nlohmann::json mods = nlohmann::json::array();
    for (const auto& m : config.models) {
        nlohmann::json mj;
        mj["name"] = model_name(m);
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, QdaSpec>) {
                    mj["lambda"] = s.lambda;
                } else if constexpr (std::is_same_v<T, LogisticSpec>) {
                    mj["l2_strength"] = s.l2_strength;
                    mj["max_iter"] = s.max_iter;
                } else if constexpr (std::is_same_v<T, KnnSpec>) {
                    mj["k"] = s.k;
                } else if constexpr (std::is_same_v<T, TreeSpec>) {
                    mj["max_depth"] = s.max_depth ? nlohmann::json(*s.max_depth)
                                                  : nlohmann::json(nullptr);
                    mj["min_leaf"] = s.min_leaf;
                } else if constexpr (std::is_same_v<T, ForestSpec>) {
                    mj["trees"] = s.trees;
                    mj["max_depth"] = s.max_depth ? nlohmann::json(*s.max_depth)
                                                  : nlohmann::json(nullptr);
                } else {
                    mj["mu"] = s.mu;
                    mj["sigma1"] = s.sigma1;
                    mj["sigma2"] = s.sigma2;
                }
            },
            m);
        mods.push_back(mj);
    }
    j["models"] = mods;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Holdout>) {
                j["split"] = {{"kind", "holdout"}, {"test_fraction", s.test_fraction}};
            } else if constexpr (std::is_same_v<T, StratifiedKFold>) {
                j["split"] = {{"kind", "stratified_kfold"}, {"k", s.k}};
            } else {
                j["split"] = {{"kind", "leave_one_out"}};
            }
        },
        config.split);
    j["samples_per_class"] = config.samples_per_class;
    j["repetitions"] = config.repetitions;
    j["master_seed"] = config.master_seed;
    return j;
}

AuditReport run_experiment(const ExperimentConfig& config, int jobs) {
    if (config.repetitions < 1) throw ConfigError("run_experiment: repetitions must be >= 1");
    const auto points = grid_points(config);

    struct Task {
        const GridPoint* coords;
        int repetition;
    };
    std::vector<Task> tasks;
    tasks.reserve(points.size() * static_cast<std::size_t>(config.repetitions));
    for (const auto& p : points) {
        for (int rep = 0; rep < config.repetitions; ++rep) tasks.push_back({&p, rep});
    }

    std::vector<std::vector<PointRecord>> slots(tasks.size());
    if (jobs <= 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            slots[t] = run_task(config, *tasks[t].coords, tasks[t].repetition);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t t = next.fetch_add(1);
                if (t >= tasks.size()) return;
                try {
                    slots[t] = run_task(config, *tasks[t].coords, tasks[t].repetition);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    AuditReport report;
    report.experiment_id = config.id;
    report.master_seed = config.master_seed;
    report.version = std::string(kVersion);
    report.config_hash = hex64(fnv_of(config_to_json(config).dump()));
    for (auto& slot : slots) {
        for (auto& rec : slot) report.records.push_back(std::move(rec));
    }
    return report;
}

nlohmann::json report_to_json(const AuditReport& report) {
    nlohmann::json j;
    j["experiment"] = report.experiment_id;
    j["master_seed"] = report.master_seed;
    j["version"] = report.version;
    j["config_hash"] = report.config_hash;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : report.records) {
        nlohmann::json rj;
        nlohmann::json coords;
        for (const auto& [name, value] : r.coords) coords[name] = value;
        rj["coords"] = coords;
        rj["model"] = r.model;
        rj["repetition"] = r.repetition;
        rj["mean_accuracy"] = r.mean_accuracy;
        rj["sd_accuracy"] = r.sd_accuracy;
        rj["fold_accuracies"] = r.fold_accuracies;
        rj["n_train"] = r.n_train;
        rj["n_test"] = r.n_test;
        rj["seed"] = r.seed;
        if (!r.extras.empty()) rj["extras"] = r.extras;
        recs.push_back(rj);
    }
    j["records"] = recs;
    return j;
}

std::string report_to_csv(const AuditReport& report) {
    // Column layout: experiment, sorted axis names, model, repetition, fold,
    // fold_accuracy, aggregates, then any extras columns (sorted).
    std::set<std::string> axis_names;
    std::set<std::string> extra_names;
    for (const auto& r : report.records) {
        for (const auto& [name, value] : r.coords) {
            (void)value;
            axis_names.insert(name);
        }
        for (const auto& [name, value] : r.extras) {
            (void)value;
            extra_names.insert(name);
        }
    }
    std::ostringstream os;
    os << "experiment";
    for (const auto& a : axis_names) os << ',' << a;
    os << ",model,repetition,fold,fold_accuracy,mean_accuracy,sd_accuracy,n_train,n_test,seed";
    for (const auto& e : extra_names) os << ',' << e;
    os << '\n';
    for (const auto& r : report.records) {
        for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f) {
            os << report.experiment_id;
            for (const auto& a : axis_names) {
                os << ',';
                for (const auto& [name, value] : r.coords) {
                    if (name == a) os << value;
                }
            }
            os << ',' << r.model << ',' << r.repetition << ',' << f << ','
               << format_double(r.fold_accuracies[f]) << ',' << format_double(r.mean_accuracy)
               << ',' << format_double(r.sd_accuracy) << ',' << r.n_train << ',' << r.n_test
               << ',' << r.seed;
            for (const auto& e : extra_names) {
                os << ',';
                const auto it = r.extras.find(e);
                if (it != r.extras.end()) os << format_double(it->second);
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace specsep::eval
