#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specsep/attribution.hpp"
#include "specsep/audits.hpp"
#include "specsep/common.hpp"
#include "specsep/dataio.hpp"
#include "specsep/evalharness.hpp"
#include "specsep/rng.hpp"
#include "specsep/synthgen.hpp"
#include "specsep/textio.hpp"

namespace fs = std::filesystem;
using namespace specsep;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- manifest --

struct RunManifest {
    std::string command;
    json resolved_config;
    std::uint64_t master_seed = 0;
    std::vector<std::pair<std::string, std::string>> input_hashes;
    std::vector<std::pair<std::string, std::string>> outputs;
    double duration_seconds = 0.0;
};

std::string file_hash_hex(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot hash '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 15];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        for (std::streamsize i = 0; i < f.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

class RunContext {
  public:
    RunContext(std::string command, fs::path out_dir, std::uint64_t seed)
        : start_(std::chrono::steady_clock::now()), out_dir_(std::move(out_dir)) {
        manifest_.command = std::move(command);
        manifest_.master_seed = seed;
        fs::create_directories(out_dir_);
    }

    void set_config(json config) { manifest_.resolved_config = std::move(config); }

    void add_input(const fs::path& path) {
        manifest_.input_hashes.emplace_back(path.string(), file_hash_hex(path));
    }

    void write_text(const std::string& filename, const std::string& content) {
        const fs::path path = out_dir_ / filename;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DataError("cannot write '" + path.string() + "'");
        f << content;
        f.close();
        manifest_.outputs.emplace_back(filename, file_hash_hex(path));
    }

    void write_json(const std::string& filename, const json& j) {
        write_text(filename, j.dump(2) + "\n");
    }

    void finish() {
        manifest_.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json j;
        j["command"] = manifest_.command;
        j["config"] = manifest_.resolved_config;
        j["master_seed"] = manifest_.master_seed;
        j["version"] = std::string(kVersion);
        json inputs = json::object();
        for (const auto& [path, hash] : manifest_.input_hashes) inputs[path] = hash;
        j["input_hashes"] = inputs;
        json outputs = json::array();
        for (const auto& [file, hash] : manifest_.outputs) {
            outputs.push_back({{"file", file}, {"hash", hash}});
        }
        j["outputs"] = outputs;
        j["duration_seconds"] = manifest_.duration_seconds;
        const fs::path path = out_dir_ / "manifest.json";
        std::ofstream f(path, std::ios::binary);
        f << j.dump(2) << "\n";
    }

    const fs::path& out_dir() const { return out_dir_; }

  private:
    std::chrono::steady_clock::time_point start_;
    fs::path out_dir_;
    RunManifest manifest_;
};

std::string join_args(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

fs::path default_out_dir() {
    if (const char* env = std::getenv("SPECSEP_OUT_DIR")) return fs::path(env);
    return fs::path("specsep_out");
}

// ------------------------------------------------------------ flag parsing --

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// "v1,v2,..." or "start:stop:step" (stop inclusive within 1e-9).
std::vector<std::string> parse_value_list(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        const auto parts = split_list(text, ':');
        if (parts.size() != 3) {
            throw ConfigError("range override must be start:stop:step, got '" + text + "'");
        }
        const double start = textio::parse_double(parts[0]);
        const double stop = textio::parse_double(parts[1]);
        const double step = textio::parse_double(parts[2]);
        if (!(step > 0.0)) throw ConfigError("range step must be positive");
        std::vector<std::string> out;
        for (int i = 0;; ++i) {
            const double v = start + step * i;
            if (v > stop + 1e-9) break;
            out.push_back(textio::format_double(std::round(v * 1e9) / 1e9));
        }
        return out;
    }
    auto items = split_list(text);
    for (auto& item : items) {
        // Canonicalise numbers; leave categorical values (e.g. cov names) as-is.
        try {
            item = textio::format_double(textio::parse_double(item));
        } catch (const DataError&) {
        }
    }
    return items;
}

eval::ModelSpec model_spec_by_name(const std::string& name) {
    if (name == "qda") return eval::QdaSpec{};
    if (name == "logistic") return eval::LogisticSpec{};
    if (name == "knn") return eval::KnnSpec{};
    if (name == "tree") return eval::TreeSpec{};
    if (name == "forest") return eval::ForestSpec{};
    throw ConfigError("unknown model '" + name + "' (expected qda|logistic|knn|tree|forest)");
}

dataio::ClassPairTask parse_task(const std::string& text) {
    const auto parts = split_list(text, ':');
    if (parts.size() != 2) throw ConfigError("task must be POS:NEG, e.g. EVOO:LOO");
    return dataio::ClassPairTask{parts[0], parts[1]};
}

// ------------------------------------------------------------ shared steps --

SpectraMatrix load_task_data(const fs::path& data_path, const dataio::ClassPairTask& task,
                             bool apply_default_mask, RunContext& ctx) {
    ctx.add_input(data_path);
    auto data = dataio::load_spectra(data_path);
    if (apply_default_mask && !task.masks.empty() && data.has_axis()) {
        data = dataio::apply_mask(data, task.masks);
    }
    return dataio::filter_classes(data, task);
}

audits::RegionMask resolve_region(const SpectraMatrix& data, const std::string& name) {
    if (name.rfind("rho", 0) == 0) return audits::named_region(data, name);
    if (name.rfind("px:", 0) == 0) {
        const auto parts = split_list(name.substr(3), '-');
        if (parts.size() != 2) throw ConfigError("pixel region must be px:LO-HI");
        return audits::RegionMask::from_pixels(
            data, name, static_cast<std::size_t>(std::stoul(parts[0])),
            static_cast<std::size_t>(std::stoul(parts[1])));
    }
    throw ConfigError("region must be rho1..rho5 or px:LO-HI, got '" + name + "'");
}

json shuffle_result_json(const std::string& kind, const dataio::ClassPairTask& task, double raw,
                         double shuffled, double baseline) {
    json j;
    j["kind"] = kind;
    j["task"] = task.positive + ":" + task.negative;
    j["accuracy_raw"] = raw;
    j["accuracy_shuffled"] = shuffled;
    j["majority_baseline"] = baseline;
    return j;
}

std::string shuffle_result_csv(const json& j) {
    std::ostringstream os;
    os << "kind,task,accuracy_raw,accuracy_shuffled,majority_baseline\n";
    os << j["kind"].get<std::string>() << ',' << j["task"].get<std::string>() << ','
       << textio::format_double(j["accuracy_raw"].get<double>()) << ','
       << textio::format_double(j["accuracy_shuffled"].get<double>()) << ','
       << textio::format_double(j["majority_baseline"].get<double>()) << '\n';
    return os.str();
}

// Forest LOO-CV accuracy with the audit seeding convention.
double forest_loocv(const SpectraMatrix& data, std::uint64_t seed) {
    eval::EvalPlan plan{eval::LeaveOneOut{}, seed};
    const auto r = eval::evaluate(eval::ForestSpec{}, data, plan,
                                  rng::derive(seed, rng::hash_string("model")));
    return r.mean;
}

// ------------------------------------------------------------- subcommands --

struct RunOptions {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<std::string> grid_overrides;
    std::string models;
    int jobs = 1;
    int samples = -1;
    int reps = -1;
    std::string data;
    std::string task;
};

int cmd_run_synthetic(const RunOptions& opt, RunContext& ctx) {
    auto config = eval::default_config(opt.experiment);
    config.master_seed = opt.seed;
    if (opt.samples > 0) config.samples_per_class = static_cast<std::size_t>(opt.samples);
    if (opt.reps > 0) config.repetitions = opt.reps;
    for (const auto& ov : opt.grid_overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("grid override must be axis=values, got '" + ov + "'");
        }
        eval::override_axis(config, ov.substr(0, eq), parse_value_list(ov.substr(eq + 1)));
    }
    if (!opt.models.empty()) {
        if (opt.experiment == "N2") {
            throw ConfigError("N2 always uses the analytic threshold rule; --models not allowed");
        }
        config.models.clear();
        for (const auto& name : split_list(opt.models)) {
            config.models.push_back(model_spec_by_name(name));
        }
    }
    ctx.set_config(eval::config_to_json(config));

    const auto report = eval::run_experiment(config, opt.jobs);
    ctx.write_json(opt.experiment + "_report.json", eval::report_to_json(report));
    ctx.write_text(opt.experiment + "_report.csv", eval::report_to_csv(report));

    for (const auto& rec : report.records) {
        std::cout << opt.experiment;
        for (const auto& [axis, value] : rec.coords) std::cout << ' ' << axis << '=' << value;
        std::cout << " model=" << rec.model << " accuracy=" << textio::format_double(
                         rec.mean_accuracy)
                  << " sd=" << textio::format_double(rec.sd_accuracy);
        const auto it = rec.extras.find("analytic_accuracy");
        if (it != rec.extras.end()) {
            std::cout << " analytic=" << textio::format_double(it->second);
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_run_real(const RunOptions& opt, RunContext& ctx) {
    if (opt.data.empty()) {
        throw ConfigError("experiment " + opt.experiment + " needs --data <spectra.csv>");
    }
    const char variant = opt.experiment[1];  // 'a' -> EVOO:LOO, 'b' -> EVOO:VOO
    dataio::ClassPairTask task = variant == 'a' ? dataio::ClassPairTask{"EVOO", "LOO"}
                                                : dataio::ClassPairTask{"EVOO", "VOO"};
    if (!opt.task.empty()) task = parse_task(opt.task);
    const auto data = load_task_data(opt.data, task, true, ctx);
    const double baseline = audits::majority_baseline(data.labels);
    const std::string id = opt.experiment;
    json config{{"experiment", id},
                {"task", task.positive + ":" + task.negative},
                {"seed", opt.seed},
                {"data", opt.data}};
    ctx.set_config(config);

    const int index = id[2] - '0';  // Ra1..Ra5 / Rb1..Rb5
    if (index == 1 || index == 2) {
        const bool global = index == 1;
        const double raw = forest_loocv(data, rng::derive(opt.seed, 1));
        const auto shuffled = global
                                  ? audits::global_pixel_permutation(data, rng::derive(opt.seed, 2))
                                  : audits::independent_row_permutation(data,
                                                                        rng::derive(opt.seed, 2));
        const double after = forest_loocv(shuffled, rng::derive(opt.seed, 3));
        const auto j = shuffle_result_json(global ? "global-shuffle" : "row-shuffle", task, raw,
                                           after, baseline);
        ctx.write_json(id + "_result.json", j);
        ctx.write_text(id + "_result.csv", shuffle_result_csv(j));
        std::cout << id << " raw_accuracy=" << textio::format_double(raw)
                  << " shuffled_accuracy=" << textio::format_double(after)
                  << " baseline=" << textio::format_double(baseline) << '\n';
        return 0;
    }
    if (index == 3) {
        const auto region = audits::RegionMask::from_pixels(data, "first50", 0, 50);
        const auto sweep = audits::pixel_count_sweep(data, region, 2, 35, 20, eval::ForestSpec{},
                                                     eval::LeaveOneOut{}, opt.seed);
        ctx.write_json(id + "_result.json", audits::sweep_to_json(sweep));
        ctx.write_text(id + "_result.csv", audits::sweep_to_csv(sweep));
        for (const auto& p : sweep.points) {
            std::cout << id << " k=" << p.coords[0].second
                      << " accuracy=" << textio::format_double(p.mean)
                      << " sd=" << textio::format_double(p.sd) << '\n';
        }
        return 0;
    }
    if (index == 4) {
        const auto sweep = audits::window_sweep(data, {20, 50, 200, 400}, eval::ForestSpec{},
                                                eval::LeaveOneOut{}, opt.seed);
        ctx.write_json(id + "_result.json", audits::sweep_to_json(sweep));
        ctx.write_text(id + "_result.csv", audits::sweep_to_csv(sweep));
        for (const auto& p : sweep.points) {
            std::cout << id << " width=" << p.coords[0].second << " start=" << p.coords[1].second
                      << " accuracy=" << textio::format_double(p.mean) << '\n';
        }
        return 0;
    }
    if (index == 5) {
        const auto maps = attribution::windowed_shap_map(data, {20, 50, 200, 400},
                                                         eval::ForestSpec{}, eval::LeaveOneOut{},
                                                         opt.seed);
        ctx.write_json(id + "_result.json", attribution::attribution_to_json(maps));
        ctx.write_text(id + "_result.csv", attribution::attribution_to_csv(maps, data.axis));
        std::cout << id << " windows=" << maps.size() << '\n';
        return 0;
    }
    throw ConfigError("unknown experiment id '" + id + "'");
}

int cmd_concentration(const std::vector<std::size_t>& n_list, const std::vector<double>& sigmas,
                      std::size_t samples, std::size_t bins, std::uint64_t seed,
                      RunContext& ctx) {
    if (sigmas.size() != 2) throw ConfigError("--sigmas needs exactly two values");
    ctx.set_config(json{{"n_list", n_list},
                        {"sigmas", sigmas},
                        {"samples", samples},
                        {"bins", bins},
                        {"seed", seed}});
    std::ostringstream hist_csv;
    hist_csv << "n,sigma,bin_lo,bin_hi,count\n";
    std::ostringstream summary_csv;
    summary_csv << "n,sigma,mean_norm,sd_norm,overlap\n";

    using namespace synthgen;
    for (std::size_t n : n_list) {
        std::array<SpectraMatrix, 2> draws;
        for (int c = 0; c < 2; ++c) {
            GaussianClassSpec spec{
                .dim = n, .mean = 0.0, .sigma = sigmas[static_cast<std::size_t>(c)],
                .covariance = Isotropic{}};
            draws[static_cast<std::size_t>(c)] = sample_gaussian_class(
                spec, samples, rng::derive(seed, n, static_cast<std::uint64_t>(c)));
        }
        const auto norms0 = row_norms(draws[0]);
        const auto norms1 = row_norms(draws[1]);
        double lo = std::min(*std::min_element(norms0.begin(), norms0.end()),
                             *std::min_element(norms1.begin(), norms1.end()));
        double hi = std::max(*std::max_element(norms0.begin(), norms0.end()),
                             *std::max_element(norms1.begin(), norms1.end()));
        if (hi == lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        const auto h0 = norm_histogram_on_grid(draws[0], bins, lo, hi);
        const auto h1 = norm_histogram_on_grid(draws[1], bins, lo, hi);
        const double overlap = histogram_overlap(h0, h1);
        for (int c = 0; c < 2; ++c) {
            const auto& h = c == 0 ? h0 : h1;
            for (std::size_t b = 0; b < bins; ++b) {
                hist_csv << n << ',' << textio::format_double(sigmas[static_cast<std::size_t>(c)])
                         << ',' << textio::format_double(h.edges[b]) << ','
                         << textio::format_double(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
            }
            summary_csv << n << ','
                        << textio::format_double(sigmas[static_cast<std::size_t>(c)]) << ','
                        << textio::format_double(h.mean) << ',' << textio::format_double(h.sd)
                        << ',' << textio::format_double(overlap) << '\n';
        }
        std::cout << "n=" << n << " overlap=" << textio::format_double(overlap)
                  << " mean_norms=" << textio::format_double(h0.mean) << '/'
                  << textio::format_double(h1.mean) << '\n';
    }
    ctx.write_text("concentration_histograms.csv", hist_csv.str());
    ctx.write_text("concentration_summary.csv", summary_csv.str());
    return 0;
}

struct AuditOptions {
    std::string kind;
    std::string data;
    std::string task = "EVOO:LOO";
    std::string region = "px:0-50";
    std::string k_range = "2:35";
    int k_lo = 2;
    int k_hi = 35;
    int repeats = 20;
    std::vector<std::size_t> widths = {20, 50, 200, 400};
    std::uint64_t seed = 0;

    void resolve_k_range() {
        const auto parts = split_list(k_range, ':');
        if (parts.size() != 2) throw ConfigError("--k-range must be LO:HI");
        k_lo = std::stoi(parts[0]);
        k_hi = std::stoi(parts[1]);
        if (k_lo < 1 || k_hi < k_lo) throw ConfigError("--k-range must satisfy 1 <= LO <= HI");
    }
};

int cmd_audit(AuditOptions opt, RunContext& ctx) {
    if (opt.data.empty()) throw ConfigError("audit needs --data <spectra.csv>");
    opt.resolve_k_range();
    const auto task = parse_task(opt.task);
    const auto data = load_task_data(opt.data, task, true, ctx);
    const double baseline = audits::majority_baseline(data.labels);
    ctx.set_config(json{{"kind", opt.kind},
                        {"task", opt.task},
                        {"region", opt.region},
                        {"k_range", {opt.k_lo, opt.k_hi}},
                        {"repeats", opt.repeats},
                        {"widths", opt.widths},
                        {"seed", opt.seed},
                        {"data", opt.data}});

    if (opt.kind == "global-shuffle" || opt.kind == "row-shuffle") {
        const bool global = opt.kind == "global-shuffle";
        const double raw = forest_loocv(data, rng::derive(opt.seed, 1));
        const auto shuffled =
            global ? audits::global_pixel_permutation(data, rng::derive(opt.seed, 2))
                   : audits::independent_row_permutation(data, rng::derive(opt.seed, 2));
        const double after = forest_loocv(shuffled, rng::derive(opt.seed, 3));
        const auto j = shuffle_result_json(opt.kind, task, raw, after, baseline);
        ctx.write_json("audit_result.json", j);
        ctx.write_text("audit_result.csv", shuffle_result_csv(j));
        std::cout << opt.kind << " raw_accuracy=" << textio::format_double(raw)
                  << " shuffled_accuracy=" << textio::format_double(after)
                  << " baseline=" << textio::format_double(baseline) << '\n';
        return 0;
    }
    if (opt.kind == "pixel-sweep") {
        const auto region = resolve_region(data, opt.region);
        const auto sweep = audits::pixel_count_sweep(
            data, region, static_cast<std::size_t>(opt.k_lo), static_cast<std::size_t>(opt.k_hi),
            opt.repeats, eval::ForestSpec{}, eval::LeaveOneOut{}, opt.seed);
        ctx.write_json("audit_result.json", audits::sweep_to_json(sweep));
        ctx.write_text("audit_result.csv", audits::sweep_to_csv(sweep));
        for (const auto& p : sweep.points) {
            std::cout << "k=" << p.coords[0].second
                      << " accuracy=" << textio::format_double(p.mean)
                      << " sd=" << textio::format_double(p.sd) << '\n';
        }
        return 0;
    }
    if (opt.kind == "window-sweep") {
        const auto sweep = audits::window_sweep(data, opt.widths, eval::ForestSpec{},
                                                eval::LeaveOneOut{}, opt.seed);
        ctx.write_json("audit_result.json", audits::sweep_to_json(sweep));
        ctx.write_text("audit_result.csv", audits::sweep_to_csv(sweep));
        for (const auto& p : sweep.points) {
            std::cout << "width=" << p.coords[0].second << " start=" << p.coords[1].second
                      << " accuracy=" << textio::format_double(p.mean) << '\n';
        }
        return 0;
    }
    if (opt.kind == "shap") {
        const auto maps = attribution::windowed_shap_map(data, opt.widths, eval::ForestSpec{},
                                                         eval::LeaveOneOut{}, opt.seed);
        ctx.write_json("audit_result.json", attribution::attribution_to_json(maps));
        ctx.write_text("audit_result.csv", attribution::attribution_to_csv(maps, data.axis));
        std::cout << "shap windows=" << maps.size() << '\n';
        return 0;
    }
    throw ConfigError("unknown audit kind '" + opt.kind + "'");
}

int cmd_covariance(const std::string& data_path, const std::string& label,
                   const std::string& mask_spec, RunContext& ctx) {
    ctx.add_input(data_path);
    auto data = dataio::load_spectra(data_path);
    if (!mask_spec.empty()) {
        const auto parts = split_list(mask_spec, '-');
        if (parts.size() != 2) throw ConfigError("mask must be LO-HI in nm");
        data = dataio::apply_mask(
            data, {{textio::parse_double(parts[0]), textio::parse_double(parts[1])}});
    }
    ctx.set_config(json{{"data", data_path}, {"class", label}, {"mask", mask_spec}});
    const auto cov = dataio::class_covariance(data, label);
    ctx.write_text("covariance_" + label + ".csv", dataio::covariance_to_csv(cov));
    std::cout << "covariance " << label << " " << cov.rows() << "x" << cov.cols() << '\n';
    return 0;
}

int cmd_convert(const std::string& input, const std::string& labels_path,
                const std::string& out, bool transpose, RunContext& ctx) {
    ctx.add_input(input);
    ctx.add_input(labels_path);
    ctx.set_config(json{{"input", input}, {"labels", labels_path}, {"transpose", transpose}});

    // Raw matrix CSV: header of wavelengths with one spectrum per row, or
    // (with --transpose) wavelengths in the first column and one spectrum per
    // remaining column.
    std::ifstream f(input);
    if (!f) throw DataError("convert: cannot open '" + input + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.push_back(textio::parse_double(field));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError("convert: ragged row in '" + input + "'");
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw DataError("convert: need a header and at least one data row");

    SpectraMatrix m;
    if (!transpose) {
        m.axis = rows.front();
        m.n_cols = m.axis.size();
        for (std::size_t i = 1; i < rows.size(); ++i) {
            m.values.insert(m.values.end(), rows[i].begin(), rows[i].end());
            ++m.n_rows;
        }
    } else {
        const std::size_t n_wl = rows.size();
        const std::size_t n_spec = rows.front().size() - 1;
        m.n_cols = n_wl;
        m.n_rows = n_spec;
        m.axis.resize(n_wl);
        m.values.assign(n_spec * n_wl, 0.0);
        for (std::size_t w = 0; w < n_wl; ++w) {
            m.axis[w] = rows[w][0];
            for (std::size_t s = 0; s < n_spec; ++s) m.values[s * n_wl + w] = rows[w][s + 1];
        }
    }

    std::ifstream lf(labels_path);
    if (!lf) throw DataError("convert: cannot open labels file '" + labels_path + "'");
    while (std::getline(lf, line)) {
        if (!line.empty()) m.labels.push_back(line);
    }
    if (m.labels.size() != m.n_rows) {
        throw DataError("convert: " + std::to_string(m.labels.size()) + " labels for " +
                        std::to_string(m.n_rows) + " spectra");
    }
    m.validate();
    dataio::save_spectra(m, out);
    ctx.write_text("convert_note.txt", "wrote " + out + "\n");
    std::cout << "wrote " << out << " (" << m.n_rows << " spectra, " << m.n_cols
              << " wavelengths)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Separability experiments and regional sensitivity audits for spectra"};
    app.set_config("--config");
    argv = app.ensure_utf8(argv);

    std::string out_dir = default_out_dir().string();

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Run a registered experiment");
    run->add_option("experiment", run_opt.experiment,
                    "N1|N2|N3|N4|S1|S2|S3 or Ra1..Ra5|Rb1..Rb5 (with --data)")
        ->required();
    run->add_option("--seed", run_opt.seed, "Master seed");
    run->add_option("--out-dir", out_dir, "Output directory");
    run->add_option("--grid-override", run_opt.grid_overrides,
                    "axis=v1,v2 or axis=start:stop:step (repeatable)");
    run->add_option("--models", run_opt.models, "Comma list: qda,logistic,knn,tree,forest");
    run->add_option("--jobs", run_opt.jobs, "Worker threads (never changes results)");
    run->add_option("--samples", run_opt.samples, "Samples per class override");
    run->add_option("--reps", run_opt.reps, "Repetitions per grid point");
    run->add_option("--data", run_opt.data, "Labelled spectra CSV for R experiments");
    run->add_option("--task", run_opt.task, "Class pair POS:NEG for R experiments");

    std::vector<std::size_t> n_list = {2, 50, 500, 5000};
    std::vector<double> sigmas = {1.0, 1.1};
    std::size_t conc_samples = 10000;
    std::size_t conc_bins = 50;
    std::uint64_t conc_seed = 0;
    auto* conc = app.add_subcommand("concentration", "Norm histograms and class overlap vs n");
    conc->add_option("--n-list", n_list, "Dimensions");
    conc->add_option("--sigmas", sigmas, "Two standard deviations");
    conc->add_option("--samples", conc_samples, "Samples per histogram");
    conc->add_option("--bins", conc_bins, "Histogram bins");
    conc->add_option("--seed", conc_seed, "Seed");
    conc->add_option("--out", out_dir, "Output directory");

    AuditOptions audit_opt;
    auto* audit = app.add_subcommand("audit", "Regional sensitivity audit on a dataset");
    audit
        ->add_option("kind", audit_opt.kind,
                     "global-shuffle|row-shuffle|pixel-sweep|window-sweep|shap")
        ->required();
    audit->add_option("--data", audit_opt.data, "Labelled spectra CSV")->required();
    audit->add_option("--task", audit_opt.task, "Class pair POS:NEG");
    audit->add_option("--region", audit_opt.region, "rho1..rho5 or px:LO-HI");
    audit->add_option("--k-range", audit_opt.k_range, "Subset sizes LO:HI");
    audit->add_option("--repeats", audit_opt.repeats, "Random subsets per k");
    audit->add_option("--widths", audit_opt.widths, "Window widths");
    audit->add_option("--seed", audit_opt.seed, "Seed");
    audit->add_option("--out-dir", out_dir, "Output directory");

    std::string cov_data;
    std::string cov_label;
    std::string cov_mask;
    auto* covcmd = app.add_subcommand("covariance", "Export a class covariance matrix as CSV");
    covcmd->add_option("--data", cov_data, "Labelled spectra CSV")->required();
    covcmd->add_option("--class", cov_label, "Class label")->required();
    covcmd->add_option("--mask", cov_mask, "Optional LO-HI nm band to remove first");
    covcmd->add_option("--out-dir", out_dir, "Output directory");

    std::string conv_input;
    std::string conv_labels;
    std::string conv_out;
    bool conv_transpose = false;
    auto* conv = app.add_subcommand("convert", "Convert a raw matrix CSV to the canonical format");
    conv->add_option("--input", conv_input, "Raw matrix CSV")->required();
    conv->add_option("--labels", conv_labels, "One class label per spectrum")->required();
    conv->add_option("--out", conv_out, "Canonical CSV to write")->required();
    conv->add_flag("--transpose", conv_transpose, "Wavelengths are in the first column");
    conv->add_option("--out-dir", out_dir, "Manifest directory");

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion") {
            return app.exit(e);
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        RunContext ctx(join_args(argc, argv), out_dir,
                       run->parsed() ? run_opt.seed : (conc->parsed() ? conc_seed : audit_opt.seed));
        int rc = 0;
        if (run->parsed()) {
            if (run_opt.experiment.rfind("R", 0) == 0) rc = cmd_run_real(run_opt, ctx);
            else rc = cmd_run_synthetic(run_opt, ctx);
        } else if (conc->parsed()) {
            rc = cmd_concentration(n_list, sigmas, conc_samples, conc_bins, conc_seed, ctx);
        } else if (audit->parsed()) {
            rc = cmd_audit(audit_opt, ctx);
        } else if (covcmd->parsed()) {
            rc = cmd_covariance(cov_data, cov_label, cov_mask, ctx);
        } else if (conv->parsed()) {
            rc = cmd_convert(conv_input, conv_labels, conv_out, conv_transpose, ctx);
        }
        ctx.finish();
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
