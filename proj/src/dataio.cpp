#include "specsep/dataio.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "specsep/common.hpp"
#include "specsep/textio.hpp"

namespace specsep::dataio {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

SpectraMatrix load_spectra(const std::filesystem::path& path,
                           const std::vector<std::string>* allowed_labels) {
    std::ifstream file(path);
    if (!file) throw DataError("load_spectra: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(file, line)) throw DataError("load_spectra: empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || trimmed(header[0]) != "label") {
        throw DataError("load_spectra: header must start with 'label' followed by wavelengths");
    }

    SpectraMatrix out;
    out.n_cols = header.size() - 1;
    out.axis.reserve(out.n_cols);
    for (std::size_t j = 1; j < header.size(); ++j) {
        double wl;
        try {
            wl = textio::parse_double(trimmed(header[j]));
        } catch (const DataError&) {
            throw DataError("load_spectra: header column " + std::to_string(j) +
                            " is not a number: '" + header[j] + "'");
        }
        if (!out.axis.empty() && !(wl > out.axis.back())) {
            throw DataError("load_spectra: wavelengths must be strictly increasing at column " +
                            std::to_string(j));
        }
        out.axis.push_back(wl);
    }

    std::size_t row = 0;
    while (std::getline(file, line)) {
        ++row;
        if (trimmed(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("load_spectra: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        const std::string label = trimmed(fields[0]);
        if (label.empty()) {
            throw DataError("load_spectra: row " + std::to_string(row) + " has an empty label");
        }
        if (allowed_labels &&
            std::find(allowed_labels->begin(), allowed_labels->end(), label) ==
                allowed_labels->end()) {
            throw DataError("load_spectra: row " + std::to_string(row) + " has unknown label '" +
                            label + "'");
        }
        out.labels.push_back(label);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            try {
                out.values.push_back(textio::parse_double(trimmed(fields[j])));
            } catch (const DataError&) {
                throw DataError("load_spectra: row " + std::to_string(row) + ", column " +
                                std::to_string(j) + ": bad number '" + fields[j] + "'");
            }
        }
        ++out.n_rows;
    }
    if (out.n_rows == 0) throw DataError("load_spectra: no data rows in '" + path.string() + "'");
    out.validate();
    return out;
}

void save_spectra(const SpectraMatrix& data, const std::filesystem::path& path) {
    data.validate();
    if (!data.has_axis() || !data.has_labels()) {
        throw ConfigError("save_spectra: axis and labels are required by the file format");
    }
    std::ofstream file(path);
    if (!file) throw DataError("save_spectra: cannot open '" + path.string() + "' for writing");
    file << "label";
    for (double wl : data.axis) file << ',' << textio::format_double(wl);
    file << '\n';
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        file << data.labels[i];
        for (double v : data.row(i)) file << ',' << textio::format_double(v);
        file << '\n';
    }
    if (!file) throw DataError("save_spectra: write failed for '" + path.string() + "'");
}

SpectraMatrix apply_mask(const SpectraMatrix& data,
                         const std::vector<std::pair<double, double>>& intervals) {
    if (!data.has_axis()) throw ConfigError("apply_mask: dataset has no wavelength axis");
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < data.n_cols; ++j) {
        const double wl = data.axis[j];
        bool masked = false;
        for (const auto& [lo, hi] : intervals) masked = masked || (wl >= lo && wl < hi);
        if (!masked) keep.push_back(j);
    }
    if (keep.empty()) throw ConfigError("apply_mask: mask removes every column");
    return select_columns(data, keep);
}

SpectraMatrix select_region(const SpectraMatrix& data, const audits::RegionMask& region) {
    // Re-resolve axis-based regions so masks applied in between stay
    // consistent; pixel regions are taken as-is.
    if (region.by_axis) {
        const auto resolved = audits::RegionMask::from_axis(data, region.name, region.lo,
                                                            region.hi);
        return select_columns(data, resolved.indices);
    }
    return select_columns(data, region.indices);
}

SpectraMatrix filter_classes(const SpectraMatrix& data, const ClassPairTask& task) {
    if (!data.has_labels()) throw ConfigError("filter_classes: dataset has no labels");
    if (task.positive == task.negative) {
        throw ConfigError("filter_classes: task classes must be distinct");
    }
    std::vector<std::size_t> keep;
    bool saw_pos = false;
    bool saw_neg = false;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        if (data.labels[i] == task.positive) {
            keep.push_back(i);
            saw_pos = true;
        } else if (data.labels[i] == task.negative) {
            keep.push_back(i);
            saw_neg = true;
        }
    }
    if (!saw_pos || !saw_neg) {
        throw DataError("filter_classes: classes '" + task.positive + "' and '" + task.negative +
                        "' must both be present");
    }
    return select_rows(data, keep);
}

Eigen::MatrixXd class_covariance(const SpectraMatrix& data, const std::string& label) {
    if (!data.has_labels()) throw ConfigError("class_covariance: dataset has no labels");
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        if (data.labels[i] == label) members.push_back(i);
    }
    if (members.size() < 2) {
        throw ConfigError("class_covariance: class '" + label + "' needs at least 2 samples");
    }
    const auto n = static_cast<Eigen::Index>(data.n_cols);
    Eigen::MatrixXd centered(static_cast<Eigen::Index>(members.size()), n);
    for (std::size_t r = 0; r < members.size(); ++r) {
        for (std::size_t j = 0; j < data.n_cols; ++j) {
            centered(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                data.at(members[r], j);
        }
    }
    centered.rowwise() -= centered.colwise().mean();
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(members.size() - 1);
    // Exact symmetry for serialisation and downstream solvers.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) cov(j, i) = cov(i, j);
    }
    return cov;
}

std::string covariance_to_csv(const Eigen::MatrixXd& cov) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < cov.cols(); ++j) {
            if (j) os << ',';
            os << textio::format_double(cov(i, j));
        }
        os << '\n';
    }
    return os.str();
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw DataError("load_manifest: cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_manifest: bad JSON: " + std::string(e.what()));
    }
    DatasetManifest m;
    if (!j.contains("classes") || !j["classes"].is_object()) {
        throw DataError("load_manifest: expected a top-level 'classes' object");
    }
    for (const auto& [name, count] : j["classes"].items()) {
        m.expected_counts.emplace_back(name, count.get<std::size_t>());
    }
    std::sort(m.expected_counts.begin(), m.expected_counts.end());
    return m;
}

ManifestCheck check_manifest(const SpectraMatrix& data, const DatasetManifest& manifest) {
    ManifestCheck check;
    for (const auto& [name, expected] : manifest.expected_counts) {
        std::size_t actual = 0;
        for (const auto& l : data.labels) {
            if (l == name) ++actual;
        }
        check.rows.emplace_back(name, expected, actual);
        check.all_match = check.all_match && expected == actual;
    }
    // Classes present in the data but missing from the manifest also count as
    // a mismatch.
    std::set<std::string> declared;
    for (const auto& [name, expected] : manifest.expected_counts) {
        (void)expected;
        declared.insert(name);
    }
    for (const auto& l : data.labels) {
        if (!declared.count(l)) {
            check.all_match = false;
            bool listed = false;
            for (const auto& [name, e, a] : check.rows) {
                (void)e;
                (void)a;
                listed = listed || name == l;
            }
            if (!listed) {
                std::size_t actual = 0;
                for (const auto& l2 : data.labels) {
                    if (l2 == l) ++actual;
                }
                check.rows.emplace_back(l, 0, actual);
            }
        }
    }
    return check;
}

}  // namespace specsep::dataio
