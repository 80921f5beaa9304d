#include "specsep/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specsep/common.hpp"
#include "specsep/rng.hpp"

namespace specsep::synthgen {

void GaussianClassSpec::validate() const {
    if (dim < 1) throw ConfigError("GaussianClassSpec: dim must be >= 1");
    if (!(sigma > 0.0)) throw ConfigError("GaussianClassSpec: sigma must be positive");
    if (const auto* t = std::get_if<ToeplitzGeometric>(&covariance)) {
        if (!(std::abs(t->rho) < 1.0)) {
            throw ConfigError("GaussianClassSpec: |rho| must be < 1");
        }
    }
}

void SkewNormalClassSpec::validate() const {
    if (dim < 1) throw ConfigError("SkewNormalClassSpec: dim must be >= 1");
    if (!(scale > 0.0)) throw ConfigError("SkewNormalClassSpec: scale must be positive");
}

void LorentzianSpectrumSpec::validate() const {
    if (dim < 1) throw ConfigError("LorentzianSpectrumSpec: dim must be >= 1");
    if (count < 1) throw ConfigError("LorentzianSpectrumSpec: count must be >= 1");
    if (!(centre_sd > 0.0)) throw ConfigError("LorentzianSpectrumSpec: centre_sd must be positive");
    if (!(fwhm > 0.0)) throw ConfigError("LorentzianSpectrumSpec: fwhm must be positive");
    if (noise && !(noise->sd > 0.0)) {
        throw ConfigError("LorentzianSpectrumSpec: noise sd must be positive");
    }
}

double lorentzian(double x, double centre, double fwhm) {
    const double h = 0.5 * fwhm;
    const double d = x - centre;
    return h * h / (d * d + h * h);
}

SpectraMatrix sample_gaussian_class(const GaussianClassSpec& spec, std::size_t count,
                                    std::uint64_t seed) {
    spec.validate();
    if (count < 1) throw ConfigError("sample_gaussian_class: count must be positive");

    double rho = 0.0;
    if (const auto* t = std::get_if<ToeplitzGeometric>(&spec.covariance)) rho = t->rho;
    const double innovation = spec.sigma * std::sqrt(1.0 - rho * rho);

    SpectraMatrix out = SpectraMatrix::zeros(count, spec.dim);
    for (std::size_t i = 0; i < count; ++i) {
        rng::Stream stream(rng::derive(seed, i));
        auto r = out.row(i);
        // AR(1) recursion: exact for Cov(x_i, x_j) = sigma^2 rho^|i-j|.
        double prev = spec.mean + spec.sigma * stream.next_normal();
        r[0] = prev;
        for (std::size_t j = 1; j < spec.dim; ++j) {
            prev = spec.mean + rho * (prev - spec.mean) + innovation * stream.next_normal();
            r[j] = prev;
        }
    }
    return out;
}

SpectraMatrix sample_skew_normal_class(const SkewNormalClassSpec& spec, std::size_t count,
                                       std::uint64_t seed) {
    spec.validate();
    if (count < 1) throw ConfigError("sample_skew_normal_class: count must be positive");

    // Stochastic representation: x = mu + sigma * (delta |z0| + sqrt(1-delta^2) z1).
    const double delta = spec.shape / std::sqrt(1.0 + spec.shape * spec.shape);
    const double ortho = std::sqrt(1.0 - delta * delta);

    SpectraMatrix out = SpectraMatrix::zeros(count, spec.dim);
    for (std::size_t i = 0; i < count; ++i) {
        rng::Stream stream(rng::derive(seed, i));
        auto r = out.row(i);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            const double z0 = stream.next_normal();
            const double z1 = stream.next_normal();
            r[j] = spec.location + spec.scale * (delta * std::abs(z0) + ortho * z1);
        }
    }
    return out;
}

SpectraMatrix generate_lorentzian_class(const LorentzianSpectrumSpec& spec, std::uint64_t seed) {
    spec.validate();
    SpectraMatrix out = SpectraMatrix::zeros(spec.count, spec.dim);
    for (std::size_t i = 0; i < spec.count; ++i) {
        rng::Stream stream(rng::derive(seed, i));
        const double centre = spec.centre_mean + spec.centre_sd * stream.next_normal();
        auto r = out.row(i);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            r[j] = lorentzian(static_cast<double>(j + 1), centre, spec.fwhm);
        }
        if (spec.noise) {
            // Added after profile evaluation; intentionally not clipped.
            for (std::size_t j = 0; j < spec.dim; ++j) {
                r[j] += spec.noise->mean + spec.noise->sd * stream.next_normal();
            }
        }
    }
    return out;
}

std::vector<double> row_norms(const SpectraMatrix& data) {
    if (data.n_rows == 0) throw ConfigError("row_norms: empty matrix");
    std::vector<double> norms(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        double s = 0.0;
        for (double x : data.row(i)) s += x * x;
        norms[i] = std::sqrt(s);
    }
    return norms;
}

namespace {

double stats_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stats_sd(const std::vector<double>& v) {
    const double m = stats_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

NormHistogram histogram_of(const std::vector<double>& norms, std::size_t bins, double lo,
                           double hi) {
    if (bins == 0) throw ConfigError("norm_histogram: bins must be positive");
    if (!(hi > lo)) throw ConfigError("norm_histogram: empty bin range");
    NormHistogram h;
    h.edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
    h.counts.assign(bins, 0);
    for (double v : norms) {
        if (v < lo || v > hi) continue;
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= bins) b = bins - 1;  // right edge closed
        ++h.counts[b];
    }
    h.mean = stats_mean(norms);
    h.sd = stats_sd(norms);
    return h;
}

}  // namespace

NormHistogram norm_histogram(const SpectraMatrix& data, std::size_t bins) {
    const auto norms = row_norms(data);
    const auto [mn, mx] = std::minmax_element(norms.begin(), norms.end());
    double lo = *mn;
    double hi = *mx;
    if (hi == lo) {  // degenerate spread: widen symmetrically
        lo -= 0.5;
        hi += 0.5;
    }
    return histogram_of(norms, bins, lo, hi);
}

NormHistogram norm_histogram_on_grid(const SpectraMatrix& data, std::size_t bins, double lo,
                                     double hi) {
    return histogram_of(row_norms(data), bins, lo, hi);
}

double histogram_overlap(const NormHistogram& a, const NormHistogram& b) {
    if (a.edges.size() != b.edges.size() || a.edges != b.edges) {
        throw ConfigError("histogram_overlap: histograms must share the bin grid");
    }
    double na = 0.0;
    double nb = 0.0;
    for (auto c : a.counts) na += static_cast<double>(c);
    for (auto c : b.counts) nb += static_cast<double>(c);
    if (na == 0.0 || nb == 0.0) throw ConfigError("histogram_overlap: empty histogram");
    double overlap = 0.0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        overlap += std::min(static_cast<double>(a.counts[i]) / na,
                            static_cast<double>(b.counts[i]) / nb);
    }
    return overlap;
}

}  // namespace specsep::synthgen
