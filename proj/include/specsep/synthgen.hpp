#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "specsep/matrix.hpp"

namespace specsep::synthgen {

struct Isotropic {};
struct ToeplitzGeometric {
    double rho = 0.0;  // |rho| < 1; Cov(x_i, x_j) = sigma^2 * rho^|i-j|
};
using CovarianceKind = std::variant<Isotropic, ToeplitzGeometric>;

// Multivariate Gaussian with constant mean across coordinates. Isotropic is
// the rho = 0 special case of the Toeplitz-geometric family and the sampler
// treats it as such, so the two produce bit-identical draws.
struct GaussianClassSpec {
    std::size_t dim = 1;
    double mean = 0.0;
    double sigma = 1.0;
    CovarianceKind covariance = Isotropic{};

    void validate() const;
};

// Coordinates i.i.d. univariate skew-normal with density
// 2 phi((x-mu)/sigma) Phi(shape * (x-mu)/sigma) / sigma.
struct SkewNormalClassSpec {
    std::size_t dim = 1;
    double location = 0.0;
    double scale = 1.0;
    double shape = 0.0;

    void validate() const;
};

// Unit-height Lorentzian line on the pixel axis x_i = i (1-based), with the
// peak centre drawn per spectrum from Normal(centre_mean, centre_sd^2).
struct LorentzianNoise {
    double mean = 0.0;
    double sd = 0.01;
};

struct LorentzianSpectrumSpec {
    std::size_t dim = 100;     // pixel count
    double centre_mean = 50.0;
    double centre_sd = 10.0;
    double fwhm = 7.0;
    std::size_t count = 500;   // spectra per class
    std::optional<LorentzianNoise> noise;

    void validate() const;
};

double lorentzian(double x, double centre, double fwhm);

// Samplers are pure functions of (spec, count, seed): repeated calls return
// bit-identical matrices and rows are generated from per-row sub-seeds, so
// results do not depend on any execution schedule.
SpectraMatrix sample_gaussian_class(const GaussianClassSpec& spec, std::size_t count,
                                    std::uint64_t seed);
SpectraMatrix sample_skew_normal_class(const SkewNormalClassSpec& spec, std::size_t count,
                                       std::uint64_t seed);
SpectraMatrix generate_lorentzian_class(const LorentzianSpectrumSpec& spec, std::uint64_t seed);

std::vector<double> row_norms(const SpectraMatrix& data);

struct NormHistogram {
    std::vector<double> edges;       // bins + 1, equal width
    std::vector<std::size_t> counts; // bins
    double mean = 0.0;
    double sd = 0.0;  // population sd of the norms
};

NormHistogram norm_histogram(const SpectraMatrix& data, std::size_t bins);
NormHistogram norm_histogram_on_grid(const SpectraMatrix& data, std::size_t bins, double lo,
                                     double hi);

// Overlapping-mass coefficient of two histograms on a shared grid:
// sum_b min(p_b, q_b) with p, q the normalized frequencies. 1 = identical,
// 0 = disjoint.
double histogram_overlap(const NormHistogram& a, const NormHistogram& b);

}  // namespace specsep::synthgen
