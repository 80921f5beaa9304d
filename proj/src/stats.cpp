#include "specsep/stats.hpp"

#include <cmath>
#include <limits>

#include "specsep/common.hpp"

namespace specsep::stats {

namespace {

constexpr int kMaxIter = 20000;

double gamma_p_series(double a, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * eps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericError("regularized_gamma_p: series failed to converge");
}

double gamma_q_continued_fraction(double a, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= eps) {
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
        }
    }
    throw NumericError("regularized_gamma_p: continued fraction failed to converge");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || !std::isfinite(x)) {
        throw ConfigError("regularized_gamma_p: require a > 0 and x >= 0");
    }
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_square_cdf(double x, double dof) {
    if (!(dof > 0.0)) throw ConfigError("chi_square_cdf: dof must be positive");
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double mean(std::span<const double> v) {
    if (v.empty()) throw ConfigError("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

namespace {

double central_moment(std::span<const double> v, double m, int order) {
    double s = 0.0;
    for (double x : v) s += std::pow(x - m, order);
    return s / static_cast<double>(v.size());
}

}  // namespace

double stddev_population(std::span<const double> v) {
    const double m = mean(v);
    return std::sqrt(central_moment(v, m, 2));
}

double stddev_sample(std::span<const double> v) {
    if (v.size() < 2) throw ConfigError("stddev_sample: need at least two values");
    const double m = mean(v);
    const double n = static_cast<double>(v.size());
    return std::sqrt(central_moment(v, m, 2) * n / (n - 1.0));
}

double skewness(std::span<const double> v) {
    const double m = mean(v);
    const double m2 = central_moment(v, m, 2);
    const double m3 = central_moment(v, m, 3);
    if (m2 <= 0.0) throw NumericError("skewness: zero variance");
    return m3 / std::pow(m2, 1.5);
}

}  // namespace specsep::stats
