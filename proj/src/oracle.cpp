#include <cmath>

#include "specsep/common.hpp"
#include "specsep/models.hpp"
#include "specsep/stats.hpp"

namespace specsep::models {

OracleThresholdModel oracle_threshold(std::size_t n, double mu, double sigma1, double sigma2) {
    if (n < 1) throw ConfigError("oracle_threshold: n must be >= 1");
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
        throw ConfigError("oracle_threshold: sigmas must be positive");
    }
    if (sigma1 == sigma2) {
        throw ConfigError(
            "oracle_threshold: sigma1 == sigma2 gives a degenerate rule (classes "
            "indistinguishable)");
    }
    OracleThresholdModel m;
    m.dim = n;
    m.mu = mu;
    m.sigma1 = std::min(sigma1, sigma2);
    m.sigma2 = std::max(sigma1, sigma2);
    const double v1 = m.sigma1 * m.sigma1;
    const double v2 = m.sigma2 * m.sigma2;
    // Equal-density point of the two chi-square-scaled likelihoods; with the
    // denominator in this orientation the threshold is positive and
    // "S > T -> larger sigma" is the Bayes rule.
    m.threshold = static_cast<double>(n) * std::log(v2 / v1) / (1.0 / v1 - 1.0 / v2);
    return m;
}

double oracle_accuracy_analytic(std::size_t n, double sigma1, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
        throw ConfigError("oracle_accuracy_analytic: sigmas must be positive");
    }
    if (sigma1 == sigma2) return 0.5;
    const auto m = oracle_threshold(n, 0.0, sigma1, sigma2);
    const double dof = static_cast<double>(n);
    const double p_small = stats::chi_square_cdf(m.threshold / (m.sigma1 * m.sigma1), dof);
    const double p_large = stats::chi_square_cdf(m.threshold / (m.sigma2 * m.sigma2), dof);
    return 0.5 * (p_small + 1.0 - p_large);
}

}  // namespace specsep::models
