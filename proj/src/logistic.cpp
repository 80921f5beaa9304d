#include <cmath>
#include <deque>

#include "model_internal.hpp"
#include "specsep/common.hpp"
#include "specsep/models.hpp"

namespace specsep::models {

namespace {

// log(1 + exp(z)) without overflow.
double log1pexp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

struct Objective {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>& X;
    const Eigen::VectorXd& y;  // 0/1
    double l2;

    double value(const Eigen::VectorXd& wb) const {
        const auto n = X.cols();
        const Eigen::VectorXd z = (X * wb.head(n)).array() + wb[n];
        double loss = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            loss += log1pexp(z[i]) - y[i] * z[i];
        }
        return loss + 0.5 * l2 * wb.head(n).squaredNorm();
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& wb) const {
        const auto n = X.cols();
        const Eigen::VectorXd z = (X * wb.head(n)).array() + wb[n];
        Eigen::VectorXd p(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-z[i]));
        const Eigen::VectorXd resid = p - y;
        Eigen::VectorXd g(n + 1);
        g.head(n) = X.transpose() * resid + l2 * wb.head(n);
        g[n] = resid.sum();
        return g;
    }
};

// Two-loop L-BFGS with Armijo backtracking. Deterministic: no randomness,
// fixed memory, fixed iteration order.
struct LbfgsResult {
    Eigen::VectorXd x;
    bool converged = false;
    int iterations = 0;
};

LbfgsResult lbfgs_minimize(const Objective& obj, Eigen::VectorXd x, int max_iter,
                           double grad_tol = 1e-6) {
    constexpr int kMemory = 10;
    std::deque<Eigen::VectorXd> s_hist;
    std::deque<Eigen::VectorXd> y_hist;
    std::deque<double> rho_hist;

    double f = obj.value(x);
    Eigen::VectorXd g = obj.gradient(x);
    LbfgsResult result;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
            result.converged = true;
            break;
        }
        // Two-loop recursion.
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const auto& s = s_hist.back();
            const auto& yv = y_hist.back();
            q *= s.dot(yv) / yv.squaredNorm();
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd direction = -q;
        double dir_deriv = g.dot(direction);
        if (!(dir_deriv < 0.0)) {  // not a descent direction; fall back to steepest descent
            direction = -g;
            dir_deriv = -g.squaredNorm();
        }

        double step = 1.0;
        const double c1 = 1e-4;
        Eigen::VectorXd x_new;
        double f_new = f;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * direction;
            f_new = obj.value(x_new);
            if (f_new <= f + c1 * step * dir_deriv) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // line search stalled at machine precision

        Eigen::VectorXd g_new = obj.gradient(x_new);
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (static_cast<int>(s_hist.size()) == kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
        }
        x = std::move(x_new);
        f = f_new;
        g = std::move(g_new);
    }
    result.x = std::move(x);
    result.iterations = iter;
    if (!result.converged && g.lpNorm<Eigen::Infinity>() < grad_tol) result.converged = true;
    return result;
}

}  // namespace

double logistic_objective(const Eigen::VectorXd& weights_and_bias, const SpectraMatrix& data,
                          double l2_strength) {
    LabelEncoding enc;
    const auto yi = detail::encode_labels(data, enc);
    const auto X = detail::to_eigen(data);
    Eigen::VectorXd y(static_cast<Eigen::Index>(yi.size()));
    for (std::size_t i = 0; i < yi.size(); ++i) y[static_cast<Eigen::Index>(i)] = yi[i];
    return Objective{X, y, l2_strength}.value(weights_and_bias);
}

Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& weights_and_bias,
                                  const SpectraMatrix& data, double l2_strength) {
    LabelEncoding enc;
    const auto yi = detail::encode_labels(data, enc);
    const auto X = detail::to_eigen(data);
    Eigen::VectorXd y(static_cast<Eigen::Index>(yi.size()));
    for (std::size_t i = 0; i < yi.size(); ++i) y[static_cast<Eigen::Index>(i)] = yi[i];
    return Objective{X, y, l2_strength}.gradient(weights_and_bias);
}

LogisticModel fit_logistic(const SpectraMatrix& train, double l2_strength, int max_iter) {
    if (l2_strength < 0.0) throw ConfigError("fit_logistic: l2_strength must be >= 0");
    if (max_iter < 1) throw ConfigError("fit_logistic: max_iter must be >= 1");
    LogisticModel model;
    const auto yi = detail::encode_labels(train, model.enc);
    const auto X = detail::to_eigen(train);
    Eigen::VectorXd y(static_cast<Eigen::Index>(yi.size()));
    for (std::size_t i = 0; i < yi.size(); ++i) y[static_cast<Eigen::Index>(i)] = yi[i];

    const Objective obj{X, y, l2_strength};
    Eigen::VectorXd wb = Eigen::VectorXd::Zero(X.cols() + 1);
    auto res = lbfgs_minimize(obj, std::move(wb), max_iter);

    model.weights = res.x.head(X.cols());
    model.bias = res.x[X.cols()];
    model.l2_strength = l2_strength;
    model.max_iter = max_iter;
    model.converged = res.converged;
    model.iterations = res.iterations;
    return model;
}

double logistic_loss(const LogisticModel& m, const SpectraMatrix& data) {
    Eigen::VectorXd wb(m.weights.size() + 1);
    wb.head(m.weights.size()) = m.weights;
    wb[m.weights.size()] = m.bias;
    return logistic_objective(wb, data, m.l2_strength);
}

}  // namespace specsep::models
