#pragma once

#include "transdro/types.hpp"

#include <optional>

namespace transdro {

struct LassoConfig {
    std::optional<double> lambda;                 // absent -> choose by K-fold CV
    int max_iter = 1000;                          // coordinate-descent sweeps
    double tol = 1e-7;                            // max coefficient change to stop
    bool standardize = true;                      // center x,y; unit-variance columns
    int n_folds = 5;
    std::optional<std::uint64_t> cv_shuffle_seed; // absent -> fold(i) = i mod K
};

struct LassoFit {
    Vector beta;                        // original-scale coefficients
    double intercept = 0.0;             // 0 when standardize is off
    double lambda = 0.0;
    int sweeps = 0;
    bool converged = false;
    std::vector<double> objective_trace; // penalized objective after each sweep
};

namespace detail {

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// The problem in standardized coordinates plus whatever is needed to map a
// solution back to the original scale.
struct StandardizedProblem {
    Matrix gram;    // X'X/n of the working design
    Vector xty;     // X'y/n
    double yty;     // y'y/n
    Vector x_mean, x_scale;
    double y_mean = 0.0;
    Eigen::Index n = 0, p = 0;
};

inline StandardizedProblem standardize_problem(const Matrix& x, const Vector& y, bool standardize) {
    StandardizedProblem sp;
    sp.n = x.rows();
    sp.p = x.cols();
    sp.x_mean = Vector::Zero(sp.p);
    sp.x_scale = Vector::Ones(sp.p);
    Matrix xs;
    Vector ys;
    if (standardize) {
        sp.x_mean = x.colwise().mean();
        sp.y_mean = y.mean();
        xs = x.rowwise() - sp.x_mean.transpose();
        for (Eigen::Index j = 0; j < sp.p; ++j) {
            double sd = std::sqrt(xs.col(j).squaredNorm() / static_cast<double>(sp.n));
            if (sd < 1e-12) sd = 1.0; // constant column; its coefficient stays 0
            sp.x_scale[j] = sd;
            xs.col(j) /= sd;
        }
        ys = y.array() - sp.y_mean;
    } else {
        xs = x;
        ys = y;
    }
    const double inv_n = 1.0 / static_cast<double>(sp.n);
    sp.gram = (xs.transpose() * xs) * inv_n;
    sp.xty = (xs.transpose() * ys) * inv_n;
    sp.yty = ys.squaredNorm() * inv_n;
    return sp;
}

// Cyclic coordinate descent on (1/n)||y - Xb||^2 + lambda ||b||_1 given the
// covariance pieces. beta is updated in place (warm start).
inline void coordinate_descent(const StandardizedProblem& sp, double lambda, const LassoConfig& cfg,
                               Vector& beta, int& sweeps, bool& converged,
                               std::vector<double>* trace) {
    const Eigen::Index p = sp.p;
    Vector gb = sp.gram * beta; // gram * beta, maintained incrementally
    converged = false;
    for (sweeps = 0; sweeps < cfg.max_iter; ++sweeps) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double gjj = sp.gram(j, j);
            const double old = beta[j];
            double next = 0.0;
            if (gjj > 1e-12) {
                const double rho = sp.xty[j] - (gb[j] - gjj * old);
                next = soft_threshold(rho, lambda / 2.0) / gjj;
            }
            const double delta = next - old;
            if (delta != 0.0) {
                beta[j] = next;
                gb += sp.gram.col(j) * delta;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (trace) {
            const double obj = sp.yty - 2.0 * sp.xty.dot(beta) + beta.dot(gb) +
                               lambda * beta.lpNorm<1>();
            trace->push_back(obj);
        }
        if (max_change < cfg.tol) {
            converged = true;
            ++sweeps;
            break;
        }
    }
}

inline LassoFit fit_standardized(const StandardizedProblem& sp, double lambda, const LassoConfig& cfg,
                                 Vector beta_warm = Vector()) {
    LassoFit fit;
    Vector beta = beta_warm.size() == sp.p ? std::move(beta_warm) : Vector::Zero(sp.p).eval();
    coordinate_descent(sp, lambda, cfg, beta, fit.sweeps, fit.converged, &fit.objective_trace);
    fit.beta = beta.cwiseQuotient(sp.x_scale);
    fit.intercept = sp.y_mean - sp.x_mean.dot(fit.beta);
    fit.lambda = lambda;
    if (!fit.beta.allFinite())
        throw NonFinite("lasso_fit: diverged coefficients");
    return fit;
}

inline std::vector<double> lambda_grid(double lambda_max, int points = 100, double decades = 4.0) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] =
            lambda_max * std::pow(10.0, -decades * static_cast<double>(i) / (points - 1));
    return grid;
}

} // namespace detail

inline LassoFit lasso_cv(const Dataset& data, const LassoConfig& cfg);

/// l1-penalized least squares: argmin (1/n)||y - Xb||^2 + lambda ||b||_1.
/// With an absent lambda this defers to lasso_cv.
inline LassoFit lasso_fit(const Dataset& data, const LassoConfig& cfg) {
    if (!data.is_labeled() || data.rows() == 0)
        throw TooFewRows("lasso_fit: no labeled rows");
    if (!cfg.lambda) return lasso_cv(data, cfg);
    if (*cfg.lambda < 0.0) throw BadSpec("lasso_fit: negative lambda");
    auto sp = detail::standardize_problem(data.x, data.y, cfg.standardize);
    return detail::fit_standardized(sp, *cfg.lambda, cfg);
}

/// K-fold cross-validated lasso: lambda picked from a 100-point log grid
/// spanning four decades below lambda_max = max_j |2 X'y/n|_j of the working
/// problem, then refit on the full data. Fold of row i is (i mod K), after an
/// optional seeded shuffle.
inline LassoFit lasso_cv(const Dataset& data, const LassoConfig& cfg) {
    if (!data.is_labeled()) throw TooFewRows("lasso_cv: no labeled rows");
    const Eigen::Index n = data.rows();
    const int k = cfg.n_folds;
    if (k < 2) throw BadSpec("lasso_cv: n_folds must be >= 2");
    if (n < k) throw TooFewRows("lasso_cv: fewer rows than folds");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    if (cfg.cv_shuffle_seed) order = Rng(*cfg.cv_shuffle_seed).permutation(n);

    auto sp_full = detail::standardize_problem(data.x, data.y, cfg.standardize);
    const double lambda_max = 2.0 * sp_full.xty.cwiseAbs().maxCoeff();
    if (lambda_max <= 0.0) {
        // y is constant after centering; every lambda gives the zero fit.
        return detail::fit_standardized(sp_full, 0.0, cfg);
    }
    const auto grid = detail::lambda_grid(lambda_max);

    std::vector<double> cv_mse(grid.size(), 0.0);
    for (int fold = 0; fold < k; ++fold) {
        std::vector<Eigen::Index> train, valid;
        for (Eigen::Index i = 0; i < n; ++i) {
            ((i % k == fold) ? valid : train).push_back(order[static_cast<std::size_t>(i)]);
        }
        const Dataset tr = data.subset(train);
        const Dataset va = data.subset(valid);
        auto sp = detail::standardize_problem(tr.x, tr.y, cfg.standardize);
        Vector beta_s = Vector::Zero(sp.p); // warm start along the path
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            int sweeps = 0;
            bool conv = false;
            detail::coordinate_descent(sp, grid[gi], cfg, beta_s, sweeps, conv, nullptr);
            const Vector beta = beta_s.cwiseQuotient(sp.x_scale);
            const double intercept = sp.y_mean - sp.x_mean.dot(beta);
            const Vector resid = va.y - (va.x * beta).array().matrix() -
                                 Vector::Constant(va.rows(), intercept);
            cv_mse[gi] += resid.squaredNorm() / static_cast<double>(va.rows());
        }
    }

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi)
        if (cv_mse[gi] < cv_mse[best]) best = gi;
    return detail::fit_standardized(sp_full, grid[best], cfg);
}

/// Max violation of the stationarity conditions at beta for the problem the
/// fit solved (standardized coordinates when cfg.standardize is set):
/// zero coordinates need |2 X'(Xb - y)/n| <= lambda, active ones equality
/// with sign. Returns the largest excess over lambda.
inline double kkt_violation(const Dataset& data, const LassoConfig& cfg, const LassoFit& fit) {
    auto sp = detail::standardize_problem(data.x, data.y, cfg.standardize);
    const Vector beta_s = fit.beta.cwiseProduct(sp.x_scale);
    const Vector grad = 2.0 * (sp.gram * beta_s - sp.xty); // d/db of (1/n)||y-Xb||^2
    double worst = 0.0;
    for (Eigen::Index j = 0; j < sp.p; ++j) {
        if (beta_s[j] == 0.0)
            worst = std::max(worst, std::abs(grad[j]) - fit.lambda);
        else
            worst = std::max(worst, std::abs(grad[j] + fit.lambda * (beta_s[j] > 0 ? 1.0 : -1.0)));
    }
    return worst;
}

} // namespace transdro
