#pragma once

#include "transdro/variance.hpp"

namespace transdro {

/// The estimated uncertainty set: weights gamma0 on the simplex whose squared
/// prediction error on the held-out target split stays within bound.
/// Column 0 of b0_hat is the split-s1 lasso fit, which makes
/// loss(e1) = sigma2_q an identity.
struct FeasibleSet {
    CoefficientMatrix b0_hat;
    Matrix x_s2;
    Vector y_s2;
    double bound = 0.0; // min(sigma2_q, sigma2_source) + tau
    double tau = 0.0;
    double sigma2_q = 0.0;
    double sigma2_source = 0.0;
    SimplexWeight gamma_s1; // the source weight behind sigma2_source

    double sigma2_min() const { return std::min(sigma2_q, sigma2_source); }
    // prediction columns on the evaluation split
    Matrix prediction_matrix() const { return x_s2 * b0_hat.columns; }

    FeasibleSet with_tau(double new_tau) const {
        if (new_tau < 0.0) throw BadSpec("FeasibleSet: tau must be nonnegative");
        FeasibleSet fs = *this;
        fs.tau = new_tau;
        fs.bound = fs.sigma2_min() + new_tau;
        return fs;
    }
};

inline double loss_at(const FeasibleSet& fs, const Vector& gamma0) {
    if (gamma0.size() != fs.b0_hat.count())
        throw DimensionMismatch("loss_at: weight length " + std::to_string(gamma0.size()) +
                                " vs " + std::to_string(fs.b0_hat.count()) + " columns");
    const Vector resid = fs.y_s2 - fs.x_s2 * (fs.b0_hat.columns * gamma0);
    return resid.squaredNorm() / static_cast<double>(fs.y_s2.size());
}

inline double loss_at(const FeasibleSet& fs, const SimplexWeight& gamma0) {
    return loss_at(fs, gamma0.w);
}

inline bool is_feasible(const FeasibleSet& fs, const Vector& gamma0, double rel_slack = 0.0) {
    return loss_at(fs, gamma0) <= fs.bound * (1.0 + rel_slack);
}

/// Builds the data-driven set: split-half variance estimates, target-augmented
/// coefficient matrix, bound = min(sigma2_q, sigma2_source) + tau.
inline FeasibleSet build_feasible_set(const Dataset& target, const SplitPlan& plan,
                                      const CoefficientMatrix& b_hat_sources, double tau,
                                      const LassoConfig& cfg, const SolverConfig& solver_cfg = {}) {
    if (tau < 0.0) throw BadSpec("build_feasible_set: tau must be nonnegative");
    auto [s2q, beta_s1] = sigma2_target(target, plan, cfg);
    auto [s2src, gamma_s1] = sigma2_source(target, plan, b_hat_sources, solver_cfg);
    const Dataset s2 = target.subset(plan.indices_s2);
    FeasibleSet fs;
    fs.b0_hat = b_hat_sources.augment(beta_s1);
    fs.x_s2 = s2.x;
    fs.y_s2 = s2.y;
    fs.sigma2_q = s2q;
    fs.sigma2_source = s2src;
    fs.tau = tau;
    fs.bound = sigma2_combined(s2q, s2src) + tau;
    fs.gamma_s1 = gamma_s1;
    return fs;
}

/// Empirical distance between the target and the source hull: the excess of
/// the best source-only prediction error over min(sigma2_q, sigma2_source),
/// clipped at zero.
inline double alpha_hat(const FeasibleSet& fs, const SolverConfig& cfg = {}) {
    if (!fs.b0_hat.augmented)
        throw BadSpec("alpha_hat: feasible set lacks the augmented target column");
    const Eigen::Index l = fs.b0_hat.count() - 1;
    if (l < 1) throw BadSpec("alpha_hat: no source columns");
    const Matrix m_src = fs.x_s2 * fs.b0_hat.columns.rightCols(l);
    const auto sol = simplex_least_squares(m_src, fs.y_s2, cfg);
    return std::max(0.0, sol.objective - fs.sigma2_min());
}

} // namespace transdro
