#pragma once

#include "transdro/lasso.hpp"
#include "transdro/simplex_qp.hpp"

namespace transdro {

/// Split-half plug-in estimate of the target noise level: lasso on s1,
/// squared prediction error on s2. Returns (sigma2_q, beta_s1).
inline std::pair<double, Vector> sigma2_target(const Dataset& target, const SplitPlan& plan,
                                               const LassoConfig& cfg) {
    if (plan.indices_s2.size() < 2)
        throw TooFewLabels("sigma2_target: evaluation split needs at least 2 rows");
    const Dataset s1 = target.subset(plan.indices_s1);
    const Dataset s2 = target.subset(plan.indices_s2);
    const Vector beta_s1 = lasso_fit(s1, cfg).beta;
    const double sigma2 = (s2.y - s2.x * beta_s1).squaredNorm() / static_cast<double>(s2.rows());
    return {sigma2, beta_s1};
}

/// Source-combination estimate: fit simplex weights on s1 against the source
/// coefficient matrix, evaluate the plug-in on s2.
inline std::pair<double, SimplexWeight> sigma2_source(const Dataset& target, const SplitPlan& plan,
                                                      const CoefficientMatrix& b_hat,
                                                      const SolverConfig& solver_cfg = {}) {
    if (b_hat.augmented)
        throw BadSpec("sigma2_source: expects the unaugmented source matrix");
    if (b_hat.p() != target.cols())
        throw DimensionMismatch("sigma2_source: coefficient length does not match target");
    if (plan.indices_s2.size() < 2)
        throw TooFewLabels("sigma2_source: evaluation split needs at least 2 rows");
    const Dataset s1 = target.subset(plan.indices_s1);
    const Dataset s2 = target.subset(plan.indices_s2);
    const auto sol = simplex_least_squares(s1.x * b_hat.columns, s1.y, solver_cfg);
    const SimplexWeight gamma{sol.x, CandidateSet::convex};
    const Vector pred = s2.x * (b_hat.columns * gamma.w);
    const double sigma2 = (s2.y - pred).squaredNorm() / static_cast<double>(s2.rows());
    return {sigma2, gamma};
}

inline double sigma2_combined(double sigma2_q, double sigma2_src) {
    if (sigma2_q < 0.0 || sigma2_src < 0.0)
        throw BadSpec("sigma2_combined: negative variance estimate");
    return std::min(sigma2_q, sigma2_src);
}

} // namespace transdro
