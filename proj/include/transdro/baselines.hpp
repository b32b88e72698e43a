#pragma once

#include "transdro/constraint.hpp"

namespace transdro {

inline Vector baseline_zero(Eigen::Index p) {
    if (p < 1) throw BadSpec("baseline_zero: p must be positive");
    return Vector::Zero(p);
}

inline Vector baseline_target_lasso(const Dataset& target, const LassoConfig& cfg) {
    return lasso_fit(target, cfg).beta;
}

struct WeightedBaseline {
    Vector beta;     // (B0_s1 g1 + B0_s2 g2) / 2
    Vector gamma_s1; // weights fit on s2 against the s1-augmented matrix
    Vector gamma_s2;
    Vector mean_gamma() const { return 0.5 * (gamma_s1 + gamma_s2); }
};

namespace detail {

inline PgResult candidate_least_squares(const Matrix& m, const Vector& y, BaselineKind kind,
                                        const SolverConfig& cfg) {
    return kind == BaselineKind::bounded_combo ? bounded_least_squares(m, y, cfg)
                                               : simplex_least_squares(m, y, cfg);
}

} // namespace detail

/// Cross-fitted weighted-average baseline: augment with the lasso fit from one
/// split, learn candidate-set weights on the other, swap roles, average the
/// two fitted coefficient vectors.
inline WeightedBaseline baseline_weighted(const Dataset& target, const SplitPlan& plan,
                                          const CoefficientMatrix& b_hat_sources, BaselineKind kind,
                                          const LassoConfig& cfg,
                                          const SolverConfig& solver_cfg = {},
                                          const Vector* beta_s1_hint = nullptr,
                                          const Vector* beta_s2_hint = nullptr) {
    if (kind != BaselineKind::convex_combo && kind != BaselineKind::bounded_combo)
        throw BadSpec("baseline_weighted: kind must be a weighted-combination variant");
    if (b_hat_sources.augmented)
        throw BadSpec("baseline_weighted: expects the unaugmented source matrix");

    const Dataset s1 = target.subset(plan.indices_s1);
    const Dataset s2 = target.subset(plan.indices_s2);
    const Vector beta_s1 = beta_s1_hint ? *beta_s1_hint : lasso_fit(s1, cfg).beta;
    const Vector beta_s2 = beta_s2_hint ? *beta_s2_hint : lasso_fit(s2, cfg).beta;

    const CoefficientMatrix b0_s1 = b_hat_sources.augment(beta_s1);
    const CoefficientMatrix b0_s2 = b_hat_sources.augment(beta_s2);

    const auto g1 = detail::candidate_least_squares(s2.x * b0_s1.columns, s2.y, kind, solver_cfg);
    const auto g2 = detail::candidate_least_squares(s1.x * b0_s2.columns, s1.y, kind, solver_cfg);

    WeightedBaseline out;
    out.gamma_s1 = g1.x;
    out.gamma_s2 = g2.x;
    out.beta = 0.5 * (b0_s1.columns * g1.x + b0_s2.columns * g2.x);
    return out;
}

} // namespace transdro
