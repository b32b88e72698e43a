#pragma once

#include "transdro/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace transdro {

/// Gram matrix of the shifted columns under the empirical second moment of
/// the covariate pool: G_{l,k} = (b_l - beta_init)' (X'X/rows) (b_k - beta_init).
struct GammaMatrix {
    Matrix g;

    // smallest eigenvalue of G restricted to the simplex tangent space
    double tangent_min_eigenvalue() const {
        const Eigen::Index k = g.rows();
        if (k < 2) return 0.0;
        Matrix ones = Matrix::Ones(k, 1);
        Eigen::HouseholderQR<Matrix> qr(ones);
        const Matrix q = Matrix(qr.householderQ()).rightCols(k - 1);
        Eigen::SelfAdjointEigenSolver<Matrix> es(q.transpose() * g * q);
        return es.eigenvalues().minCoeff();
    }
};

inline GammaMatrix gamma_matrix(const CoefficientMatrix& b0_hat, const Vector& beta_init,
                                const Matrix& x_pool) {
    if (beta_init.size() != b0_hat.p())
        throw DimensionMismatch("gamma_matrix: baseline length does not match coefficients");
    if (x_pool.cols() != b0_hat.p())
        throw DimensionMismatch("gamma_matrix: covariate pool has wrong column count");
    if (x_pool.rows() == 0) throw TooFewRows("gamma_matrix: empty covariate pool");
    // T = X (B - beta 1'); G = T'T / rows is PSD by construction
    Matrix t = x_pool * b0_hat.columns;
    t.colwise() -= x_pool * beta_init;
    Matrix g = (t.transpose() * t) / static_cast<double>(x_pool.rows());
    g = 0.5 * (g + g.transpose()).eval();
    return GammaMatrix{std::move(g)};
}

struct WeightSolution {
    SimplexWeight gamma;
    SolveDiagnostics diagnostics;
};

namespace detail {

// min x'Gx over the simplex, deterministic uniform start.
inline PgResult simplex_quadratic_min(const Matrix& g, const SolverConfig& cfg) {
    return minimize_projected(QuadraticObjective{g, Vector::Zero(g.rows()), 0.0}, &project_simplex,
                              uniform_weight(g.rows()), cfg);
}

} // namespace detail

/// Minimizer of gamma' G gamma over the feasible set. Projected gradient over
/// the simplex handles the unconstrained-in-tau case; an active quadratic
/// constraint is folded in by bisecting the Lagrange multiplier, which is
/// justified by strict feasibility of the better of the two augmented
/// vertices (Slater for tau > 0).
inline WeightSolution solve_weights(const GammaMatrix& g, const FeasibleSet& fs,
                                    const SolverConfig& cfg = {}) {
    const Eigen::Index k = fs.b0_hat.count();
    if (g.g.rows() != k || g.g.cols() != k)
        throw DimensionMismatch("solve_weights: objective size does not match feasible set");

    WeightSolution out;
    out.diagnostics.degenerate = g.tangent_min_eigenvalue() < 1e-8;
    const QuadraticObjective objective{g.g, Vector::Zero(k), 0.0};

    auto finish = [&](const PgResult& r, double mu) {
        out.gamma = SimplexWeight{project_simplex(r.x), CandidateSet::convex};
        out.diagnostics.pg_iterations += r.iterations;
        out.diagnostics.mu = mu;
        out.diagnostics.objective = objective.value(out.gamma.w);
        out.diagnostics.constraint_slack =
            std::isfinite(fs.bound) ? fs.bound - loss_at(fs, out.gamma.w)
                                    : std::numeric_limits<double>::infinity();
        out.diagnostics.stationarity = r.stationarity;
    };

    const PgResult unconstrained = detail::simplex_quadratic_min(g.g, cfg);
    out.diagnostics.pg_iterations += unconstrained.iterations;
    if (!std::isfinite(fs.bound) || loss_at(fs, unconstrained.x) <= fs.bound) {
        finish(unconstrained, 0.0);
        return out;
    }

    const QuadraticObjective loss = QuadraticObjective::least_squares(fs.prediction_matrix(), fs.y_s2);
    auto solve_at = [&](double mu) {
        const QuadraticObjective penalized{g.g + mu * loss.a, mu * loss.b,
                                           mu * (loss.c - fs.bound)};
        PgResult r = minimize_projected(penalized, &project_simplex, uniform_weight(k), cfg);
        out.diagnostics.pg_iterations += r.iterations;
        return r;
    };

    // grow the bracket until the iterate turns feasible
    double mu_lo = 0.0, mu_hi = 1.0;
    PgResult at_hi = solve_at(mu_hi);
    while (loss_at(fs, at_hi.x) > fs.bound) {
        mu_lo = mu_hi;
        mu_hi *= 2.0;
        if (mu_hi > cfg.mu_max)
            throw BisectionBracketExhausted("solve_weights: no feasible iterate below mu_max; "
                                            "tau is at or near its degenerate minimum");
        at_hi = solve_at(mu_hi);
    }

    const double tol_abs = cfg.mu_bisect_tol * fs.bound;
    PgResult best_feasible = at_hi;
    double best_mu = mu_hi;
    for (int it = 0; it < 200; ++it) {
        const double residual = fs.bound - loss_at(fs, best_feasible.x);
        if (residual <= tol_abs) break;
        const double mid = 0.5 * (mu_lo + mu_hi);
        if (mu_hi - mu_lo <= 1e-12 * std::max(1.0, mu_hi)) break;
        ++out.diagnostics.bisections;
        const PgResult at_mid = solve_at(mid);
        const double mid_loss = loss_at(fs, at_mid.x);
        if (mid_loss > fs.bound) {
            // keep the feasible side; accept a mild overshoot when within tol
            if (mid_loss - fs.bound <= tol_abs) {
                best_feasible = at_mid;
                best_mu = mid;
                break;
            }
            mu_lo = mid;
        } else {
            mu_hi = mid;
            best_feasible = at_mid;
            best_mu = mid;
        }
    }
    finish(best_feasible, best_mu);
    return out;
}

struct FitConfig {
    LassoConfig lasso;
    SolverConfig solver;
    BaselineKind baseline = BaselineKind::convex_combo;
    double tau = kInfTau;
    bool augment_target = true; // false: source-only weights (maximin style), needs tau = inf
    std::uint64_t seed = 0;
};

/// Everything one replication's fits share: source coefficient estimates, the
/// target split, split-half lasso fits and the covariate pool.
class PipelineParts {
  public:
    Dataset target;
    Matrix x_pool;
    CoefficientMatrix b_hat;
    SplitPlan plan;
    LassoConfig lasso_cfg;
    SolverConfig solver_cfg;

    const FeasibleSet& feasible() {
        if (!fs_) fs_ = build_feasible_set(target, plan, b_hat, 0.0, lasso_cfg, solver_cfg);
        return *fs_;
    }
    const Vector& beta_full() {
        if (!beta_full_) beta_full_ = lasso_fit(target, lasso_cfg).beta;
        return *beta_full_;
    }
    const Vector& beta_s2() {
        if (!beta_s2_) beta_s2_ = lasso_fit(target.subset(plan.indices_s2), lasso_cfg).beta;
        return *beta_s2_;
    }

  private:
    std::optional<FeasibleSet> fs_;
    std::optional<Vector> beta_full_;
    std::optional<Vector> beta_s2_;
};

inline PipelineParts prepare_pipeline(const Dataset& target, const std::vector<Dataset>& sources,
                                      const LassoConfig& lasso_cfg, const SolverConfig& solver_cfg,
                                      std::uint64_t seed, const Dataset* unlabeled_pool = nullptr) {
    if (sources.empty()) throw BadSpec("prepare_pipeline: need at least one source");
    const Eigen::Index p = target.cols();
    for (const auto& s : sources)
        if (s.cols() != p)
            throw DimensionMismatch("prepare_pipeline: source site " + std::to_string(s.site_id) +
                                    " has " + std::to_string(s.cols()) + " features, target has " +
                                    std::to_string(p));
    if (unlabeled_pool && unlabeled_pool->cols() != p)
        throw DimensionMismatch("prepare_pipeline: unlabeled pool feature count mismatch");

    PipelineParts parts;
    parts.target = target;
    parts.lasso_cfg = lasso_cfg;
    parts.solver_cfg = solver_cfg;

    Matrix cols(p, static_cast<Eigen::Index>(sources.size()));
    for (std::size_t l = 0; l < sources.size(); ++l)
        cols.col(static_cast<Eigen::Index>(l)) = lasso_fit(sources[l], lasso_cfg).beta;
    parts.b_hat = CoefficientMatrix{std::move(cols), false};

    parts.plan = make_split(target, seed);

    if (unlabeled_pool) {
        parts.x_pool.resize(target.rows() + unlabeled_pool->rows(), p);
        parts.x_pool.topRows(target.rows()) = target.x;
        parts.x_pool.bottomRows(unlabeled_pool->rows()) = unlabeled_pool->x;
    } else {
        parts.x_pool = target.x;
    }
    return parts;
}

/// Runs the weight solve for one baseline/tau combination on shared parts.
inline FitReport fit_from_parts(PipelineParts& parts, BaselineKind kind, double tau,
                                bool augment_target = true) {
    FitReport report;
    report.baseline = kind;
    report.tau = tau;

    const Eigen::Index p = parts.target.cols();
    switch (kind) {
        case BaselineKind::zero:
            report.baseline_beta = baseline_zero(p);
            break;
        case BaselineKind::target_lasso:
            report.baseline_beta = parts.beta_full();
            break;
        case BaselineKind::convex_combo:
        case BaselineKind::bounded_combo: {
            const Vector beta_s1 = parts.feasible().b0_hat.columns.col(0);
            const auto wb = baseline_weighted(parts.target, parts.plan, parts.b_hat, kind,
                                              parts.lasso_cfg, parts.solver_cfg, &beta_s1,
                                              &parts.beta_s2());
            report.baseline_beta = wb.beta;
            report.baseline_gamma = wb.mean_gamma();
            break;
        }
    }

    if (!augment_target) {
        if (std::isfinite(tau))
            throw BadSpec("fit_from_parts: source-only weights require tau = inf");
        const GammaMatrix g = gamma_matrix(parts.b_hat, report.baseline_beta, parts.x_pool);
        const PgResult r = detail::simplex_quadratic_min(g.g, parts.solver_cfg);
        report.gamma = SimplexWeight{project_simplex(r.x), CandidateSet::convex};
        report.b0_hat = parts.b_hat;
        report.beta = parts.b_hat.columns * report.gamma.w;
        report.diagnostics.pg_iterations = r.iterations;
        report.diagnostics.objective = report.gamma.w.dot(g.g * report.gamma.w);
        report.diagnostics.stationarity = r.stationarity;
        report.diagnostics.degenerate = g.tangent_min_eigenvalue() < 1e-8;
        report.diagnostics.constraint_slack = std::numeric_limits<double>::infinity();
        report.sigma2_hat = report.sigma2_q = report.sigma2_source =
            std::numeric_limits<double>::quiet_NaN();
        return report;
    }

    const FeasibleSet fs = parts.feasible().with_tau(tau);
    report.sigma2_q = fs.sigma2_q;
    report.sigma2_source = fs.sigma2_source;
    report.sigma2_hat = fs.sigma2_min();
    report.b0_hat = fs.b0_hat;

    const GammaMatrix g = gamma_matrix(fs.b0_hat, report.baseline_beta, parts.x_pool);
    try {
        WeightSolution sol = solve_weights(g, fs, parts.solver_cfg);
        report.gamma = sol.gamma;
        report.diagnostics = sol.diagnostics;
    } catch (const BisectionBracketExhausted&) {
        // tau at its degenerate minimum: fall back to the feasible loss minimizer
        const auto lm = simplex_least_squares(fs.prediction_matrix(), fs.y_s2, parts.solver_cfg);
        report.gamma = SimplexWeight{project_simplex(lm.x), CandidateSet::convex};
        report.diagnostics.degenerate = true;
        report.diagnostics.pg_iterations = lm.iterations;
        report.diagnostics.objective = report.gamma.w.dot(g.g * report.gamma.w);
        report.diagnostics.constraint_slack = fs.bound - loss_at(fs, report.gamma.w);
        report.diagnostics.stationarity = lm.stationarity;
        report.diagnostics.mu = parts.solver_cfg.mu_max;
    }
    report.beta = fs.b0_hat.columns * report.gamma.w;
    return report;
}

/// One-shot estimator: per-source lasso fits, target split, variance
/// estimates, baseline, then the constrained weight solve.
inline FitReport fit_transdro(const Dataset& target, const std::vector<Dataset>& sources,
                              const FitConfig& cfg, const Dataset* unlabeled_pool = nullptr) {
    if (cfg.tau < 0.0) throw BadSpec("fit_transdro: tau must be nonnegative");
    PipelineParts parts =
        prepare_pipeline(target, sources, cfg.lasso, cfg.solver, cfg.seed, unlabeled_pool);
    return fit_from_parts(parts, cfg.baseline, cfg.tau, cfg.augment_target);
}

} // namespace transdro
