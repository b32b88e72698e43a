#pragma once

#include "transdro/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace transdro {

struct TooFewLabels : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewRows : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BisectionBracketExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kInfTau = std::numeric_limits<double>::infinity();

/// One site's design: covariates x (n_obs rows, p cols) and, when labeled,
/// a response y of matching length. Site 0 is reserved for the target.
struct Dataset {
    Matrix x;
    Vector y;
    int site_id = 0;

    bool is_labeled() const { return y.size() > 0; }
    Eigen::Index rows() const { return x.rows(); }
    Eigen::Index cols() const { return x.cols(); }

    static Dataset labeled(Matrix x, Vector y, int site_id) {
        if (y.size() != x.rows())
            throw DimensionMismatch("Dataset: y length " + std::to_string(y.size()) +
                                    " does not match row count " + std::to_string(x.rows()));
        Dataset d{std::move(x), std::move(y), site_id};
        d.check_finite();
        return d;
    }

    static Dataset unlabeled(Matrix x, int site_id) {
        Dataset d{std::move(x), Vector(), site_id};
        d.check_finite();
        return d;
    }

    void check_finite() const {
        if (!x.allFinite() || (is_labeled() && !y.allFinite()))
            throw NonFinite("Dataset: non-finite entry in site " + std::to_string(site_id));
    }

    Dataset subset(const std::vector<Eigen::Index>& idx) const {
        Matrix xs(static_cast<Eigen::Index>(idx.size()), x.cols());
        Vector ys(is_labeled() ? static_cast<Eigen::Index>(idx.size()) : 0);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            xs.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
            if (is_labeled()) ys[static_cast<Eigen::Index>(i)] = y[idx[i]];
        }
        return Dataset{std::move(xs), std::move(ys), site_id};
    }
};

/// Disjoint halves of the labeled target rows; sizes differ by at most one.
struct SplitPlan {
    std::vector<Eigen::Index> indices_s1;
    std::vector<Eigen::Index> indices_s2;
    std::uint64_t seed = 0;

    SplitPlan swapped() const { return SplitPlan{indices_s2, indices_s1, seed}; }
};

inline SplitPlan make_split(const Dataset& target, std::uint64_t seed) {
    if (!target.is_labeled() || target.rows() < 4)
        throw TooFewLabels("make_split: need at least 4 labeled target rows, have " +
                           std::to_string(target.rows()));
    Rng rng(seed);
    auto perm = rng.permutation(target.rows());
    const auto half = static_cast<std::size_t>(target.rows() / 2);
    SplitPlan plan;
    plan.seed = seed;
    plan.indices_s1.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
    plan.indices_s2.assign(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
    std::sort(plan.indices_s1.begin(), plan.indices_s1.end());
    std::sort(plan.indices_s2.begin(), plan.indices_s2.end());
    return plan;
}

/// Column-stacked coefficient estimates; column 0 is the target estimate when
/// augmented is set.
struct CoefficientMatrix {
    Matrix columns; // p x count
    bool augmented = false;

    Eigen::Index p() const { return columns.rows(); }
    Eigen::Index count() const { return columns.cols(); }

    CoefficientMatrix augment(const Vector& target_column) const {
        if (target_column.size() != p())
            throw DimensionMismatch("CoefficientMatrix::augment: column length mismatch");
        Matrix out(p(), count() + 1);
        out.col(0) = target_column;
        out.rightCols(count()) = columns;
        return CoefficientMatrix{std::move(out), true};
    }
};

enum class CandidateSet { convex, bounded };

/// Mixture weight over sites. convex: the probability simplex; bounded:
/// entry 0 in [0,1], remaining entries in [-1,1].
struct SimplexWeight {
    Vector w;
    CandidateSet candidate_set = CandidateSet::convex;

    bool valid(double tol = 1e-9) const {
        if (w.size() == 0) return false;
        if (candidate_set == CandidateSet::convex) {
            if (w.minCoeff() < -tol || w.maxCoeff() > 1.0 + tol) return false;
            return std::abs(w.sum() - 1.0) <= tol;
        }
        if (w[0] < -tol || w[0] > 1.0 + tol) return false;
        for (Eigen::Index i = 1; i < w.size(); ++i)
            if (w[i] < -1.0 - tol || w[i] > 1.0 + tol) return false;
        return true;
    }
};

struct SolveDiagnostics {
    int pg_iterations = 0;     // projected-gradient iterations, all inner solves
    int bisections = 0;        // multiplier bisection steps
    double mu = 0.0;           // final Lagrange multiplier
    double objective = 0.0;    // gamma' G gamma at the solution
    double constraint_slack = 0.0; // bound - loss at the solution
    double stationarity = 0.0; // projected-gradient residual of the final solve
    bool degenerate = false;   // G nearly singular on the simplex tangent space
};

enum class BaselineKind { zero, target_lasso, convex_combo, bounded_combo };

inline const char* baseline_name(BaselineKind k) {
    switch (k) {
        case BaselineKind::zero: return "zero";
        case BaselineKind::target_lasso: return "target_lasso";
        case BaselineKind::convex_combo: return "convex_combo";
        case BaselineKind::bounded_combo: return "bounded_combo";
    }
    return "?";
}

/// Full description of one fit: coefficients, mixture weight, the baseline it
/// was anchored to, variance estimates and solver diagnostics.
struct FitReport {
    Vector beta;
    SimplexWeight gamma;
    CoefficientMatrix b0_hat;     // the matrix gamma applies to (beta = b0_hat * gamma)
    BaselineKind baseline = BaselineKind::zero;
    Vector baseline_beta;
    Vector baseline_gamma;        // weighted baselines only; empty otherwise
    double tau = 0.0;
    double sigma2_hat = 0.0;      // min of the two variance estimates
    double sigma2_q = 0.0;
    double sigma2_source = 0.0;
    SolveDiagnostics diagnostics;
};

} // namespace transdro
