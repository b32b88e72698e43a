#pragma once

#include "transdro/dro.hpp"

namespace transdro {

enum class Profile { desk, paper };

/// Parameters for one synthetic scenario. Site counts and sizes default to
/// the desk profile; the paper profile raises the source and pool sizes.
struct ScenarioSpec {
    std::string setting_id = "1.1";
    int p = 35;
    int L = 4;
    int n = 200;        // labeled target rows
    int n_source = 2000; // rows per source site
    int n_valid = 125;
    int n_pool = 2000;  // unlabeled target covariate rows
    double u = 0.005;
    double tau = -1.0;  // negative -> default 1/n
    double sigma2_q = 1.0;
    double sigma2_p = 0.5;
    int p_adv = 25;
    int L_adv = 5;
    int s0 = 100;
    int s1 = 1;
    bool nega_have = false;
    std::uint64_t seed = 0;

    double resolved_tau() const { return tau < 0.0 ? 1.0 / static_cast<double>(n) : tau; }

    bool low_dimensional() const {
        return setting_id == "1.1" || setting_id == "1.2" || setting_id == "1.3" ||
               setting_id == "2" || setting_id == "3";
    }
    bool high_dimensional() const {
        return setting_id == "4.1" || setting_id == "4.2" || setting_id == "5";
    }

    static ScenarioSpec for_setting(const std::string& id, Profile profile = Profile::desk) {
        ScenarioSpec s;
        s.setting_id = id;
        if (profile == Profile::paper) {
            s.n_source = 20000;
            s.n_pool = 20000;
        }
        if (id == "1.1") {
            s.u = 0.005;
        } else if (id == "1.2") {
            s.u = 0.1;
        } else if (id == "1.3") {
            s.u = 0.2;
        } else if (id == "2") {
            s.u = 0.005;
        } else if (id == "3") {
            s.u = 0.005;
        } else if (id == "4.1" || id == "4.2") {
            s.p = 200;
            s.L = 10;
            s.n = 100;
            s.L_adv = id == "4.1" ? 5 : 2;
            s.p_adv = 25;
        } else if (id == "5") {
            s.p = 307;
            s.L = 10;
            s.n = 100;
            s.s0 = 100;
            s.s1 = 1;
        } else {
            throw BadSpec("unknown setting '" + id + "'");
        }
        return s;
    }

    void validate() const {
        if (!low_dimensional() && !high_dimensional())
            throw BadSpec("unknown setting '" + setting_id + "'");
        if (p < 1 || L < 1 || n < 4 || n_source < 2 || n_valid < 1 || n_pool < 0)
            throw BadSpec("scenario sizes out of range");
        if (sigma2_q < 0.0 || sigma2_p < 0.0) throw BadSpec("negative noise variance");
        if (tau >= 0.0 && !std::isfinite(tau) && tau != kInfTau) throw BadSpec("bad tau");
        if (low_dimensional()) {
            if (L != 4) throw BadSpec("low-dimensional settings use L = 4");
            if (p < 25) throw BadSpec("low-dimensional settings need p >= 25");
        } else if (setting_id == "4.1" || setting_id == "4.2") {
            if (p < 50) throw BadSpec("setting 4 needs p >= 50");
            if (p_adv < 0 || p_adv > 50) throw BadSpec("p_adv must lie in [0, 50]");
            if (L_adv < 0 || L_adv > L) throw BadSpec("L_adv must lie in [0, L]");
        } else {
            if (s0 < 1 || p < 7 + s0) throw BadSpec("setting 5 needs p >= 7 + s0");
            if (s1 < 0) throw BadSpec("s1 must be nonnegative");
        }
    }
};

struct GroundTruth {
    Vector beta_star;
    CoefficientMatrix b_matrix;
    Vector beta_star_valid;
    double alpha_true = 0.0;
    std::vector<int> adversarial_sources; // positions into the sources vector
    Vector valid_mixture; // setting 3: the Dirichlet source weights behind beta_star_valid
};

struct ScenarioData {
    std::vector<Dataset> sources;
    Dataset target;      // labeled rows
    Dataset target_pool; // unlabeled covariate rows
    Dataset validation;
    GroundTruth truth;
};

inline Matrix ar_covariance(int p, double rho) {
    Matrix s(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
    return s;
}

/// Population distance between beta_star and the convex source hull under
/// sigma: min over the simplex of (beta - B g)' sigma (beta - B g).
inline double population_alpha(const Vector& beta_star, const Matrix& b_cols, const Matrix& sigma) {
    SolverConfig cfg;
    cfg.pg_tol = 1e-16;
    cfg.pg_max_iter = 200000;
    const Matrix sb = sigma * b_cols;
    QuadraticObjective f{b_cols.transpose() * sb, -2.0 * (sb.transpose() * beta_star),
                         beta_star.dot(sigma * beta_star)};
    f.a = 0.5 * (f.a + f.a.transpose()).eval();
    const auto r = minimize_projected(f, &project_simplex, uniform_weight(b_cols.cols()), cfg);
    return std::max(0.0, r.objective);
}

enum class SiteKind { source, target };

/// Covariate-shift draws: target rows follow AR(0.7) with zero mean; each
/// source gets AR(0.6) with a small per-entry diagonal jitter and a mean
/// vector scattered around an Exp(1) level.
inline std::pair<Vector, Matrix> gen_covariance(SiteKind kind, int p, Rng& rng) {
    if (p < 1) throw BadSpec("gen_covariance: p must be positive");
    if (kind == SiteKind::target) return {Vector::Zero(p), ar_covariance(p, 0.7)};
    Matrix sigma = ar_covariance(p, 0.6);
    for (int j = 0; j < p; ++j) sigma(j, j) += rng.normal(0.0, 0.01);
    // restore positive definiteness in the rare case the jitter broke it
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
        const double lift = 1e-6 - es.eigenvalues().minCoeff();
        if (lift > 0.0) sigma += lift * Matrix::Identity(p, p);
    }
    const double level = rng.exponential(1.0);
    Vector mu(p);
    for (int j = 0; j < p; ++j) mu[j] = rng.normal(level, 0.1);
    return {mu, sigma};
}

namespace detail {

inline Dataset draw_site(const Vector& mu, const Matrix& sigma, const Vector& coef, double noise_var,
                         Eigen::Index rows, int site_id, Rng& rng) {
    const Eigen::LLT<Matrix> llt(sigma);
    Matrix x = mvnormal_rows(rows, mu, Matrix(llt.matrixL()), rng);
    Vector y = x * coef;
    const double sd = std::sqrt(noise_var);
    for (Eigen::Index i = 0; i < rows; ++i) y[i] += rng.normal(0.0, sd);
    return Dataset::labeled(std::move(x), std::move(y), site_id);
}

} // namespace detail

/// Coefficients for the low-dimensional settings: three sources share value
/// 0.3 on overlapping blocks of block_len coordinates shifted by block_offset,
/// the fourth flips the sign of their average.
inline Matrix setting_low_coefficients(int p, int block_offset = 5, int block_len = 15,
                                       double value = 0.3) {
    if (2 * block_offset + block_len > p)
        throw BadSpec("setting_low_coefficients: blocks do not fit into p");
    Matrix b = Matrix::Zero(p, 4);
    for (int l = 0; l < 3; ++l)
        for (int j = 0; j < block_len; ++j) b(l * block_offset + j, l) = value;
    b.col(3) = -(b.col(0) + b.col(1) + b.col(2)) / 3.0;
    return b;
}

/// Coefficients for setting 5: a fixed strong head shared with the target,
/// and a source-specific tail of s0 entries of magnitude s1/s0. With
/// nega_have the tail signs are symmetric two-point draws; paired_signs makes
/// consecutive sources exact sign mirrors of each other.
inline Matrix setting5_coefficients(int p, int L, int s0, int s1, bool nega_have, bool paired_signs,
                                    Rng& rng) {
    if (p < 7 + s0) throw BadSpec("setting5_coefficients: p < 7 + s0");
    const double head[7] = {0.3, 0.1, 0.5, -0.2, -0.7, 0.0, 0.0};
    Matrix b = Matrix::Zero(p, L);
    const double tail = static_cast<double>(s1) / static_cast<double>(s0);
    for (int l = 0; l < L; ++l) {
        for (int j = 0; j < 7; ++j) b(j, l) = head[j];
        if (paired_signs && l % 2 == 1) {
            b.col(l).segment(7, s0) = -b.col(l - 1).segment(7, s0);
            continue;
        }
        for (int j = 0; j < s0; ++j) {
            double w = 1.0;
            if (nega_have) w = rng.uniform() < 0.5 ? 1.0 : -1.0;
            b(7 + j, l) = w * tail;
        }
    }
    return b;
}

inline ScenarioData gen_setting_low(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    if (!spec.low_dimensional()) throw BadSpec("gen_setting_low: not a low-dimensional setting");

    ScenarioData out;
    const Matrix b = setting_low_coefficients(spec.p);
    const Vector beta_star =
        ((b.col(0) + b.col(1) + b.col(2)) / 3.0 + Vector::Constant(spec.p, spec.u)).eval();

    for (int l = 0; l < spec.L; ++l) {
        auto [mu, sigma] = gen_covariance(SiteKind::source, spec.p, rng);
        out.sources.push_back(
            detail::draw_site(mu, sigma, b.col(l), spec.sigma2_p, spec.n_source, l + 1, rng));
    }

    auto [mu_q, sigma_q] = gen_covariance(SiteKind::target, spec.p, rng);
    out.target = detail::draw_site(mu_q, sigma_q, beta_star, spec.sigma2_q, spec.n, 0, rng);
    {
        const Eigen::LLT<Matrix> llt(sigma_q);
        out.target_pool =
            Dataset::unlabeled(mvnormal_rows(spec.n_pool, mu_q, Matrix(llt.matrixL()), rng), 0);
    }

    Vector beta_valid = beta_star;
    if (spec.setting_id == "3") {
        const Vector g = rng.dirichlet_uniform(spec.L);
        beta_valid = 0.5 * beta_star + 0.5 * (b * g);
        out.truth.valid_mixture = g;
    }
    out.validation = detail::draw_site(mu_q, sigma_q, beta_valid, spec.sigma2_q, spec.n_valid, 0, rng);

    out.truth.beta_star = beta_star;
    out.truth.b_matrix = CoefficientMatrix{b, false};
    out.truth.beta_star_valid = beta_valid;
    out.truth.alpha_true = population_alpha(beta_star, b, ar_covariance(spec.p, 0.7));
    return out;
}

inline ScenarioData gen_setting_high(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    if (!spec.high_dimensional()) throw BadSpec("gen_setting_high: not a high-dimensional setting");

    ScenarioData out;
    Matrix b(spec.p, spec.L);
    Vector beta_star = Vector::Zero(spec.p);

    if (spec.setting_id == "5") {
        b = setting5_coefficients(spec.p, spec.L, spec.s0, spec.s1, spec.nega_have, false, rng);
        const double head[7] = {0.3, 0.1, 0.5, -0.2, -0.7, 0.0, 0.0};
        for (int j = 0; j < 7; ++j) beta_star[j] = head[j];
    } else {
        beta_star.head(50).setConstant(0.2);
        for (int l = 0; l < spec.L; ++l) {
            const bool adversarial = l < spec.L_adv;
            Vector col = Vector::Zero(spec.p);
            if (adversarial) {
                col.head(spec.p_adv).setConstant(-0.2);
                col.segment(spec.p_adv, 50 - spec.p_adv).setConstant(0.2);
                for (int j = 0; j < spec.p; ++j) col[j] += rng.normal(0.0, 0.1);
                out.truth.adversarial_sources.push_back(l);
            } else {
                col = beta_star;
                for (int j = 0; j < spec.p; ++j) col[j] += rng.normal(0.0, std::sqrt(0.1));
            }
            b.col(l) = col;
        }
    }

    for (int l = 0; l < spec.L; ++l) {
        auto [mu, sigma] = gen_covariance(SiteKind::source, spec.p, rng);
        out.sources.push_back(
            detail::draw_site(mu, sigma, b.col(l), spec.sigma2_p, spec.n_source, l + 1, rng));
    }

    auto [mu_q, sigma_q] = gen_covariance(SiteKind::target, spec.p, rng);
    out.target = detail::draw_site(mu_q, sigma_q, beta_star, spec.sigma2_q, spec.n, 0, rng);
    {
        const Eigen::LLT<Matrix> llt(sigma_q);
        out.target_pool =
            Dataset::unlabeled(mvnormal_rows(spec.n_pool, mu_q, Matrix(llt.matrixL()), rng), 0);
    }
    out.validation = detail::draw_site(mu_q, sigma_q, beta_star, spec.sigma2_q, spec.n_valid, 0, rng);

    out.truth.beta_star = beta_star;
    out.truth.b_matrix = CoefficientMatrix{b, false};
    out.truth.beta_star_valid = beta_star;
    out.truth.alpha_true = population_alpha(beta_star, b, ar_covariance(spec.p, 0.7));
    return out;
}

inline ScenarioData gen_scenario(const ScenarioSpec& spec, Rng& rng) {
    return spec.low_dimensional() ? gen_setting_low(spec, rng) : gen_setting_high(spec, rng);
}

} // namespace transdro
