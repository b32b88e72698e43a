#include "oracles.hpp"
#include "test_support.hpp"

using namespace transdro;

namespace {

LassoConfig fixed(double lambda, bool standardize = true) {
    LassoConfig cfg;
    cfg.lambda = lambda;
    cfg.standardize = standardize;
    return cfg;
}

} // namespace

TEST_CASE("lasso: zero response forces the zero fit") {
    Rng rng(10);
    Matrix x = support::random_matrix(40, 6, rng);
    const Dataset d = Dataset::labeled(x, Vector::Zero(40), 0);
    const LassoFit fit = lasso_fit(d, fixed(0.3));
    REQUIRE(fit.beta.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("lasso: orthonormal design matches soft-thresholding") {
    Rng rng(11);
    const Eigen::Index n = 24;
    Matrix x = support::orthonormal_design(n, rng); // X'X/n = I
    Vector beta_true = Vector::Zero(n);
    beta_true[0] = 1.5;
    beta_true[3] = -0.7;
    beta_true[10] = 0.05;
    Vector y = x * beta_true;
    const Dataset d = Dataset::labeled(x, y, 0);
    const double lambda = 0.2;
    const LassoFit fit = lasso_fit(d, fixed(lambda, false));
    const Vector z = x.transpose() * y / static_cast<double>(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double expect = detail::soft_threshold(z[j], lambda / 2.0);
        REQUIRE_THAT(fit.beta[j], Catch::Matchers::WithinAbs(expect, 1e-6));
    }
}

TEST_CASE("lasso: lambda 0 with full-rank tall design recovers least squares") {
    Rng rng(12);
    Matrix x = support::random_matrix(60, 8, rng);
    Vector y = x * support::random_vector(8, rng) + 0.1 * support::random_vector(60, rng);
    const Dataset d = Dataset::labeled(x, y, 0);
    const Vector expect = oracle::ols(x, y);
    const LassoFit fit = lasso_fit(d, fixed(0.0, false));
    REQUIRE((fit.beta - expect).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("lasso: standardized lambda-0 fit matches intercept least squares") {
    Rng rng(13);
    Matrix x = support::random_matrix(80, 5, rng);
    x.rowwise() += Vector::Constant(5, 2.0).transpose(); // nonzero means
    Vector y = x * support::random_vector(5, rng) + Vector::Constant(80, 3.0) +
               0.05 * support::random_vector(80, rng);
    const Dataset d = Dataset::labeled(x, y, 0);
    Matrix xi(80, 6);
    xi.col(0).setOnes();
    xi.rightCols(5) = x;
    const Vector full = oracle::ols(xi, y);
    const LassoFit fit = lasso_fit(d, fixed(0.0, true));
    REQUIRE((fit.beta - full.tail(5)).lpNorm<Eigen::Infinity>() < 1e-6);
    REQUIRE_THAT(fit.intercept, Catch::Matchers::WithinAbs(full[0], 1e-6));
}

TEST_CASE("lasso_cv: pure noise shrinks hard relative to least squares") {
    Rng rng(14);
    Matrix x = support::random_matrix(400, 10, rng);
    Vector y = support::random_vector(400, rng);
    const Dataset d = Dataset::labeled(x, y, 0);
    const LassoFit fit = lasso_cv(d, LassoConfig{});
    const Vector ls = oracle::ols(x, y);
    REQUIRE(fit.beta.lpNorm<1>() < ls.lpNorm<1>() / 10.0);
}

TEST_CASE("lasso_cv: noiseless signal is fit to near machine accuracy") {
    Rng rng(15);
    Matrix x = support::random_matrix(300, 20, rng);
    Vector beta_true = Vector::Zero(20);
    beta_true.head(5) << 1.0, -2.0, 0.5, 0.0, 3.0;
    Vector y = x * beta_true;
    const Dataset d = Dataset::labeled(x, y, 0);
    const LassoFit fit = lasso_cv(d, LassoConfig{});
    const double mse = (y - x * fit.beta - Vector::Constant(300, fit.intercept)).squaredNorm() / 300.0;
    const double var_y = (y.array() - y.mean()).square().sum() / 300.0;
    REQUIRE(mse < 1e-3 * var_y);
}

TEST_CASE("lasso_cv: a row-duplicated dataset chooses the same lambda") {
    Rng rng(16);
    const Eigen::Index n = 200; // divisible by the fold count
    Matrix x = support::random_matrix(n, 7, rng);
    Vector beta_true = Vector::Zero(7);
    beta_true[1] = 1.0;
    Vector y = x * beta_true + 0.5 * support::random_vector(n, rng);
    const Dataset d = Dataset::labeled(x, y, 0);
    Matrix x2(2 * n, 7);
    x2 << x, x;
    Vector y2(2 * n);
    y2 << y, y;
    const Dataset dd = Dataset::labeled(x2, y2, 0);
    const LassoFit f1 = lasso_cv(d, LassoConfig{});
    const LassoFit f2 = lasso_cv(dd, LassoConfig{});
    REQUIRE(f1.lambda == f2.lambda);
}

TEST_CASE("lasso_cv: errors on too few rows") {
    Rng rng(17);
    const Dataset d = support::gaussian_dataset(3, Vector::Zero(2), 1.0, rng);
    REQUIRE_THROWS_AS(lasso_cv(d, LassoConfig{}), TooFewRows);
}

TEST_CASE("lasso property: stationarity conditions hold at the fit") {
    Rng rng(18);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 50 + 10 * trial;
        const Eigen::Index p = 4 + trial;
        Matrix x = support::random_matrix(n, p, rng);
        Vector y = x * support::random_vector(p, rng, 0.5) + 0.3 * support::random_vector(n, rng);
        const Dataset d = Dataset::labeled(x, y, 0);
        LassoConfig cfg = fixed(0.05 + 0.1 * trial, trial % 2 == 0);
        const LassoFit fit = lasso_fit(d, cfg);
        REQUIRE(kkt_violation(d, cfg, fit) <= 10.0 * cfg.tol);
    }
}

TEST_CASE("lasso property: objective trace is non-increasing") {
    Rng rng(19);
    Matrix x = support::random_matrix(70, 12, rng);
    Vector y = x * support::random_vector(12, rng) + support::random_vector(70, rng);
    const Dataset d = Dataset::labeled(x, y, 0);
    const LassoFit fit = lasso_fit(d, fixed(0.1));
    REQUIRE(fit.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
        REQUIRE(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-12);
}

TEST_CASE("lasso property: scaling y and lambda by c scales the fit by c") {
    Rng rng(20);
    Matrix x = support::random_matrix(60, 6, rng);
    Vector y = x * support::random_vector(6, rng) + 0.2 * support::random_vector(60, rng);
    const double c = 3.7, lambda = 0.15;
    const LassoFit f1 = lasso_fit(Dataset::labeled(x, y, 0), fixed(lambda));
    const LassoFit f2 = lasso_fit(Dataset::labeled(x, (c * y).eval(), 0), fixed(c * lambda));
    REQUIRE((f2.beta - c * f1.beta).lpNorm<Eigen::Infinity>() < 1e-7);
}
