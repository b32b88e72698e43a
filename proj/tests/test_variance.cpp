#include "oracles.hpp"
#include "test_support.hpp"

using namespace transdro;

namespace {

CoefficientMatrix fit_sources(const std::vector<Dataset>& sources, const LassoConfig& cfg = {}) {
    Matrix cols(sources.front().cols(), static_cast<Eigen::Index>(sources.size()));
    for (std::size_t l = 0; l < sources.size(); ++l)
        cols.col(static_cast<Eigen::Index>(l)) = lasso_fit(sources[l], cfg).beta;
    return CoefficientMatrix{std::move(cols), false};
}

} // namespace

TEST_CASE("sigma2_target: noiseless target in a recoverable regime is near zero") {
    Rng rng(40);
    Vector beta = Vector::Zero(10);
    beta.head(3) << 1.0, -0.5, 2.0;
    const Dataset target = support::gaussian_dataset(400, beta, 0.0, rng);
    const SplitPlan plan = make_split(target, 1);
    const auto [s2, beta_s1] = sigma2_target(target, plan, LassoConfig{});
    REQUIRE(s2 < 0.01);
}

TEST_CASE("sigma2_target: a huge penalty reduces to the mean of squared labels") {
    Rng rng(41);
    const Dataset target = support::gaussian_dataset(50, Vector::Constant(4, 0.5), 1.0, rng);
    const SplitPlan plan = make_split(target, 2);
    LassoConfig cfg;
    cfg.lambda = 1e9;
    cfg.standardize = false; // keep the raw plug-in form
    const auto [s2, beta_s1] = sigma2_target(target, plan, cfg);
    REQUIRE(beta_s1.lpNorm<Eigen::Infinity>() == 0.0);
    const Dataset s2half = target.subset(plan.indices_s2);
    REQUIRE_THAT(s2, Catch::Matchers::WithinRel(s2half.y.squaredNorm() / s2half.rows(), 1e-12));
}

TEST_CASE("sigma2_target: Monte Carlo coverage of the setting-1.1 noise level") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 600;
    int hits = 0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(777, static_cast<std::uint64_t>(r));
        const ScenarioData data = gen_scenario(spec, rng);
        const SplitPlan plan = make_split(data.target, mix_seed(777, static_cast<std::uint64_t>(r)));
        const auto [s2, b] = sigma2_target(data.target, plan, LassoConfig{});
        if (s2 >= 0.7 && s2 <= 1.4) ++hits;
    }
    REQUIRE(hits >= 90);
}

TEST_CASE("sigma2_source: a single source gets the whole weight") {
    Rng rng(42);
    Vector beta = Vector::Zero(6);
    beta[0] = 1.0;
    const Dataset src = support::gaussian_dataset(300, beta, 0.3, rng, 1);
    const Dataset target = support::gaussian_dataset(60, beta, 0.3, rng, 0);
    const SplitPlan plan = make_split(target, 3);
    const CoefficientMatrix b_hat = fit_sources({src});
    const auto [s2, gamma] = sigma2_source(target, plan, b_hat);
    REQUIRE(gamma.w.size() == 1);
    REQUIRE_THAT(gamma.w[0], Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("sigma2_source: noiseless target drawn from source 2 picks that vertex") {
    Rng rng(43);
    Vector b1 = Vector::Zero(8), b2 = Vector::Zero(8);
    b1.head(2) << 1.0, 1.0;
    b2.tail(2) << -1.0, 2.0;
    const Dataset s1 = support::gaussian_dataset(500, b1, 0.0, rng, 1);
    const Dataset s2d = support::gaussian_dataset(500, b2, 0.0, rng, 2);
    const Dataset target = support::gaussian_dataset(120, b2, 0.0, rng, 0);
    const SplitPlan plan = make_split(target, 4);
    const CoefficientMatrix b_hat = fit_sources({s1, s2d});
    const auto [s2, gamma] = sigma2_source(target, plan, b_hat);
    REQUIRE(gamma.w[1] > 0.98);
    REQUIRE(s2 < 1e-3);

    // the weight problem itself should match a fine grid on the s1 half
    const Dataset half = target.subset(plan.indices_s1);
    const auto grid = oracle::lattice_min_simplex(
        oracle::QuadForm::least_squares(half.x * b_hat.columns, half.y), 2, 1000);
    const double solver_obj =
        (half.y - half.x * (b_hat.columns * gamma.w)).squaredNorm() / half.rows();
    REQUIRE(solver_obj <= grid.objective + 1e-5);
}

TEST_CASE("sigma2_source: far-off target concentrates near alpha plus sigma2") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.3");
    spec.u = 0.55;
    spec.n = 600;
    Rng rng = Rng::stream(4040, 0);
    const ScenarioData data = gen_scenario(spec, rng);
    const SplitPlan plan = make_split(data.target, 5);
    const CoefficientMatrix b_hat = fit_sources(data.sources);
    const auto [s2_src, gamma] = sigma2_source(data.target, plan, b_hat);
    const auto [s2_q, beta_s1] = sigma2_target(data.target, plan, LassoConfig{});
    REQUIRE(s2_src > s2_q);
    const double expect = data.truth.alpha_true + spec.sigma2_q;
    REQUIRE(s2_src > 0.5 * expect);
    REQUIRE(s2_src < 1.5 * expect);
}

TEST_CASE("sigma2_combined takes the minimum") {
    REQUIRE(sigma2_combined(1.2, 0.9) == 0.9);
    REQUIRE(sigma2_combined(0.9, 1.2) == 0.9);
    REQUIRE(sigma2_combined(0.42, 0.42) == 0.42);
    REQUIRE_THROWS_AS(sigma2_combined(-0.1, 1.0), BadSpec);
}

TEST_CASE("sigma2_target: swapping the split halves shows no systematic bias") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 200;
    const int reps = 40;
    double m1 = 0.0, m2 = 0.0, ss1 = 0.0;
    std::vector<double> a(reps), b(reps);
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(888, static_cast<std::uint64_t>(r));
        const ScenarioData data = gen_scenario(spec, rng);
        const SplitPlan plan = make_split(data.target, static_cast<std::uint64_t>(r));
        a[static_cast<std::size_t>(r)] = sigma2_target(data.target, plan, LassoConfig{}).first;
        b[static_cast<std::size_t>(r)] =
            sigma2_target(data.target, plan.swapped(), LassoConfig{}).first;
        m1 += a[static_cast<std::size_t>(r)];
        m2 += b[static_cast<std::size_t>(r)];
    }
    m1 /= reps;
    m2 /= reps;
    for (double v : a) ss1 += (v - m1) * (v - m1);
    const double se = std::sqrt(ss1 / (reps - 1)) / std::sqrt(static_cast<double>(reps));
    REQUIRE(std::abs(m1 - m2) <= 4.0 * se + 0.05);
}

TEST_CASE("sigma2 guards: degenerate evaluation split is refused") {
    Rng rng(44);
    const Dataset target = support::gaussian_dataset(30, Vector::Zero(3), 1.0, rng);
    SplitPlan plan = make_split(target, 6);
    plan.indices_s2.resize(1);
    REQUIRE_THROWS_AS(sigma2_target(target, plan, LassoConfig{}), TooFewLabels);
}
