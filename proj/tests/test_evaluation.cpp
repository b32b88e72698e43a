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

TEST_CASE("comb_source: one source takes all the weight") {
    Rng rng(100);
    Vector beta = Vector::Zero(5);
    beta[1] = 1.0;
    const Dataset src = support::gaussian_dataset(400, beta, 0.2, rng, 1);
    const Dataset target = support::gaussian_dataset(80, beta, 0.2, rng, 0);
    const CoefficientMatrix b_hat = fit_sources({src});
    const auto [fit, gamma] = comb_source(target, b_hat);
    REQUIRE_THAT(gamma.w[0], Catch::Matchers::WithinAbs(1.0, 1e-9));
    REQUIRE((fit - b_hat.columns.col(0)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("comb_source: noiseless source-2 target picks that vertex, matching the grid") {
    Rng rng(101);
    Vector b1 = Vector::Zero(7), b2 = Vector::Zero(7), b3 = Vector::Zero(7);
    b1[0] = 1.0;
    b2[3] = -1.5;
    b3[5] = 0.8;
    std::vector<Dataset> sources = {support::gaussian_dataset(900, b1, 0.0, rng, 1),
                                    support::gaussian_dataset(900, b2, 0.0, rng, 2),
                                    support::gaussian_dataset(900, b3, 0.0, rng, 3)};
    const Dataset target = support::gaussian_dataset(150, b2, 0.0, rng, 0);
    const CoefficientMatrix b_hat = fit_sources(sources);
    const auto [fit, gamma] = comb_source(target, b_hat);
    REQUIRE(gamma.w[1] > 0.98);

    const auto grid = oracle::lattice_min_simplex(
        oracle::QuadForm::least_squares(target.x * b_hat.columns, target.y), 3, 1000);
    const double obj = (target.y - target.x * fit).squaredNorm() / target.rows();
    REQUIRE(obj <= grid.objective + 1e-5);
}

TEST_CASE("evaluate: exact coefficients on noiseless validation score zero") {
    Rng rng(102);
    Vector beta = support::random_vector(6, rng);
    const Dataset validation = support::gaussian_dataset(100, beta, 0.0, rng);
    GroundTruth truth;
    truth.beta_star = beta;
    truth.beta_star_valid = beta;
    const Metrics m = evaluate(beta, validation, &truth);
    REQUIRE(m.pred_mse < 1e-20);
    REQUIRE(m.excess_risk < 1e-20);
    REQUIRE(m.coef_err == 0.0);
}

TEST_CASE("evaluate: noisy validation has mse near sigma2 and excess risk near zero") {
    Rng rng(103);
    Vector beta = support::random_vector(5, rng);
    GroundTruth truth;
    truth.beta_star = beta;
    truth.beta_star_valid = beta;
    double mse_acc = 0.0, excess_acc = 0.0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const Dataset validation = support::gaussian_dataset(125, beta, 1.0, rng);
        const Metrics m = evaluate(beta, validation, &truth);
        mse_acc += m.pred_mse;
        excess_acc += m.excess_risk;
    }
    REQUIRE_THAT(mse_acc / reps, Catch::Matchers::WithinRel(1.0, 0.1));
    REQUIRE(excess_acc / reps < 0.1);
}

TEST_CASE("evaluate: the zero fit scores sigma2 plus the signal energy") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 20;
    spec.n_source = 30;
    spec.n_pool = 10;
    spec.n_valid = 4000;
    Rng rng(104);
    const ScenarioData data = gen_scenario(spec, rng);
    const Metrics m =
        evaluate(Vector::Zero(spec.p), data.validation, &data.truth);
    const Matrix sigma_q = ar_covariance(spec.p, 0.7);
    const double expect = spec.sigma2_q + data.truth.beta_star.dot(sigma_q * data.truth.beta_star);
    REQUIRE_THAT(m.pred_mse, Catch::Matchers::WithinRel(expect, 0.15));
    REQUIRE_THROWS_AS(evaluate(Vector::Zero(3), data.validation, &data.truth), DimensionMismatch);
}

TEST_CASE("run_benchmark: fixed seed reproduces the table exactly") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 60;
    spec.n_source = 120;
    spec.n_pool = 40;
    spec.n_valid = 50;
    const std::vector<std::string> methods = {"transdro_convex", "target_lasso", "comb_source"};
    const MetricTable t1 = run_benchmark(spec, methods, 2, 31, 1);
    const MetricTable t2 = run_benchmark(spec, methods, 2, 31, 2);
    REQUIRE(t1.rows.size() == t2.rows.size());
    for (std::size_t i = 0; i < t1.rows.size(); ++i) {
        REQUIRE(t1.rows[i].method == t2.rows[i].method);
        REQUIRE(t1.rows[i].metrics.pred_mse == t2.rows[i].metrics.pred_mse);
        REQUIRE(t1.rows[i].metrics.excess_risk == t2.rows[i].metrics.excess_risk);
    }
}

TEST_CASE("run_benchmark: setting 1.1 orderings and the target weight band") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 80;
    const std::vector<std::string> methods = {"transdro_convex", "target_lasso", "comb_source"};
    const MetricTable table = run_benchmark(spec, methods, 50, 12345, 2);
    for (const auto& r : table.rows) REQUIRE(r.error.empty());
    // with scarce labels the target-only lasso trails the source combination
    REQUIRE(table.mean("target_lasso", "excess_risk") > table.mean("comb_source", "excess_risk"));
    // the weight the robust fit puts on the target stays small but nonzero
    const Vector gamma = table.mean_weights("transdro_convex");
    REQUIRE(gamma[0] >= 0.02);
    REQUIRE(gamma[0] <= 0.2);
}

TEST_CASE("MetricTable: summary statistics are recomputable from the rows") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 60;
    spec.n_source = 150;
    spec.n_pool = 40;
    spec.n_valid = 60;
    const std::vector<std::string> methods = {"target_lasso", "comb_source"};
    const MetricTable table = run_benchmark(spec, methods, 6, 99, 2);
    for (const auto& method : methods) {
        double acc = 0.0;
        int c = 0;
        for (const auto& r : table.rows)
            if (r.method == method && r.error.empty()) {
                acc += r.metrics.pred_mse;
                ++c;
            }
        REQUIRE(c == 6);
        REQUIRE_THAT(table.mean(method, "pred_mse"), Catch::Matchers::WithinRel(acc / c, 1e-12));
        double ss = 0.0;
        for (const auto& r : table.rows)
            if (r.method == method && r.error.empty()) {
                const double d = r.metrics.pred_mse - acc / c;
                ss += d * d;
            }
        REQUIRE_THAT(table.sd(method, "pred_mse"),
                     Catch::Matchers::WithinRel(std::sqrt(ss / (c - 1)), 1e-12));
    }
}

TEST_CASE("maximin ignores target labels beyond the covariate pool") {
    Rng rng(105);
    Vector b1 = Vector::Zero(6), b2 = Vector::Zero(6);
    b1[0] = 1.0;
    b2[2] = -1.0;
    std::vector<Dataset> sources = {support::gaussian_dataset(300, b1, 0.4, rng, 1),
                                    support::gaussian_dataset(300, b2, 0.4, rng, 2)};
    Dataset target = support::gaussian_dataset(50, b1, 1.0, rng, 0);

    FitConfig cfg;
    cfg.baseline = BaselineKind::zero;
    cfg.tau = kInfTau;
    cfg.augment_target = false;
    cfg.seed = 2;
    const FitReport a = fit_transdro(target, sources, cfg);

    // reverse the labels; the weights must not move
    Dataset permuted = target;
    permuted.y.reverseInPlace();
    const FitReport b = fit_transdro(permuted, sources, cfg);
    REQUIRE(a.gamma.w == b.gamma.w);
}

TEST_CASE("run_benchmark: external comparator and failing methods record rows") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 40;
    spec.n_source = 60;
    spec.n_pool = 20;
    spec.n_valid = 30;
    const std::string good = "external_coef_test.csv";
    const std::string bad = "external_coef_short.csv";
    write_coefficient_csv(good, Vector::Zero(35));
    write_coefficient_csv(bad, Vector::Zero(5)); // wrong length: fails per rep
    const MetricTable table =
        run_benchmark(spec, {"target_lasso", "external:" + good, "external:" + bad}, 2, 7, 1);
    int ok_external = 0, failed = 0, ok_lasso = 0;
    for (const auto& r : table.rows) {
        if (r.method == "external:" + good && r.error.empty()) ++ok_external;
        if (r.method == "external:" + bad && !r.error.empty()) ++failed;
        if (r.method == "target_lasso" && r.error.empty()) ++ok_lasso;
    }
    REQUIRE(ok_external == 2);
    REQUIRE(failed == 2); // recorded, without aborting the other methods
    REQUIRE(ok_lasso == 2);
    std::remove(good.c_str());
    std::remove(bad.c_str());
}

TEST_CASE("run_benchmark: a missing external file fails the whole run upfront") {
    ScenarioSpec spec = ScenarioSpec::for_setting("1.1");
    spec.n = 40;
    spec.n_source = 60;
    REQUIRE_THROWS_AS(run_benchmark(spec, {"external:no_such.csv"}, 1, 1, 1), CsvError);
}
