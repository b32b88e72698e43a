#pragma once

#include "transdro/csv.hpp"
#include "transdro/simulation.hpp"

#include <atomic>
#include <map>
#include <ostream>
#include <thread>

namespace transdro {

/// Best convex combination of source coefficients on the full labeled target.
inline std::pair<Vector, SimplexWeight> comb_source(const Dataset& target,
                                                    const CoefficientMatrix& b_hat,
                                                    const SolverConfig& cfg = {}) {
    if (b_hat.augmented) throw BadSpec("comb_source: expects the unaugmented source matrix");
    if (!target.is_labeled()) throw TooFewLabels("comb_source: target has no labels");
    if (b_hat.p() != target.cols())
        throw DimensionMismatch("comb_source: coefficient length does not match target");
    const auto sol = simplex_least_squares(target.x * b_hat.columns, target.y, cfg);
    SimplexWeight gamma{sol.x, CandidateSet::convex};
    return {b_hat.columns * gamma.w, gamma};
}

struct Metrics {
    double pred_mse = std::numeric_limits<double>::quiet_NaN();
    double excess_risk = std::numeric_limits<double>::quiet_NaN();
    double coef_err = std::numeric_limits<double>::quiet_NaN();
};

/// Scores a coefficient vector on validation data: prediction MSE always;
/// excess risk (against the empirical validation second moment) and l2
/// coefficient error when the ground truth is known.
inline Metrics evaluate(const Vector& beta_hat, const Dataset& validation,
                        const GroundTruth* truth = nullptr) {
    if (beta_hat.size() != validation.cols())
        throw DimensionMismatch("evaluate: coefficient length does not match validation data");
    Metrics m;
    const Eigen::Index n = validation.rows();
    m.pred_mse = (validation.y - validation.x * beta_hat).squaredNorm() / static_cast<double>(n);
    if (truth) {
        const Vector d = beta_hat - truth->beta_star_valid;
        const Matrix second_moment =
            (validation.x.transpose() * validation.x) / static_cast<double>(n);
        m.excess_risk = d.dot(second_moment * d);
        m.coef_err = d.norm();
    }
    return m;
}

struct MetricRow {
    std::string method;
    int rep = 0;
    Metrics metrics;
    Vector gamma;          // site weights where the method has them
    Vector baseline_gamma; // weighted-baseline weights where applicable
    double objective = std::numeric_limits<double>::quiet_NaN();
    double sigma2_hat = std::numeric_limits<double>::quiet_NaN();
    std::string error; // non-empty marks a failed replication for this method
};

struct MetricTable {
    std::vector<std::string> methods;
    int reps = 0;
    std::vector<MetricRow> rows; // rep-major, method order within each rep

    std::vector<const MetricRow*> rows_for(const std::string& method) const {
        std::vector<const MetricRow*> out;
        for (const auto& r : rows)
            if (r.method == method && r.error.empty()) out.push_back(&r);
        return out;
    }

    static double metric_value(const MetricRow& r, const std::string& name) {
        if (name == "pred_mse") return r.metrics.pred_mse;
        if (name == "excess_risk") return r.metrics.excess_risk;
        if (name == "coef_err") return r.metrics.coef_err;
        if (name == "objective") return r.objective;
        if (name == "sigma2_hat") return r.sigma2_hat;
        throw BadSpec("unknown metric '" + name + "'");
    }

    double mean(const std::string& method, const std::string& metric) const {
        const auto sel = rows_for(method);
        double s = 0.0;
        int c = 0;
        for (const auto* r : sel) {
            const double v = metric_value(*r, metric);
            if (std::isfinite(v)) {
                s += v;
                ++c;
            }
        }
        return c > 0 ? s / c : std::numeric_limits<double>::quiet_NaN();
    }

    double sd(const std::string& method, const std::string& metric) const {
        const auto sel = rows_for(method);
        const double m = mean(method, metric);
        double s = 0.0;
        int c = 0;
        for (const auto* r : sel) {
            const double v = metric_value(*r, metric);
            if (std::isfinite(v)) {
                s += (v - m) * (v - m);
                ++c;
            }
        }
        return c > 1 ? std::sqrt(s / (c - 1)) : 0.0;
    }

    Vector mean_weights(const std::string& method, bool baseline = false) const {
        const auto sel = rows_for(method);
        Vector acc;
        int c = 0;
        for (const auto* r : sel) {
            const Vector& w = baseline ? r->baseline_gamma : r->gamma;
            if (w.size() == 0) continue;
            if (acc.size() == 0) acc = Vector::Zero(w.size());
            if (w.size() != acc.size()) continue;
            acc += w;
            ++c;
        }
        if (c > 0) acc /= static_cast<double>(c);
        return acc;
    }

    void write_summary_csv(std::ostream& os) const {
        os << "method,metric,mean,sd,reps\n";
        const char* scalar_metrics[] = {"pred_mse", "excess_risk", "coef_err", "sigma2_hat",
                                        "objective"};
        for (const auto& method : methods) {
            const auto sel = rows_for(method);
            for (const char* metric : scalar_metrics)
                os << method << ',' << metric << ',' << format_g17(mean(method, metric)) << ','
                   << format_g17(sd(method, metric)) << ',' << sel.size() << '\n';
            for (bool baseline : {false, true}) {
                const Vector w = mean_weights(method, baseline);
                for (Eigen::Index i = 0; i < w.size(); ++i)
                    os << method << ',' << (baseline ? "baseline_gamma_" : "gamma_") << i << ','
                       << format_g17(w[i]) << ",," << sel.size() << '\n';
            }
        }
    }

    void write_long_csv(std::ostream& os) const {
        os << "method,rep,metric,value\n";
        for (const auto& r : rows) {
            if (!r.error.empty()) {
                os << r.method << ',' << r.rep << ",error,\"" << r.error << "\"\n";
                continue;
            }
            const char* scalar_metrics[] = {"pred_mse", "excess_risk", "coef_err", "sigma2_hat",
                                            "objective"};
            for (const char* metric : scalar_metrics)
                os << r.method << ',' << r.rep << ',' << metric << ','
                   << format_g17(metric_value(r, metric)) << '\n';
            for (Eigen::Index i = 0; i < r.gamma.size(); ++i)
                os << r.method << ',' << r.rep << ",gamma_" << i << ','
                   << format_g17(r.gamma[i]) << '\n';
            for (Eigen::Index i = 0; i < r.baseline_gamma.size(); ++i)
                os << r.method << ',' << r.rep << ",baseline_gamma_" << i << ','
                   << format_g17(r.baseline_gamma[i]) << '\n';
        }
    }
};

inline const std::vector<std::string>& default_methods() {
    static const std::vector<std::string> m = {"transdro_zero", "transdro_convex",
                                               "transdro_bounded", "target_lasso",
                                               "comb_source",     "maximin"};
    return m;
}

namespace detail {

inline bool needs_sources(const std::string& method) {
    return method != "target_lasso" && method.rfind("external:", 0) != 0;
}

inline MetricRow run_method(const std::string& method, int rep, ScenarioData& data,
                            PipelineParts* parts, double tau,
                            const std::map<std::string, Vector>& external) {
    MetricRow row;
    row.method = method;
    row.rep = rep;
    Vector beta;
    if (method == "transdro_zero" || method == "transdro_convex" || method == "transdro_bounded") {
        const BaselineKind kind = method == "transdro_zero"      ? BaselineKind::zero
                                  : method == "transdro_convex" ? BaselineKind::convex_combo
                                                                : BaselineKind::bounded_combo;
        FitReport fit = fit_from_parts(*parts, kind, tau);
        beta = fit.beta;
        row.gamma = fit.gamma.w;
        row.baseline_gamma = fit.baseline_gamma;
        row.objective = fit.diagnostics.objective;
        row.sigma2_hat = fit.sigma2_hat;
    } else if (method == "maximin") {
        FitReport fit = fit_from_parts(*parts, BaselineKind::zero, kInfTau, false);
        beta = fit.beta;
        row.gamma = fit.gamma.w;
        row.objective = fit.diagnostics.objective;
    } else if (method == "target_lasso") {
        beta = parts ? parts->beta_full() : lasso_fit(data.target, LassoConfig{}).beta;
    } else if (method == "comb_source") {
        auto [b, g] = comb_source(data.target, parts->b_hat, parts->solver_cfg);
        beta = b;
        row.gamma = g.w;
    } else if (method.rfind("external:", 0) == 0) {
        beta = external.at(method);
        if (beta.size() != data.validation.cols())
            throw DimensionMismatch("external coefficients have length " +
                                    std::to_string(beta.size()));
    } else {
        throw BadSpec("unknown method '" + method + "'");
    }
    row.metrics = evaluate(beta, data.validation, &data.truth);
    return row;
}

} // namespace detail

/// Generates reps independent replications of the scenario, fits every
/// requested method on each, and scores them on the validation draw.
/// Replications run in parallel; results are deterministic for a fixed seed
/// regardless of the thread count.
inline MetricTable run_benchmark(const ScenarioSpec& spec, const std::vector<std::string>& methods,
                                 int reps, std::uint64_t seed, int threads = 1) {
    spec.validate();
    if (reps < 1) throw BadSpec("run_benchmark: reps must be positive");

    std::map<std::string, Vector> external;
    for (const auto& m : methods)
        if (m.rfind("external:", 0) == 0)
            external.emplace(m, read_coefficient_csv(m.substr(9)));

    const bool want_parts =
        std::any_of(methods.begin(), methods.end(), [](const auto& m) { return detail::needs_sources(m); });

    std::vector<std::vector<MetricRow>> per_rep(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= reps) return;
            Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rep));
            ScenarioData data = gen_scenario(spec, rng);
            const double tau = spec.resolved_tau();
            std::optional<PipelineParts> parts;
            std::string prep_error;
            if (want_parts) {
                try {
                    parts = prepare_pipeline(data.target, data.sources, LassoConfig{},
                                             SolverConfig{}, mix_seed(seed, static_cast<std::uint64_t>(rep)),
                                             &data.target_pool);
                } catch (const std::exception& e) {
                    prep_error = e.what();
                }
            }
            auto& rows = per_rep[static_cast<std::size_t>(rep)];
            for (const auto& method : methods) {
                try {
                    if (!prep_error.empty() && detail::needs_sources(method))
                        throw std::runtime_error(prep_error);
                    rows.push_back(detail::run_method(method, rep, data,
                                                      parts ? &*parts : nullptr, tau, external));
                } catch (const std::exception& e) {
                    MetricRow row;
                    row.method = method;
                    row.rep = rep;
                    row.error = e.what();
                    rows.push_back(std::move(row));
                }
            }
        }
    };

    const int n_threads = std::max(1, std::min(threads, reps));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    MetricTable table;
    table.methods = methods;
    table.reps = reps;
    for (auto& rows : per_rep)
        for (auto& r : rows) table.rows.push_back(std::move(r));
    return table;
}

} // namespace transdro
