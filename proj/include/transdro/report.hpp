#pragma once

#include "transdro/csv.hpp"
#include "transdro/simulation.hpp"

#include <json.hpp>

namespace transdro {

namespace detail {

inline nlohmann::json vector_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vector vector_from_json(const nlohmann::json& a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

} // namespace detail

inline nlohmann::json fit_report_json(const FitReport& r) {
    nlohmann::json j;
    j["beta"] = detail::vector_json(r.beta);
    j["gamma"] = detail::vector_json(r.gamma.w);
    j["baseline"] = baseline_name(r.baseline);
    j["baseline_beta"] = detail::vector_json(r.baseline_beta);
    j["baseline_gamma"] = detail::vector_json(r.baseline_gamma);
    j["tau"] = std::isfinite(r.tau) ? nlohmann::json(r.tau) : nlohmann::json("inf");
    j["sigma2_hat"] = r.sigma2_hat;
    j["sigma2_q"] = r.sigma2_q;
    j["sigma2_source"] = r.sigma2_source;
    j["diagnostics"] = {
        {"pg_iterations", r.diagnostics.pg_iterations},
        {"bisections", r.diagnostics.bisections},
        {"mu", r.diagnostics.mu},
        {"objective", r.diagnostics.objective},
        {"constraint_slack", std::isfinite(r.diagnostics.constraint_slack)
                                 ? nlohmann::json(r.diagnostics.constraint_slack)
                                 : nlohmann::json("inf")},
        {"stationarity", r.diagnostics.stationarity},
        {"degenerate", r.diagnostics.degenerate},
    };
    return j;
}

inline void write_fit_report_json(const std::string& path, const FitReport& r) {
    std::ofstream out(path);
    if (!out) throw CsvError(path + ": cannot open file for writing");
    out << fit_report_json(r).dump(2) << '\n';
}

/// Flat key,index,value table for spreadsheet-side use.
inline void write_fit_report_csv(const std::string& path, const FitReport& r) {
    std::ofstream out(path);
    if (!out) throw CsvError(path + ": cannot open file for writing");
    out << "key,index,value\n";
    auto vec = [&](const char* key, const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            out << key << ',' << i << ',' << format_g17(v[i]) << '\n';
    };
    auto scalar = [&](const char* key, double v) { out << key << ",," << format_g17(v) << '\n'; };
    vec("beta", r.beta);
    vec("gamma", r.gamma.w);
    vec("baseline_beta", r.baseline_beta);
    vec("baseline_gamma", r.baseline_gamma);
    scalar("tau", r.tau);
    scalar("sigma2_hat", r.sigma2_hat);
    scalar("sigma2_q", r.sigma2_q);
    scalar("sigma2_source", r.sigma2_source);
    scalar("objective", r.diagnostics.objective);
    scalar("constraint_slack", r.diagnostics.constraint_slack);
    scalar("mu", r.diagnostics.mu);
}

inline nlohmann::json scenario_spec_json(const ScenarioSpec& s) {
    return nlohmann::json{
        {"setting_id", s.setting_id}, {"p", s.p},
        {"L", s.L},                   {"n", s.n},
        {"n_source", s.n_source},     {"n_valid", s.n_valid},
        {"n_pool", s.n_pool},         {"u", s.u},
        {"tau", s.resolved_tau()},    {"sigma2_q", s.sigma2_q},
        {"sigma2_p", s.sigma2_p},     {"p_adv", s.p_adv},
        {"L_adv", s.L_adv},           {"s0", s.s0},
        {"s1", s.s1},                 {"nega_have", s.nega_have},
        {"seed", s.seed},
    };
}

inline nlohmann::json ground_truth_json(const GroundTruth& t) {
    nlohmann::json cols = nlohmann::json::array();
    for (Eigen::Index l = 0; l < t.b_matrix.count(); ++l)
        cols.push_back(detail::vector_json(t.b_matrix.columns.col(l)));
    return nlohmann::json{
        {"beta_star", detail::vector_json(t.beta_star)},
        {"b_matrix", cols},
        {"beta_star_valid", detail::vector_json(t.beta_star_valid)},
        {"alpha_true", t.alpha_true},
        {"adversarial_sources", t.adversarial_sources},
    };
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    GroundTruth t;
    t.beta_star = detail::vector_from_json(j.at("beta_star"));
    t.beta_star_valid = detail::vector_from_json(j.at("beta_star_valid"));
    t.alpha_true = j.at("alpha_true").get<double>();
    const auto& cols = j.at("b_matrix");
    if (!cols.empty()) {
        Matrix b(static_cast<Eigen::Index>(cols[0].size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t l = 0; l < cols.size(); ++l)
            b.col(static_cast<Eigen::Index>(l)) = detail::vector_from_json(cols[l]);
        t.b_matrix = CoefficientMatrix{std::move(b), false};
    }
    if (j.contains("adversarial_sources"))
        t.adversarial_sources = j.at("adversarial_sources").get<std::vector<int>>();
    return t;
}

} // namespace transdro
