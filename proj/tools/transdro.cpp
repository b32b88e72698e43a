// Command-line front end: fit on CSV data, run simulation benchmarks, dump
// scenario datasets. Exit codes: 2 bad input/CSV, 3 dimension mismatch,
// 4 solver failure.

#include "transdro/transdro.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace transdro;

namespace {

int resolve_threads(int flag_value) {
    if (const char* env = std::getenv("TRANSDRO_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (...) {
            throw BadSpec("TRANSDRO_THREADS is not an integer");
        }
    }
    if (flag_value > 0) return flag_value;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

double parse_tau(const std::string& s) {
    if (s == "inf" || s == "Inf" || s == "INF") return kInfTau;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || v < 0.0) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw BadSpec("--tau expects a nonnegative real or 'inf', got '" + s + "'");
    }
}

BaselineKind parse_baseline(const std::string& s) {
    if (s == "zero") return BaselineKind::zero;
    if (s == "target") return BaselineKind::target_lasso;
    if (s == "convex") return BaselineKind::convex_combo;
    if (s == "bounded") return BaselineKind::bounded_combo;
    throw BadSpec("--baseline expects zero|target|convex|bounded, got '" + s + "'");
}

struct FitArgs {
    std::string target_path;
    std::vector<std::string> source_paths;
    std::string unlabeled_path;
    std::string tau = "";
    std::string baseline = "convex";
    std::string out = "fit.json";
    std::string format = "json";
    std::uint64_t seed = 0;
    std::optional<double> lambda;
    bool maximin = false;
};

int cmd_fit(const FitArgs& args) {
    const Dataset target = read_labeled_csv(args.target_path, 0);
    std::vector<Dataset> sources;
    for (std::size_t i = 0; i < args.source_paths.size(); ++i)
        sources.push_back(read_labeled_csv(args.source_paths[i], static_cast<int>(i) + 1));
    std::optional<Dataset> pool;
    if (!args.unlabeled_path.empty()) pool = read_unlabeled_csv(args.unlabeled_path, 0);

    FitConfig cfg;
    cfg.seed = args.seed;
    cfg.baseline = parse_baseline(args.baseline);
    cfg.tau = args.tau.empty() ? 1.0 / static_cast<double>(target.rows()) : parse_tau(args.tau);
    cfg.augment_target = !args.maximin;
    if (args.maximin) cfg.tau = kInfTau;
    if (args.lambda) cfg.lasso.lambda = args.lambda;

    const FitReport report = fit_transdro(target, sources, cfg, pool ? &*pool : nullptr);

    if (args.format == "csv")
        write_fit_report_csv(args.out, report);
    else
        write_fit_report_json(args.out, report);

    std::cout << "baseline: " << baseline_name(report.baseline) << "\n";
    const Eigen::Index k = report.gamma.w.size();
    for (Eigen::Index i = 0; i < k; ++i) {
        const bool has_target = report.b0_hat.augmented;
        std::string site = has_target ? (i == 0 ? "target" : "source_" + std::to_string(i))
                                      : "source_" + std::to_string(i + 1);
        std::cout << "gamma[" << site << "] = " << report.gamma.w[i] << "\n";
    }
    if (std::isfinite(report.sigma2_hat))
        std::cout << "sigma2_hat = " << report.sigma2_hat << " (target " << report.sigma2_q
                  << ", source " << report.sigma2_source << ")\n";
    std::cout << "objective = " << report.diagnostics.objective << "\n";
    std::cout << "report written to " << args.out << "\n";
    return 0;
}

struct SimulateArgs {
    std::string setting;
    int reps = 50;
    std::uint64_t seed = 0;
    std::string profile = "desk";
    std::string out = "bench";
    std::string methods;
    std::string tau;
    int threads = 0;
    // optional overrides; negative sentinel = keep the setting default
    int n = -1, n_source = -1, n_pool = -1, n_valid = -1, p_adv = -1, l_adv = -1, s1 = -1;
    double u = std::numeric_limits<double>::quiet_NaN();
    double sigma2_q = std::numeric_limits<double>::quiet_NaN();
    bool nega_have = false;
};

ScenarioSpec resolve_spec(const SimulateArgs& a) {
    Profile prof;
    if (a.profile == "desk")
        prof = Profile::desk;
    else if (a.profile == "paper")
        prof = Profile::paper;
    else
        throw BadSpec("--profile expects desk|paper");
    ScenarioSpec spec = ScenarioSpec::for_setting(a.setting, prof);
    spec.seed = a.seed;
    if (a.n > 0) spec.n = a.n;
    if (a.n_source > 0) spec.n_source = a.n_source;
    if (a.n_pool >= 0) spec.n_pool = a.n_pool;
    if (a.n_valid > 0) spec.n_valid = a.n_valid;
    if (a.p_adv >= 0) spec.p_adv = a.p_adv;
    if (a.l_adv >= 0) spec.L_adv = a.l_adv;
    if (a.s1 >= 0) spec.s1 = a.s1;
    if (!std::isnan(a.u)) spec.u = a.u;
    if (!std::isnan(a.sigma2_q)) spec.sigma2_q = a.sigma2_q;
    if (a.nega_have) spec.nega_have = true;
    if (!a.tau.empty()) spec.tau = parse_tau(a.tau);
    spec.validate();
    return spec;
}

int cmd_simulate(const SimulateArgs& args) {
    const ScenarioSpec spec = resolve_spec(args);
    std::vector<std::string> methods = default_methods();
    if (!args.methods.empty()) {
        methods.clear();
        std::stringstream ss(args.methods);
        std::string m;
        while (std::getline(ss, m, ','))
            if (!m.empty()) methods.push_back(m);
        if (methods.empty()) throw BadSpec("--methods produced an empty list");
    }

    const MetricTable table =
        run_benchmark(spec, methods, args.reps, args.seed, resolve_threads(args.threads));

    fs::create_directories(args.out);
    {
        std::ofstream os(fs::path(args.out) / "scenario.json");
        os << scenario_spec_json(spec).dump(2) << '\n';
    }
    {
        std::ofstream os(fs::path(args.out) / "summary.csv");
        table.write_summary_csv(os);
    }
    {
        std::ofstream os(fs::path(args.out) / "replications.csv");
        table.write_long_csv(os);
    }

    for (const auto& m : methods)
        std::cout << m << ": pred_mse " << table.mean(m, "pred_mse") << " (sd "
                  << table.sd(m, "pred_mse") << "), excess_risk " << table.mean(m, "excess_risk")
                  << "\n";
    std::cout << "tables written to " << args.out << "\n";
    return 0;
}

struct GenArgs {
    std::string setting;
    std::uint64_t seed = 0;
    std::string profile = "desk";
    std::string out = "data";
};

int cmd_gen(const GenArgs& args) {
    ScenarioSpec spec = ScenarioSpec::for_setting(
        args.setting, args.profile == "paper" ? Profile::paper : Profile::desk);
    spec.seed = args.seed;
    Rng rng(args.seed);
    const ScenarioData data = gen_scenario(spec, rng);

    fs::create_directories(args.out);
    const fs::path out(args.out);
    for (std::size_t l = 0; l < data.sources.size(); ++l)
        write_dataset_csv((out / ("source_" + std::to_string(l + 1) + ".csv")).string(),
                          data.sources[l]);
    write_dataset_csv((out / "target.csv").string(), data.target);
    write_dataset_csv((out / "target_pool.csv").string(), data.target_pool);
    write_dataset_csv((out / "validation.csv").string(), data.validation);
    {
        std::ofstream os(out / "truth.json");
        os << ground_truth_json(data.truth).dump(2) << '\n';
        if (!os) throw CsvError((out / "truth.json").string() + ": write failed");
    }
    {
        std::ofstream os(out / "scenario.json");
        os << scenario_spec_json(spec).dump(2) << '\n';
    }
    std::cout << "datasets written to " << args.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TransDRO: distributionally robust transfer learning for linear models"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit the estimator on CSV data");
    fit->add_option("--target", fit_args.target_path, "labeled target CSV (y,x1,...,xp)")
        ->required();
    fit->add_option("--source", fit_args.source_paths, "labeled source CSV, repeatable")
        ->required();
    fit->add_option("--unlabeled", fit_args.unlabeled_path, "unlabeled target covariate CSV");
    fit->add_option("--tau", fit_args.tau, "uncertainty budget, nonnegative real or 'inf' "
                                           "(default 1/n)");
    fit->add_option("--baseline", fit_args.baseline, "zero|target|convex|bounded");
    fit->add_option("--seed", fit_args.seed, "split seed");
    fit->add_option("--out", fit_args.out, "report path");
    fit->add_option("--format", fit_args.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    fit->add_option("--lambda", fit_args.lambda, "fixed lasso penalty (default: 5-fold CV)");
    fit->add_flag("--maximin", fit_args.maximin,
                  "source-only weights with tau=inf (zero-baseline maximin)");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "run a seeded benchmark scenario");
    sim->add_option("--setting", sim_args.setting, "1.1|1.2|1.3|2|3|4.1|4.2|5")->required();
    sim->add_option("--reps", sim_args.reps, "replications");
    sim->add_option("--seed", sim_args.seed, "base seed");
    sim->add_option("--profile", sim_args.profile, "desk|paper");
    sim->add_option("--out", sim_args.out, "output directory");
    sim->add_option("--methods", sim_args.methods,
                    "comma list; default transdro_zero,transdro_convex,transdro_bounded,"
                    "target_lasso,comb_source,maximin; external:<csv> allowed");
    sim->add_option("--threads", sim_args.threads, "worker threads (TRANSDRO_THREADS overrides)");
    sim->add_option("--n", sim_args.n, "labeled target rows");
    sim->add_option("--n-source", sim_args.n_source, "rows per source");
    sim->add_option("--n-pool", sim_args.n_pool, "unlabeled target rows");
    sim->add_option("--n-valid", sim_args.n_valid, "validation rows");
    sim->add_option("--u", sim_args.u, "target-hull distance (settings 1.x)");
    sim->add_option("--tau", sim_args.tau, "uncertainty budget or 'inf'");
    sim->add_option("--sigma2-q", sim_args.sigma2_q, "target noise variance");
    sim->add_option("--p-adv", sim_args.p_adv, "adversarial coordinates (setting 4)");
    sim->add_option("--l-adv", sim_args.l_adv, "adversarial sites (setting 4)");
    sim->add_option("--s1", sim_args.s1, "tail l1 level (setting 5)");
    sim->add_flag("--nega-have", sim_args.nega_have, "two-point tail signs (setting 5)");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "dump scenario datasets to CSV");
    gen->add_option("--setting", gen_args.setting, "scenario id")->required();
    gen->add_option("--seed", gen_args.seed, "seed");
    gen->add_option("--profile", gen_args.profile, "desk|paper");
    gen->add_option("--out", gen_args.out, "output directory")->required();

    try {
        app.parse(argc, argv);
        if (fit->parsed()) return cmd_fit(fit_args);
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (gen->parsed()) return cmd_gen(gen_args);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BadSpec& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TooFewLabels& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TooFewRows& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
