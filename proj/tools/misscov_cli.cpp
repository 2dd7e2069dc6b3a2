// misscov: simulate datasets, estimate covariances and run the cross-validated
// benchmark over incomplete-trial ratios.
//
// Exit codes: 0 success, 1 some benchmark cell failed, 2 usage or config
// error, 3 input or runtime error.

#include "misscov/covariance.hpp"
#include "misscov/errors.hpp"
#include "misscov/harness.hpp"
#include "misscov/io.hpp"
#include "misscov/simulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace misscov;

namespace {

constexpr int kExitCellFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path, 0, e.byte, e.what());
    }
}

std::vector<double> parse_ratio_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("invalid ratio '" + item + "'");
        }
    }
    return out;
}

std::vector<Pipeline> parse_pipeline_list(const std::string& text) {
    std::vector<Pipeline> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_pipeline(item));
    return out;
}

void write_matrix(const Eigen::MatrixXd& m, const std::string& out) {
    if (!out.empty()) {
        write_matrix_csv(m, out);
        return;
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << (j ? "," : "") << format_double(m(i, j));
        std::cout << '\n';
    }
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string preset = "separated";
    std::uint64_t seed = 0;
    std::string out;
    std::string scenario = "none";
    double ratio = 0.0;
    std::optional<double> separation;
    std::optional<std::uint64_t> scenario_seed;
};

int run_simulate(const SimulateArgs& a) {
    SyntheticSpec spec = synthetic_preset(a.preset, a.seed);
    if (a.separation) spec.separation = *a.separation;
    LabeledDataset d = make_complete_dataset(spec);
    const ScenarioKind kind = parse_scenario_kind(a.scenario);
    if (kind != ScenarioKind::none) {
        const std::uint64_t sseed = a.scenario_seed.value_or(derive_seed(a.seed, 102, 0));
        d = apply_scenario(d, default_scenario(kind, d.channels(), d.samples(), d.sampling_rate, a.ratio, sseed));
    }
    write_dataset(d, a.out);
    std::cerr << "wrote " << d.size() << " trials (" << d.channels() << "x" << d.samples() << ") to " << a.out << '\n';
    return 0;
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
    std::string trial;
    std::string method = "em";
    std::string out;
    double tol = 1e-6;
    int max_iter = 100;
};

int run_estimate(const EstimateArgs& a) {
    const Trial t = read_trial_csv(fs::path(a.trial));
    if (a.method == "scm") {
        write_matrix(scm(t).matrix(), a.out);
    } else if (a.method == "em") {
        EMOptions opts;
        opts.tol = a.tol;
        opts.max_iter = a.max_iter;
        const EMResult r = em_covariance(t, opts);
        std::cerr << "em: " << r.iterations << " iterations, " << (r.converged ? "converged" : "not converged") << '\n';
        write_matrix(r.sigma.matrix(), a.out);
    } else if (a.method == "masked") {
        // SCM of the channels observed throughout the trial.
        std::vector<Eigen::Index> kept;
        for (Eigen::Index c = 0; c < t.channels(); ++c) {
            if (t.channel_fully_observed(c)) kept.push_back(c);
        }
        if (kept.empty()) throw EmptyMaskError("no channel is observed throughout the trial");
        std::cerr << "masked: kept channels";
        for (Eigen::Index c : kept) std::cerr << ' ' << c;
        std::cerr << '\n';
        write_matrix(scm(Eigen::MatrixXd(t.values()(kept, Eigen::all))).matrix(), a.out);
    } else {
        throw ConfigError("unknown method '" + a.method + "' (expected scm, em, masked)");
    }
    return 0;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string preset;
    std::string dataset;
    std::string scenario;
    std::string ratios;
    std::string pipelines;
    std::optional<int> folds;
    std::optional<int> threads;
    bool wall_time = false;
};

int run_bench(const BenchArgs& a) {
    ExperimentConfig c = a.config.empty() ? ExperimentConfig{} : config_from_json(load_json(a.config));
    c.seed = a.seed;
    if (!a.preset.empty()) c.preset = a.preset;
    if (!a.dataset.empty()) c.dataset_path = a.dataset;
    if (!a.scenario.empty()) c.scenario = parse_scenario_kind(a.scenario);
    if (!a.ratios.empty()) c.ratios = parse_ratio_list(a.ratios);
    if (!a.pipelines.empty()) c.pipelines = parse_pipeline_list(a.pipelines);
    if (a.folds) c.folds = *a.folds;
    if (a.threads) c.estimator.threads = *a.threads;
    if (a.wall_time) c.record_wall_time = true;
    if (!a.out.empty()) c.output_dir = a.out;
    const fs::path out = c.output_dir.value_or("results");

    const ResultsTable table = run_benchmark(c, [](const std::string& line) { std::cerr << line << '\n'; });
    write_results(table, out / "results.csv");
    write_summary(table.summarize(), out / "summary.csv");
    write_errors(table.errors, out / "errors.csv");
    {
        std::ofstream cfg(out / "config.json", std::ios::binary);
        cfg << config_to_json(c).dump(2) << '\n';
    }

    for (const auto& e : table.errors) {
        std::cerr << "warning: " << e.pipeline << " ratio=" << format_double(e.missing_ratio) << " fold=" << e.fold
                  << ": [" << e.kind << "] " << e.message << '\n';
    }
    std::cerr << table.rows.size() << " rows, " << table.errors.size() << " failed cells; results in " << out.string()
              << '\n';
    return table.errors.empty() ? 0 : kExitCellFailed;
}

// --- report -----------------------------------------------------------------

int run_report(const std::string& results, const std::string& out) {
    const ResultsTable table = read_results(results);
    const auto summary = table.summarize();
    if (!out.empty()) {
        write_summary(summary, out);
        return 0;
    }
    std::cout << "scenario,pipeline,missing_ratio,mean_accuracy,std_accuracy,folds\n";
    for (const auto& s : summary) {
        std::cout << s.scenario << ',' << s.pipeline << ',' << format_double(s.missing_ratio) << ','
                  << (std::isnan(s.mean_accuracy) ? "NA" : format_double(s.mean_accuracy)) << ','
                  << (std::isnan(s.std_accuracy) ? "NA" : format_double(s.std_accuracy)) << ',' << s.folds << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariance estimation and MDRM classification with missing data"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset directory");
    simulate->add_option("--preset", sim.preset, "Synthetic preset")->check(CLI::IsMember(preset_names()));
    simulate->add_option("--seed", sim.seed, "Master seed")->required();
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_option("--scenario", sim.scenario, "none, s1 (electrode popping) or s2 (eye blinking)");
    simulate->add_option("--ratio", sim.ratio, "Fraction of affected trials")->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--separation", sim.separation, "Override the class separation");
    simulate->add_option("--scenario-seed", sim.scenario_seed, "Seed for the missingness injection");

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate the covariance of one trial CSV");
    estimate->add_option("--trial", est.trial, "Trial CSV (rows = channels, NaN = missing)")
        ->required()
        ->check(CLI::ExistingFile);
    estimate->add_option("--method", est.method, "scm, em or masked")
        ->check(CLI::IsMember({"scm", "em", "masked"}));
    estimate->add_option("--out", est.out, "Output CSV (stdout when omitted)");
    estimate->add_option("--tol", est.tol, "EM relative tolerance");
    estimate->add_option("--max-iter", est.max_iter, "EM iteration cap");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run the cross-validated benchmark");
    bench_cmd->add_option("--config", bench.config, "JSON config file")->check(CLI::ExistingFile);
    bench_cmd->add_option("--seed", bench.seed, "Master seed")->required();
    bench_cmd->add_option("--out", bench.out, "Output directory");
    bench_cmd->add_option("--preset", bench.preset, "Synthetic preset");
    bench_cmd->add_option("--dataset", bench.dataset, "Dataset directory instead of a preset");
    bench_cmd->add_option("--scenario", bench.scenario, "none, s1 or s2");
    bench_cmd->add_option("--ratios", bench.ratios, "Comma-separated ratio sweep");
    bench_cmd->add_option("--pipelines", bench.pipelines, "Comma-separated pipelines");
    bench_cmd->add_option("--folds", bench.folds, "Number of folds");
    bench_cmd->add_option("--threads", bench.threads, "Worker threads (0 = all cores)");
    bench_cmd->add_flag("--wall-time", bench.wall_time, "Record wall time (makes output run-dependent)");

    std::string results;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Aggregate a results CSV to mean and std per cell");
    report->add_option("--results", results, "results.csv")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Output CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return run_simulate(sim);
        if (*estimate) return run_estimate(est);
        if (*bench_cmd) return run_bench(bench);
        if (*report) return run_report(results, report_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ApplicabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
