#include "misscov/errors.hpp"
#include "misscov/harness.hpp"
#include "misscov/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace misscov;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.preset = "separated";
    c.trials_per_class = std::vector<int>{15, 15};
    c.seed = 5;
    return c;
}

TrialSet subset(const LabeledDataset& d, const std::vector<std::size_t>& idx) {
    TrialSet out;
    for (std::size_t i : idx) {
        out.trials.push_back(d.trials[i]);
        out.labels.push_back(d.labels[i]);
    }
    return out;
}

std::map<std::pair<std::string, double>, double> mean_by_cell(const ResultsTable& t) {
    std::map<std::pair<std::string, double>, double> out;
    for (const auto& s : t.summarize()) out[{s.pipeline, s.missing_ratio}] = s.mean_accuracy;
    return out;
}

}  // namespace

TEST(StratifiedKfold, BalancedTenItems) {
    const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const auto folds = stratified_kfold(labels, 5, 3);
    ASSERT_EQ(folds.size(), 5u);
    for (const auto& f : folds) {
        ASSERT_EQ(f.test.size(), 2u);
        EXPECT_NE(labels[f.test[0]], labels[f.test[1]]);
    }
}

TEST(StratifiedKfold, PartitionsTheIndexSet) {
    std::vector<int> labels;
    for (int i = 0; i < 37; ++i) labels.push_back(i % 3 == 0 ? 2 : i % 2);
    const auto folds = stratified_kfold(labels, 4, 9);
    std::multiset<std::size_t> seen;
    for (const auto& f : folds) {
        seen.insert(f.test.begin(), f.test.end());
        EXPECT_EQ(f.train.size() + f.test.size(), labels.size());
        std::set<std::size_t> train(f.train.begin(), f.train.end());
        for (std::size_t i : f.test) EXPECT_EQ(train.count(i), 0u);
    }
    EXPECT_EQ(seen.size(), labels.size());
    EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), labels.size());
}

TEST(StratifiedKfold, PerClassCountsDifferByAtMostOne) {
    std::vector<int> labels(6, 0);
    labels.insert(labels.end(), 9, 1);
    const auto folds = stratified_kfold(labels, 3, 1);
    for (const auto& f : folds) {
        int c0 = 0, c1 = 0;
        for (std::size_t i : f.test) (labels[i] == 0 ? c0 : c1)++;
        EXPECT_EQ(c0, 2);
        EXPECT_EQ(c1, 3);
    }
}

TEST(StratifiedKfold, DeterministicAndValidated) {
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(i % 2);
    const auto a = stratified_kfold(labels, 5, 17);
    const auto b = stratified_kfold(labels, 5, 17);
    for (std::size_t f = 0; f < a.size(); ++f) EXPECT_EQ(a[f].test, b[f].test);
    const std::vector<int> small{0, 0, 1, 1, 1};
    EXPECT_THROW(stratified_kfold(small, 3, 0), StratificationError);
    EXPECT_THROW(stratified_kfold(labels, 1, 0), StratificationError);
}

TEST(Applicability, TableOfScenarios) {
    EXPECT_FALSE(is_applicable(Pipeline::knn_scm, ScenarioKind::electrode_popping));
    EXPECT_FALSE(is_applicable(Pipeline::masked_scm, ScenarioKind::eye_blinking));
    EXPECT_TRUE(is_applicable(Pipeline::em_scm, ScenarioKind::electrode_popping));
    EXPECT_TRUE(is_applicable(Pipeline::em_scm, ScenarioKind::eye_blinking));
    EXPECT_TRUE(is_applicable(Pipeline::knn_scm, ScenarioKind::eye_blinking));
    EXPECT_TRUE(is_applicable(Pipeline::masked_scm, ScenarioKind::electrode_popping));
    EXPECT_THROW(check_applicable(Pipeline::masked_scm, ScenarioKind::eye_blinking), ApplicabilityError);
    EXPECT_THROW(check_applicable(Pipeline::knn_scm, ScenarioKind::electrode_popping), ApplicabilityError);
}

TEST(RunPipeline, BaselineSaturatesOnSeparatedPreset) {
    const LabeledDataset d = make_complete_dataset(synthetic_preset("separated", 1));
    const auto folds = stratified_kfold(d.labels, 5, 2);
    const FoldOutcome out = run_pipeline(Pipeline::scm_complete, ScenarioKind::none, subset(d, folds[0].train),
                                         subset(d, folds[0].test), d.classes, {});
    EXPECT_GE(out.accuracy, 0.95);
}

TEST(RunPipeline, EmOnCompleteDataMatchesScmPredictions) {
    SyntheticSpec spec = synthetic_preset("separated", 3);
    spec.trials_per_class = {20, 20};
    spec.separation = 0.05;
    const LabeledDataset d = make_complete_dataset(spec);
    const auto folds = stratified_kfold(d.labels, 4, 4);
    for (const auto& f : folds) {
        const FoldOutcome scm_out =
            run_pipeline(Pipeline::scm_complete, ScenarioKind::none, subset(d, f.train), subset(d, f.test), 2, {});
        const FoldOutcome em_out =
            run_pipeline(Pipeline::em_scm, ScenarioKind::none, subset(d, f.train), subset(d, f.test), 2, {});
        EXPECT_EQ(scm_out.predictions, em_out.predictions);
        EXPECT_EQ(scm_out.accuracy, em_out.accuracy);
    }
}

TEST(RunPipeline, RejectsInapplicableCombinations) {
    const TrialSet empty;
    EXPECT_THROW(run_pipeline(Pipeline::masked_scm, ScenarioKind::eye_blinking, empty, empty, 2, {}),
                 ApplicabilityError);
    EXPECT_THROW(run_pipeline(Pipeline::knn_scm, ScenarioKind::electrode_popping, empty, empty, 2, {}),
                 ApplicabilityError);
}

TEST(RunPipeline, ModelsUseTrainingFoldOnly) {
    SyntheticSpec spec = synthetic_preset("separated", 6);
    spec.trials_per_class = {10, 10};
    const LabeledDataset base = make_complete_dataset(spec);
    const LabeledDataset d = apply_scenario(
        base, default_scenario(ScenarioKind::eye_blinking, spec.p, spec.n, spec.sampling_rate, 0.5, 7));
    const auto folds = stratified_kfold(d.labels, 5, 8);
    for (Pipeline p : {Pipeline::knn_scm, Pipeline::em_scm}) {
        const TrialSet train = subset(d, folds[1].train);
        const FoldOutcome out = run_pipeline(p, ScenarioKind::eye_blinking, train, subset(d, folds[1].test), 2, {});
        EXPECT_EQ(out.diagnostics.fit_items, train.trials.size());
        if (p == Pipeline::knn_scm) {
            EXPECT_EQ(out.diagnostics.pool_candidates, train.trials.size() * static_cast<std::size_t>(spec.n));
        }
    }
}

TEST(RunPipeline, MaskedRejectsPartialChannels) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 4);
    x(1, 2) = std::nan("");
    const std::vector<Trial> trials{Trial::from_nan(x)};
    EXPECT_THROW(compute_features(Pipeline::masked_scm, trials, nullptr, {}), ApplicabilityError);
}

TEST(RunBenchmark, RatioZeroMatchesBaseline) {
    ExperimentConfig c = small_config();
    c.ratios = {0.0};
    const ResultsTable t = run_benchmark(c);
    EXPECT_TRUE(t.errors.empty());
    std::map<int, double> baseline;
    for (const auto& r : t.rows) {
        if (r.pipeline == "scm_complete") baseline[r.fold] = r.accuracy;
    }
    for (const auto& r : t.rows) EXPECT_EQ(r.accuracy, baseline.at(r.fold)) << r.pipeline;
}

TEST(RunBenchmark, RowCount) {
    ExperimentConfig c = small_config();
    c.ratios = {0.0, 0.25, 0.5, 0.75, 1.0};
    c.pipelines = {Pipeline::masked_scm, Pipeline::em_scm};
    const ResultsTable t = run_benchmark(c);
    EXPECT_EQ(t.rows.size(), 2u * 5u * 5u);
    std::set<std::tuple<std::string, double, int>> keys;
    for (const auto& r : t.rows) {
        keys.insert({r.pipeline, r.missing_ratio, r.fold});
        EXPECT_GE(r.accuracy, 0.0);
        EXPECT_LE(r.accuracy, 1.0);
        EXPECT_TRUE(std::isnan(r.wall_time_ms));
    }
    EXPECT_EQ(keys.size(), t.rows.size());
}

TEST(RunBenchmark, ByteIdenticalAcrossRunsAndThreadCounts) {
    ExperimentConfig c = small_config();
    c.scenario = ScenarioKind::eye_blinking;
    c.ratios = {0.0, 0.5, 1.0};
    const fs::path dir = fs::temp_directory_path() / "misscov_harness_det";
    fs::remove_all(dir);
    write_results(run_benchmark(c), dir / "a.csv");
    c.estimator.threads = 3;
    write_results(run_benchmark(c), dir / "b.csv");
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(RunBenchmark, CellFailuresAreRecordedAndRunContinues) {
    ExperimentConfig c = small_config();
    c.scenario = ScenarioKind::eye_blinking;
    c.ratios = {0.5};
    c.estimator.knn_k = 1000000;
    const ResultsTable t = run_benchmark(c);
    ASSERT_EQ(t.errors.size(), 5u);
    for (const auto& e : t.errors) {
        EXPECT_EQ(e.pipeline, "knn_scm");
        EXPECT_EQ(e.kind, "pool_exhausted");
    }
    std::size_t ok = 0;
    for (const auto& r : t.rows) ok += std::isnan(r.accuracy) ? 0 : 1;
    EXPECT_EQ(ok, 10u);
}

TEST(RunBenchmark, StressResponseOnSeparatedPreset) {
    for (ScenarioKind kind : {ScenarioKind::electrode_popping, ScenarioKind::eye_blinking}) {
        ExperimentConfig c;
        c.seed = 1;
        c.scenario = kind;
        c.ratios = {0.0, 1.0};
        if (kind == ScenarioKind::eye_blinking) c.pipelines = {Pipeline::scm_complete, Pipeline::em_scm};
        const auto means = mean_by_cell(run_benchmark(c));
        for (Pipeline p : c.effective_pipelines()) {
            EXPECT_LE(means.at({to_string(p), 1.0}), means.at({to_string(p), 0.0}) + 0.02) << to_string(p);
        }
    }
}

TEST(Summary, MeanAndSampleStd) {
    ResultsTable t;
    for (int f = 0; f < 4; ++f) t.rows.push_back({"none", "em_scm", 0.0, f, 0.5 + 0.1 * f, std::nan("")});
    t.rows.push_back({"none", "knn_scm", 0.0, 0, std::nan(""), std::nan("")});
    const auto s = t.summarize();
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(s[0].mean_accuracy, 0.65, 1e-15);
    EXPECT_NEAR(s[0].std_accuracy, std::sqrt(0.05 / 3.0), 1e-15);
    EXPECT_EQ(s[0].folds, 4);
    EXPECT_TRUE(std::isnan(s[1].mean_accuracy));
    EXPECT_EQ(s[1].folds, 0);
}

TEST(Config, JsonRoundTripAndOverrides) {
    const nlohmann::json j = nlohmann::json::parse(R"({
        "dataset": {"preset": "p300", "separation": 0.3},
        "scenario": {"kind": "s2", "groups": [[0, 1]], "windows": [[3, 9]]},
        "pipelines": ["em_scm", "knn_scm"],
        "ratios": [0, 0.5],
        "folds": 3,
        "seed": 99,
        "seeds": {"folds": 4},
        "estimator": {"em_tol": 1e-7, "knn_k": 3},
        "threads": 2
    })");
    const ExperimentConfig c = config_from_json(j);
    EXPECT_EQ(c.preset, "p300");
    EXPECT_EQ(*c.separation, 0.3);
    EXPECT_EQ(c.scenario, ScenarioKind::eye_blinking);
    EXPECT_EQ(c.windows->front().end, 9);
    EXPECT_EQ(c.pipelines.size(), 2u);
    EXPECT_EQ(c.folds, 3);
    EXPECT_EQ(c.effective_fold_seed(), 4u);
    EXPECT_NE(c.effective_data_seed(), c.effective_scenario_seed());
    EXPECT_EQ(c.estimator.em.tol, 1e-7);
    EXPECT_EQ(c.estimator.knn_k, 3);
    EXPECT_EQ(c.estimator.threads, 2);
    EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));
}

TEST(Config, Validation) {
    ExperimentConfig c;
    c.folds = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.ratios = {0.5, 0.2};
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.ratios = {0.0, 1.5};
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.scenario = ScenarioKind::eye_blinking;
    c.pipelines = {Pipeline::masked_scm};
    EXPECT_THROW(c.validate(), ApplicabilityError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"folds": 5, "bogus": 1})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"pipelines": ["svm"]})")), ConfigError);
    c = ExperimentConfig{};
    c.scenario = ScenarioKind::electrode_popping;
    const auto eff = c.effective_pipelines();
    EXPECT_EQ(std::count(eff.begin(), eff.end(), Pipeline::knn_scm), 0);
}
