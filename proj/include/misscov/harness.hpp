#pragma once

// Benchmark harness: four covariance pipelines feeding the MDRM classifier,
// evaluated with stratified K-fold cross-validation over a sweep of
// incomplete-trial ratios.

#include "misscov/covariance.hpp"
#include "misscov/dataset.hpp"
#include "misscov/imputation.hpp"
#include "misscov/mdrm.hpp"
#include "misscov/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace misscov {

enum class Pipeline { scm_complete, knn_scm, masked_scm, em_scm };

std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& text);
std::vector<Pipeline> all_pipelines();

// Applicability per missingness scenario: KNN imputation cannot recover a
// channel lost for a whole trial, and masked means cannot represent entries
// missing for part of a trial only.
bool is_applicable(Pipeline pipeline, ScenarioKind scenario);
// Throws ApplicabilityError for inapplicable combinations.
void check_applicable(Pipeline pipeline, ScenarioKind scenario);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Per class, a seeded shuffle dealt round-robin across folds (continuing the
// rotation between classes). Throws StratificationError if a class has fewer
// than k members.
std::vector<Fold> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

struct EstimatorOptions {
    EMOptions em{};
    int knn_k = 5;
    RidgePolicy ridge{};
    MdrmOptions mdrm{};
    // 0 = hardware concurrency
    int threads = 1;
};

struct TrialSet {
    std::vector<Trial> trials;
    std::vector<int> labels;
};

// What a fold's model was built from, for leakage checks.
struct PipelineDiagnostics {
    std::size_t pool_candidates = 0;  // KNN pool columns
    std::size_t fit_items = 0;        // covariances entering the class means
};

struct FoldOutcome {
    double accuracy = 0.0;
    std::vector<int> predictions;
    PipelineDiagnostics diagnostics;
};

// Covariance features of one pipeline. masks is empty except for masked_scm.
struct Features {
    std::vector<SPDMatrix> covs;
    std::vector<Mask> masks;
};

// Estimates features for `trials`. knn_scm requires `pool`; masked_scm rejects
// trials with channels missing over part of the trial only.
Features compute_features(Pipeline pipeline, std::span<const Trial> trials, const NeighborPool* pool,
                          const EstimatorOptions& opts);

// Fits class means on the training features and predicts the test features.
FoldOutcome classify(Pipeline pipeline, const Features& train, std::span<const int> train_labels,
                     const Features& test, std::span<const int> test_labels, int classes,
                     const EstimatorOptions& opts);

// Estimation, fit and prediction for one train/test split. For scm_complete
// the caller passes the complete copies of the trials.
FoldOutcome run_pipeline(Pipeline pipeline, ScenarioKind scenario, const TrialSet& train, const TrialSet& test,
                         int classes, const EstimatorOptions& opts);

struct ExperimentConfig {
    std::string preset = "separated";
    std::optional<std::filesystem::path> dataset_path;
    // Overrides of the preset, applied when set.
    std::optional<double> separation;
    std::optional<std::vector<int>> trials_per_class;

    ScenarioKind scenario = ScenarioKind::electrode_popping;
    std::optional<int> dropped_channels;
    std::optional<std::vector<std::vector<Eigen::Index>>> groups;
    std::optional<std::vector<Window>> windows;

    // Empty selects every pipeline applicable to the scenario.
    std::vector<Pipeline> pipelines;
    std::vector<double> ratios{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int folds = 5;

    std::uint64_t seed = 0;
    std::optional<std::uint64_t> data_seed;
    std::optional<std::uint64_t> scenario_seed;
    std::optional<std::uint64_t> fold_seed;

    EstimatorOptions estimator{};
    bool record_wall_time = false;
    std::optional<std::filesystem::path> output_dir;

    // folds >= 2, ratios sorted inside [0, 1], pipelines applicable.
    void validate() const;
    std::vector<Pipeline> effective_pipelines() const;
    std::uint64_t effective_data_seed() const;
    std::uint64_t effective_scenario_seed() const;
    std::uint64_t effective_fold_seed() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ResultRow {
    std::string scenario;
    std::string pipeline;
    double missing_ratio = 0.0;
    int fold = 0;
    double accuracy = 0.0;      // NaN when the cell failed
    double wall_time_ms = 0.0;  // NaN when not recorded
};

struct CellError {
    std::string scenario;
    std::string pipeline;
    double missing_ratio = 0.0;
    int fold = 0;
    std::string kind;
    std::string message;
};

struct SummaryRow {
    std::string scenario;
    std::string pipeline;
    double missing_ratio = 0.0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation over folds
    int folds = 0;              // folds that produced an accuracy
};

struct ResultsTable {
    std::vector<ResultRow> rows;
    std::vector<CellError> errors;

    // Sorts rows and errors by (scenario, pipeline, ratio, fold).
    void canonicalize();
    std::vector<SummaryRow> summarize() const;
};

// Full sweep. Per-cell failures are recorded in `errors`; the run continues.
// `progress`, when set, receives one line per finished (ratio, pipeline) cell.
ResultsTable run_benchmark(const ExperimentConfig& config,
                           const std::function<void(const std::string&)>& progress = {});

// results.csv: scenario,pipeline,missing_ratio,fold,accuracy,wall_time_ms
void write_results(const ResultsTable& table, const std::filesystem::path& path);
ResultsTable read_results(const std::filesystem::path& path);
// scenario,pipeline,missing_ratio,mean_accuracy,std_accuracy,folds
void write_summary(std::span<const SummaryRow> rows, const std::filesystem::path& path);
// scenario,pipeline,missing_ratio,fold,kind,message
void write_errors(std::span<const CellError> errors, const std::filesystem::path& path);

}  // namespace misscov
