#include "misscov/harness.hpp"

#include "misscov/errors.hpp"
#include "misscov/imputation.hpp"
#include "misscov/io.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace misscov {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::uint64_t kStreamData = 101;
constexpr std::uint64_t kStreamScenario = 102;
constexpr std::uint64_t kStreamFolds = 103;

template <class T>
std::vector<T> gather(std::span<const T> items, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(items[i]);
    return out;
}

Features gather_features(const Features& all, const std::vector<std::size_t>& idx) {
    Features out;
    out.covs = gather<SPDMatrix>(all.covs, idx);
    if (!all.masks.empty()) out.masks = gather<Mask>(all.masks, idx);
    return out;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Channels observed at every sample, or ApplicabilityError if some channel is
// observed only part of the time.
std::vector<Eigen::Index> whole_channels(const Trial& t) {
    std::vector<Eigen::Index> kept;
    for (Eigen::Index c = 0; c < t.channels(); ++c) {
        const auto seen = t.observed().row(c).count();
        if (seen == t.samples()) {
            kept.push_back(c);
        } else if (seen > 0) {
            throw ApplicabilityError("masked_scm: channel " + std::to_string(c) +
                                     " is missing for part of a trial only; masked means need whole-channel loss");
        }
    }
    return kept;
}

}  // namespace

std::string to_string(Pipeline p) {
    switch (p) {
        case Pipeline::scm_complete: return "scm_complete";
        case Pipeline::knn_scm: return "knn_scm";
        case Pipeline::masked_scm: return "masked_scm";
        case Pipeline::em_scm: return "em_scm";
    }
    return "";
}

Pipeline parse_pipeline(const std::string& text) {
    for (Pipeline p : all_pipelines()) {
        if (to_string(p) == text) return p;
    }
    throw ConfigError("unknown pipeline '" + text + "' (expected scm_complete, knn_scm, masked_scm, em_scm)");
}

std::vector<Pipeline> all_pipelines() {
    return {Pipeline::scm_complete, Pipeline::knn_scm, Pipeline::masked_scm, Pipeline::em_scm};
}

bool is_applicable(Pipeline pipeline, ScenarioKind scenario) {
    if (pipeline == Pipeline::knn_scm && scenario == ScenarioKind::electrode_popping) return false;
    if (pipeline == Pipeline::masked_scm && scenario == ScenarioKind::eye_blinking) return false;
    return true;
}

void check_applicable(Pipeline pipeline, ScenarioKind scenario) {
    if (is_applicable(pipeline, scenario)) return;
    const std::string why = pipeline == Pipeline::knn_scm
                                ? "KNN imputation cannot recover channels lost for an entire trial"
                                : "masked means cannot represent channels missing during short windows only";
    throw ApplicabilityError(to_string(pipeline) + " is not applicable to " + to_string(scenario) + ": " + why);
}

std::vector<Fold> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw StratificationError("stratified_kfold: k must be at least 2");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::vector<std::vector<std::size_t>> tests(static_cast<std::size_t>(k));
    std::size_t rotation = 0;
    for (auto& [label, members] : by_class) {
        if (static_cast<int>(members.size()) < k) {
            throw StratificationError("stratified_kfold: class " + std::to_string(label) + " has " +
                                      std::to_string(members.size()) + " members, fewer than k=" + std::to_string(k));
        }
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(label) + 1, 0));
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i : members) {
            tests[rotation % static_cast<std::size_t>(k)].push_back(i);
            ++rotation;
        }
    }

    std::vector<Fold> folds;
    for (auto& test : tests) {
        std::sort(test.begin(), test.end());
        Fold f;
        std::vector<bool> in_test(labels.size(), false);
        for (std::size_t i : test) in_test[i] = true;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!in_test[i]) f.train.push_back(i);
        }
        f.test = std::move(test);
        folds.push_back(std::move(f));
    }
    return folds;
}

Features compute_features(Pipeline pipeline, std::span<const Trial> trials, const NeighborPool* pool,
                          const EstimatorOptions& opts) {
    if (pipeline == Pipeline::knn_scm && pool == nullptr) throw ConfigError("knn_scm features need a neighbour pool");
    std::vector<std::optional<SPDMatrix>> covs(trials.size());
    std::vector<std::optional<Mask>> masks(pipeline == Pipeline::masked_scm ? trials.size() : 0);

    detail::parallel_for(trials.size(), opts.threads, [&](std::size_t i) {
        const Trial& t = trials[i];
        switch (pipeline) {
            case Pipeline::scm_complete:
                covs[i] = scm(t, opts.ridge);
                break;
            case Pipeline::em_scm:
                covs[i] = em_covariance(t, opts.em).sigma;
                break;
            case Pipeline::knn_scm:
                covs[i] = t.is_complete() ? scm(t, opts.ridge) : scm(knn_impute(t, *pool), opts.ridge);
                break;
            case Pipeline::masked_scm: {
                const std::vector<Eigen::Index> kept = whole_channels(t);
                if (kept.empty()) throw EmptyMaskError("masked_scm: trial has no fully observed channel");
                const SPDMatrix reduced = scm(Eigen::MatrixXd(t.values()(kept, Eigen::all)), opts.ridge);
                Eigen::MatrixXd embedded = Eigen::MatrixXd::Identity(t.channels(), t.channels());
                embedded(kept, kept) = reduced.matrix();
                covs[i] = SPDMatrix(embedded);
                masks[i] = Mask(t.channels(), kept);
                break;
            }
        }
    });

    Features out;
    out.covs.reserve(trials.size());
    for (auto& c : covs) out.covs.push_back(std::move(*c));
    for (auto& m : masks) out.masks.push_back(std::move(*m));
    return out;
}

FoldOutcome classify(Pipeline pipeline, const Features& train, std::span<const int> train_labels,
                     const Features& test, std::span<const int> test_labels, int classes,
                     const EstimatorOptions& opts) {
    if (test.covs.size() != test_labels.size()) throw ShapeError("classify: one label per test item is required");
    const bool masked = pipeline == Pipeline::masked_scm;
    LabeledCovDataset data{train.covs, std::vector<int>(train_labels.begin(), train_labels.end()), train.masks,
                           classes};
    const ClassMeans means = mdrm_fit(data, masked, opts.mdrm);

    FoldOutcome out;
    out.diagnostics.fit_items = train.covs.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.covs.size(); ++i) {
        const std::optional<Mask> mask = masked ? std::optional<Mask>(test.masks[i]) : std::nullopt;
        const int label = mdrm_predict(test.covs[i], means, mask).label;
        out.predictions.push_back(label);
        if (label == test_labels[i]) ++correct;
    }
    out.accuracy = test.covs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.covs.size());
    return out;
}

FoldOutcome run_pipeline(Pipeline pipeline, ScenarioKind scenario, const TrialSet& train, const TrialSet& test,
                         int classes, const EstimatorOptions& opts) {
    check_applicable(pipeline, scenario);
    std::optional<NeighborPool> pool;
    if (pipeline == Pipeline::knn_scm) pool.emplace(NeighborPool::from_trials(train.trials, opts.knn_k));
    const NeighborPool* pool_ptr = pool ? &*pool : nullptr;

    const Features train_features = compute_features(pipeline, train.trials, pool_ptr, opts);
    const Features test_features = compute_features(pipeline, test.trials, pool_ptr, opts);
    FoldOutcome out = classify(pipeline, train_features, train.labels, test_features, test.labels, classes, opts);
    if (pool) out.diagnostics.pool_candidates = static_cast<std::size_t>(pool->size());
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
    if (folds < 2) throw ConfigError("config: folds must be at least 2");
    if (ratios.empty()) throw ConfigError("config: empty ratio sweep");
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!(ratios[i] >= 0.0 && ratios[i] <= 1.0)) throw ConfigError("config: ratios must lie in [0, 1]");
        if (i > 0 && ratios[i] <= ratios[i - 1]) throw ConfigError("config: ratios must be strictly increasing");
    }
    if (!dataset_path) {
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), preset) == names.end()) {
            throw ConfigError("config: unknown preset '" + preset + "'");
        }
    }
    if (estimator.knn_k < 1) throw ConfigError("config: knn k must be positive");
    for (Pipeline p : pipelines) check_applicable(p, scenario);
    std::set<Pipeline> unique(pipelines.begin(), pipelines.end());
    if (unique.size() != pipelines.size()) throw ConfigError("config: duplicate pipeline");
}

std::vector<Pipeline> ExperimentConfig::effective_pipelines() const {
    if (!pipelines.empty()) return pipelines;
    std::vector<Pipeline> out;
    for (Pipeline p : all_pipelines()) {
        if (is_applicable(p, scenario)) out.push_back(p);
    }
    return out;
}

std::uint64_t ExperimentConfig::effective_data_seed() const {
    return data_seed.value_or(derive_seed(seed, kStreamData, 0));
}
std::uint64_t ExperimentConfig::effective_scenario_seed() const {
    return scenario_seed.value_or(derive_seed(seed, kStreamScenario, 0));
}
std::uint64_t ExperimentConfig::effective_fold_seed() const {
    return fold_seed.value_or(derive_seed(seed, kStreamFolds, 0));
}

namespace {

void require_known_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
            throw ConfigError("config: unknown key '" + key + "' in " + where);
        }
    }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        require_known_keys(j,
                           {"dataset", "scenario", "pipelines", "ratios", "folds", "seed", "seeds", "estimator",
                            "threads", "record_wall_time", "output"},
                           "top level");
        if (j.contains("dataset")) {
            const json& d = j.at("dataset");
            require_known_keys(d, {"preset", "path", "separation", "trials_per_class"}, "dataset");
            if (d.contains("preset")) c.preset = d.at("preset").get<std::string>();
            if (d.contains("path") && !d.at("path").is_null()) c.dataset_path = d.at("path").get<std::string>();
            if (d.contains("separation")) c.separation = d.at("separation").get<double>();
            if (d.contains("trials_per_class")) c.trials_per_class = d.at("trials_per_class").get<std::vector<int>>();
        }
        if (j.contains("scenario")) {
            const json& s = j.at("scenario");
            require_known_keys(s, {"kind", "dropped_channels", "groups", "windows"}, "scenario");
            if (s.contains("kind")) c.scenario = parse_scenario_kind(s.at("kind").get<std::string>());
            if (s.contains("dropped_channels")) c.dropped_channels = s.at("dropped_channels").get<int>();
            if (s.contains("groups")) c.groups = s.at("groups").get<std::vector<std::vector<Eigen::Index>>>();
            if (s.contains("windows")) {
                std::vector<Window> w;
                for (const auto& item : s.at("windows")) {
                    w.push_back({item.at(0).get<Eigen::Index>(), item.at(1).get<Eigen::Index>()});
                }
                c.windows = std::move(w);
            }
        }
        if (j.contains("pipelines")) {
            c.pipelines.clear();
            for (const auto& p : j.at("pipelines")) c.pipelines.push_back(parse_pipeline(p.get<std::string>()));
        }
        if (j.contains("ratios")) c.ratios = j.at("ratios").get<std::vector<double>>();
        if (j.contains("folds")) c.folds = j.at("folds").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("seeds")) {
            const json& s = j.at("seeds");
            require_known_keys(s, {"data", "scenario", "folds"}, "seeds");
            if (s.contains("data")) c.data_seed = s.at("data").get<std::uint64_t>();
            if (s.contains("scenario")) c.scenario_seed = s.at("scenario").get<std::uint64_t>();
            if (s.contains("folds")) c.fold_seed = s.at("folds").get<std::uint64_t>();
        }
        if (j.contains("estimator")) {
            const json& e = j.at("estimator");
            require_known_keys(e,
                               {"em_tol", "em_max_iter", "knn_k", "karcher_tol", "karcher_max_iter", "masked_tol",
                                "masked_max_iter"},
                               "estimator");
            auto& est = c.estimator;
            if (e.contains("em_tol")) est.em.tol = e.at("em_tol").get<double>();
            if (e.contains("em_max_iter")) est.em.max_iter = e.at("em_max_iter").get<int>();
            if (e.contains("knn_k")) est.knn_k = e.at("knn_k").get<int>();
            if (e.contains("karcher_tol")) est.mdrm.karcher.tol = e.at("karcher_tol").get<double>();
            if (e.contains("karcher_max_iter")) est.mdrm.karcher.max_iter = e.at("karcher_max_iter").get<int>();
            if (e.contains("masked_tol")) est.mdrm.masked.tol = e.at("masked_tol").get<double>();
            if (e.contains("masked_max_iter")) est.mdrm.masked.max_iter = e.at("masked_max_iter").get<int>();
        }
        if (j.contains("threads")) c.estimator.threads = j.at("threads").get<int>();
        if (j.contains("record_wall_time")) c.record_wall_time = j.at("record_wall_time").get<bool>();
        if (j.contains("output") && !j.at("output").is_null()) c.output_dir = j.at("output").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json dataset{{"preset", c.preset}, {"path", c.dataset_path ? json(c.dataset_path->string()) : json(nullptr)}};
    if (c.separation) dataset["separation"] = *c.separation;
    if (c.trials_per_class) dataset["trials_per_class"] = *c.trials_per_class;
    json scenario{{"kind", to_string(c.scenario)}};
    if (c.dropped_channels) scenario["dropped_channels"] = *c.dropped_channels;
    if (c.groups) scenario["groups"] = *c.groups;
    if (c.windows) {
        json w = json::array();
        for (const auto& win : *c.windows) w.push_back({win.start, win.end});
        scenario["windows"] = w;
    }
    json pipelines = json::array();
    for (Pipeline p : c.pipelines) pipelines.push_back(to_string(p));
    json seeds = json::object();
    if (c.data_seed) seeds["data"] = *c.data_seed;
    if (c.scenario_seed) seeds["scenario"] = *c.scenario_seed;
    if (c.fold_seed) seeds["folds"] = *c.fold_seed;
    const auto& est = c.estimator;
    return json{{"dataset", dataset},
                {"scenario", scenario},
                {"pipelines", pipelines},
                {"ratios", c.ratios},
                {"folds", c.folds},
                {"seed", c.seed},
                {"seeds", seeds},
                {"estimator",
                 {{"em_tol", est.em.tol},
                  {"em_max_iter", est.em.max_iter},
                  {"knn_k", est.knn_k},
                  {"karcher_tol", est.mdrm.karcher.tol},
                  {"karcher_max_iter", est.mdrm.karcher.max_iter},
                  {"masked_tol", est.mdrm.masked.tol},
                  {"masked_max_iter", est.mdrm.masked.max_iter}}},
                {"threads", est.threads},
                {"record_wall_time", c.record_wall_time},
                {"output", c.output_dir ? json(c.output_dir->string()) : json(nullptr)}};
}

// ---------------------------------------------------------------------------
// Benchmark

namespace {

LabeledDataset load_base(const ExperimentConfig& c) {
    if (c.dataset_path) return read_dataset(*c.dataset_path);
    SyntheticSpec spec = synthetic_preset(c.preset, c.effective_data_seed());
    if (c.separation) spec.separation = *c.separation;
    if (c.trials_per_class) spec.trials_per_class = *c.trials_per_class;
    return make_complete_dataset(spec);
}

ScenarioSpec scenario_for(const ExperimentConfig& c, const LabeledDataset& base, double ratio) {
    ScenarioSpec s = default_scenario(c.scenario, base.channels(), base.samples(),
                                      base.sampling_rate > 0.0 ? base.sampling_rate : 128.0, ratio,
                                      c.effective_scenario_seed());
    if (c.dropped_channels) s.dropped_channels = *c.dropped_channels;
    if (c.groups) s.groups = *c.groups;
    if (c.windows) s.windows = *c.windows;
    return s;
}

struct CellKey {
    std::string scenario;
    std::string pipeline;
    double ratio;
    int fold;
};

}  // namespace

ResultsTable run_benchmark(const ExperimentConfig& config, const std::function<void(const std::string&)>& progress) {
    config.validate();
    const LabeledDataset base = load_base(config);
    base.validate();
    const std::vector<Pipeline> pipelines = config.effective_pipelines();
    const std::vector<Fold> folds = stratified_kfold(base.labels, config.folds, config.effective_fold_seed());
    const std::string scenario_name = to_string(config.scenario);
    const EstimatorOptions& opts = config.estimator;

    ResultsTable table;
    auto record_ok = [&](const CellKey& k, double accuracy, double ms) {
        table.rows.push_back({k.scenario, k.pipeline, k.ratio, k.fold, accuracy, config.record_wall_time ? ms : kNaN});
    };
    auto record_error = [&](const CellKey& k, const std::string& kind, const std::string& message) {
        table.rows.push_back({k.scenario, k.pipeline, k.ratio, k.fold, kNaN, kNaN});
        table.errors.push_back({k.scenario, k.pipeline, k.ratio, k.fold, kind, message});
    };
    auto record_all_folds_error = [&](const std::string& pipeline, double ratio, const std::string& kind,
                                      const std::string& message) {
        for (int f = 0; f < config.folds; ++f) record_error({scenario_name, pipeline, ratio, f}, kind, message);
    };

    for (double ratio : config.ratios) {
        std::optional<LabeledDataset> observed;
        std::string scenario_error_kind;
        std::string scenario_error;
        try {
            observed = config.scenario == ScenarioKind::none ? base : apply_scenario(base, scenario_for(config, base, ratio));
        } catch (const Error& e) {
            scenario_error_kind = e.kind();
            scenario_error = e.what();
        }

        for (Pipeline pipeline : pipelines) {
            const std::string pname = to_string(pipeline);
            if (!observed) {
                record_all_folds_error(pname, ratio, scenario_error_kind, scenario_error);
                continue;
            }
            const LabeledDataset& source = pipeline == Pipeline::scm_complete ? base : *observed;
            const std::span<const Trial> trials(source.trials);
            const std::span<const int> labels(source.labels);

            if (pipeline != Pipeline::knn_scm) {
                const auto start = Clock::now();
                Features all;
                try {
                    check_applicable(pipeline, config.scenario);
                    all = compute_features(pipeline, trials, nullptr, opts);
                } catch (const Error& e) {
                    record_all_folds_error(pname, ratio, e.kind(), e.what());
                    continue;
                }
                const double feature_ms = elapsed_ms(start) / static_cast<double>(folds.size());
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    const CellKey key{scenario_name, pname, ratio, static_cast<int>(f)};
                    const auto fold_start = Clock::now();
                    try {
                        const FoldOutcome out =
                            classify(pipeline, gather_features(all, folds[f].train), gather<int>(labels, folds[f].train),
                                     gather_features(all, folds[f].test), gather<int>(labels, folds[f].test),
                                     source.classes, opts);
                        record_ok(key, out.accuracy, feature_ms + elapsed_ms(fold_start));
                    } catch (const Error& e) {
                        record_error(key, e.kind(), e.what());
                    }
                }
            } else {
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    const CellKey key{scenario_name, pname, ratio, static_cast<int>(f)};
                    const auto fold_start = Clock::now();
                    try {
                        check_applicable(pipeline, config.scenario);
                        const TrialSet train{gather<Trial>(trials, folds[f].train), gather<int>(labels, folds[f].train)};
                        const TrialSet test{gather<Trial>(trials, folds[f].test), gather<int>(labels, folds[f].test)};
                        const FoldOutcome out = run_pipeline(pipeline, config.scenario, train, test, source.classes, opts);
                        record_ok(key, out.accuracy, elapsed_ms(fold_start));
                    } catch (const Error& e) {
                        record_error(key, e.kind(), e.what());
                    }
                }
            }
            if (progress) {
                std::ostringstream msg;
                msg << scenario_name << " " << pname << " ratio=" << format_double(ratio) << " done";
                progress(msg.str());
            }
        }
    }
    table.canonicalize();
    return table;
}

void ResultsTable::canonicalize() {
    const auto key = [](const auto& r) { return std::tie(r.scenario, r.pipeline, r.missing_ratio, r.fold); };
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::stable_sort(errors.begin(), errors.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
}

std::vector<SummaryRow> ResultsTable::summarize() const {
    std::map<std::tuple<std::string, std::string, double>, std::vector<double>> cells;
    for (const auto& r : rows) {
        auto& v = cells[{r.scenario, r.pipeline, r.missing_ratio}];
        if (!std::isnan(r.accuracy)) v.push_back(r.accuracy);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, accs] : cells) {
        SummaryRow s{std::get<0>(key), std::get<1>(key), std::get<2>(key), kNaN, kNaN, static_cast<int>(accs.size())};
        if (!accs.empty()) {
            const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
            double ss = 0.0;
            for (double a : accs) ss += (a - mean) * (a - mean);
            s.mean_accuracy = mean;
            s.std_accuracy = accs.size() > 1 ? std::sqrt(ss / static_cast<double>(accs.size() - 1)) : 0.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Results files

namespace {

constexpr const char* kResultsHeader = "scenario,pipeline,missing_ratio,fold,accuracy,wall_time_ms";
constexpr const char* kSummaryHeader = "scenario,pipeline,missing_ratio,mean_accuracy,std_accuracy,folds";
constexpr const char* kErrorsHeader = "scenario,pipeline,missing_ratio,fold,kind,message";

std::string cell(double v) { return std::isnan(v) ? "NA" : format_double(v); }

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open " + path.string() + " for writing");
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

double parse_number(const std::string& text, const std::string& file, std::size_t line, std::size_t column) {
    if (text == "NA") return kNaN;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, column, "invalid number '" + text + "'");
    }
}

}  // namespace

void write_results(const ResultsTable& table, const fs::path& path) {
    auto out = open_out(path);
    out << kResultsHeader << '\n';
    for (const auto& r : table.rows) {
        out << r.scenario << ',' << r.pipeline << ',' << format_double(r.missing_ratio) << ',' << r.fold << ','
            << cell(r.accuracy) << ',' << cell(r.wall_time_ms) << '\n';
    }
}

void write_summary(std::span<const SummaryRow> rows, const fs::path& path) {
    auto out = open_out(path);
    out << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.pipeline << ',' << format_double(r.missing_ratio) << ',' << cell(r.mean_accuracy)
            << ',' << cell(r.std_accuracy) << ',' << r.folds << '\n';
    }
}

void write_errors(std::span<const CellError> errors, const fs::path& path) {
    auto out = open_out(path);
    out << kErrorsHeader << '\n';
    for (const auto& e : errors) {
        out << e.scenario << ',' << e.pipeline << ',' << format_double(e.missing_ratio) << ',' << e.fold << ','
            << e.kind << ',' << csv_quote(e.message) << '\n';
    }
}

ResultsTable read_results(const fs::path& path) {
    const std::string name = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(name, 0, 0, "cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name, 1, 0, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) throw ParseError(name, 1, 1, "unexpected header '" + line + "'");

    ResultsTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::vector<std::size_t> offsets;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            offsets.push_back(pos + 1);
            fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != 6) {
            throw ParseError(name, line_no, 0, "expected 6 fields, got " + std::to_string(fields.size()));
        }
        ResultRow r;
        r.scenario = fields[0];
        r.pipeline = fields[1];
        r.missing_ratio = parse_number(fields[2], name, line_no, offsets[2]);
        const double fold = parse_number(fields[3], name, line_no, offsets[3]);
        if (std::isnan(fold) || fold < 0 || fold != std::floor(fold)) {
            throw ParseError(name, line_no, offsets[3], "invalid fold index");
        }
        r.fold = static_cast<int>(fold);
        r.accuracy = parse_number(fields[4], name, line_no, offsets[4]);
        if (!std::isnan(r.accuracy) && (r.accuracy < 0.0 || r.accuracy > 1.0)) {
            throw ParseError(name, line_no, offsets[4], "accuracy outside [0, 1]");
        }
        r.wall_time_ms = parse_number(fields[5], name, line_no, offsets[5]);
        table.rows.push_back(std::move(r));
    }
    return table;
}

}  // namespace misscov
