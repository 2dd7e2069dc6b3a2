#include "misscov/covariance.hpp"
#include "misscov/errors.hpp"
#include "misscov/harness.hpp"
#include "misscov/imputation.hpp"
#include "misscov/masked_mean.hpp"
#include "misscov/mdrm.hpp"
#include "misscov/simulation.hpp"
#include "misscov/spd.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace misscov;

namespace {

std::vector<SPDMatrix> to_spd(const std::vector<Eigen::MatrixXd>& mats) {
    return {mats.begin(), mats.end()};
}

std::vector<Mask> to_masks(Eigen::Index p, const std::vector<std::vector<Eigen::Index>>& kept) {
    std::vector<Mask> out;
    out.reserve(kept.size());
    for (const auto& k : kept) out.emplace_back(p, k);
    return out;
}

std::vector<double> weights_or_uniform(const std::optional<std::vector<double>>& w, std::size_t n) {
    return w ? *w : std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

PYBIND11_MODULE(_misscov, m) {
    m.doc() = "Covariance estimation from incomplete multichannel trials";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ApplicabilityError>(m, "ApplicabilityError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<PoolExhaustedError>(m, "PoolExhaustedError", base.ptr());
    py::register_exception<NotPositiveDefiniteError>(m, "NotPositiveDefiniteError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<IncompleteInputError>(m, "IncompleteInputError", base.ptr());

    m.def("scm", [](const Eigen::MatrixXd& x) { return scm(Trial::complete(x)).matrix(); }, py::arg("x"),
          "Sample covariance (1/n) X X^T of a complete channels x samples array.");

    m.def(
        "em_covariance",
        [](const Eigen::MatrixXd& x, double tol, int max_iter) {
            EMOptions opts;
            opts.tol = tol;
            opts.max_iter = max_iter;
            const EMResult r = em_covariance(Trial::from_nan(x), opts);
            py::dict out;
            out["sigma"] = r.sigma.matrix();
            out["iterations"] = r.iterations;
            out["converged"] = r.converged;
            out["delta_history"] = r.delta_history;
            out["loglik_history"] = r.loglik_history;
            return out;
        },
        py::arg("x"), py::arg("tol") = 1e-6, py::arg("max_iter") = 100,
        "EM covariance estimate of a zero-mean trial with NaN at missing entries.");

    m.def(
        "observed_loglik",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& sigma) {
            return observed_loglik(Trial::from_nan(x), SPDMatrix(sigma));
        },
        py::arg("x"), py::arg("sigma"));

    m.def(
        "air_distance", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
            return air_distance(SPDMatrix(a), SPDMatrix(b));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "karcher_mean",
        [](const std::vector<Eigen::MatrixXd>& mats, const std::optional<std::vector<double>>& weights) {
            const auto spd = to_spd(mats);
            return karcher_mean(spd, weights_or_uniform(weights, spd.size())).matrix();
        },
        py::arg("mats"), py::arg("weights") = py::none());

    m.def(
        "masked_karcher_mean",
        [](const std::vector<Eigen::MatrixXd>& mats, const std::vector<std::vector<Eigen::Index>>& kept) {
            if (mats.empty()) throw ShapeError("masked_karcher_mean: no matrices");
            const auto spd = to_spd(mats);
            return masked_karcher_mean(spd, to_masks(spd.front().dim(), kept)).matrix();
        },
        py::arg("mats"), py::arg("kept"), "Masked mean; kept[i] lists the channels observed for mats[i].");

    m.def(
        "knn_impute",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& candidates, int k) {
            return knn_impute(Trial::from_nan(x), NeighborPool(candidates, k)).values();
        },
        py::arg("x"), py::arg("candidates"), py::arg("k") = NeighborPool::kDefaultK,
        "Fills NaN entries of x from the candidate columns (NaN = missing).");

    m.def(
        "mdrm_fit_predict",
        [](const std::vector<Eigen::MatrixXd>& train, const std::vector<int>& labels,
           const std::vector<Eigen::MatrixXd>& test) {
            LabeledCovDataset data{to_spd(train), labels, {}, 0};
            for (int l : labels) data.classes = std::max(data.classes, l + 1);
            const ClassMeans means = mdrm_fit(data, false);
            std::vector<int> out;
            out.reserve(test.size());
            for (const auto& q : test) out.push_back(mdrm_predict(SPDMatrix(q), means).label);
            return out;
        },
        py::arg("train"), py::arg("labels"), py::arg("test"));

    m.def(
        "simulate",
        [](const std::string& preset, std::uint64_t seed, const std::string& scenario, double ratio,
           std::uint64_t scenario_seed) {
            const SyntheticSpec spec = synthetic_preset(preset, seed);
            const LabeledDataset d = make_synthetic_dataset(
                spec, default_scenario(parse_scenario_kind(scenario), spec.p, spec.n, spec.sampling_rate, ratio,
                                       scenario_seed));
            std::vector<Eigen::MatrixXd> trials;
            trials.reserve(d.trials.size());
            for (const auto& t : d.trials) trials.push_back(t.values());
            return py::make_tuple(trials, d.labels);
        },
        py::arg("preset"), py::arg("seed"), py::arg("scenario") = "none", py::arg("ratio") = 0.0,
        py::arg("scenario_seed") = 0, "Synthetic trials (NaN = missing) and their labels.");

    m.def(
        "run_benchmark",
        [](const std::string& config_json) {
            const ResultsTable t = run_benchmark(config_from_json(nlohmann::json::parse(config_json)));
            py::list rows;
            for (const auto& r : t.rows) {
                py::dict row;
                row["scenario"] = r.scenario;
                row["pipeline"] = r.pipeline;
                row["missing_ratio"] = r.missing_ratio;
                row["fold"] = r.fold;
                row["accuracy"] = r.accuracy;
                rows.append(row);
            }
            return rows;
        },
        py::arg("config_json"), "Runs the benchmark for a JSON config and returns its result rows.");
}
