#include "misscov/simulation.hpp"

#include "misscov/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace misscov {

namespace {

constexpr std::uint64_t kStreamClassCov = 1;
constexpr std::uint64_t kStreamTrial = 2;
constexpr std::uint64_t kStreamAffected = 3;
constexpr std::uint64_t kStreamPopping = 4;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

Eigen::MatrixXd random_rotation(Eigen::Index p, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(p, p, rng));
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::VectorXd signs = qr.matrixQR().diagonal().array().sign();
    return q * signs.asDiagonal();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) + index);
}

Eigen::Index SyntheticSpec::total_trials() const {
    return std::accumulate(trials_per_class.begin(), trials_per_class.end(), Eigen::Index{0});
}

void SyntheticSpec::validate() const {
    if (p < 2 || n < 2) throw ConfigError("SyntheticSpec: p and n must be at least 2");
    if (classes < 2) throw ConfigError("SyntheticSpec: at least two classes are required");
    if (static_cast<int>(trials_per_class.size()) != classes) {
        throw ConfigError("SyntheticSpec: trials_per_class needs one entry per class");
    }
    for (int c : trials_per_class) {
        if (c < 1) throw ConfigError("SyntheticSpec: every class needs at least one trial");
    }
    if (!(separation >= 0.0) || !(condition >= 1.0)) throw ConfigError("SyntheticSpec: invalid separation or condition");
    if (!class_covariances.empty()) {
        if (static_cast<int>(class_covariances.size()) != classes) {
            throw ConfigError("SyntheticSpec: one covariance per class is required");
        }
        for (const auto& s : class_covariances) {
            if (s.dim() != p) throw ConfigError("SyntheticSpec: class covariance has the wrong dimension");
        }
    }
}

std::vector<std::string> preset_names() { return {"p300", "mi", "separated"}; }

SyntheticSpec synthetic_preset(const std::string& name, std::uint64_t seed) {
    SyntheticSpec s;
    s.name = name;
    s.seed = seed;
    if (name == "p300") {
        s.p = 16;
        s.n = 103;
        s.classes = 2;
        s.trials_per_class = {1440, 288};
        s.separation = 0.5;
        s.sampling_rate = 128.0;
    } else if (name == "mi") {
        s.p = 22;
        s.n = 1001;
        s.classes = 4;
        s.trials_per_class = {144, 144, 144, 144};
        s.separation = 0.5;
        s.sampling_rate = 250.0;
    } else if (name == "separated") {
        s.p = 16;
        s.n = 103;
        s.classes = 2;
        s.trials_per_class = {200, 200};
        s.separation = 0.5;
        s.sampling_rate = 128.0;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return s;
}

ScenarioSpec default_scenario(ScenarioKind kind, Eigen::Index p, Eigen::Index n, double sampling_rate,
                              double affected_ratio, std::uint64_t seed) {
    ScenarioSpec s;
    s.kind = kind;
    s.affected_ratio = affected_ratio;
    s.seed = seed;
    if (kind != ScenarioKind::eye_blinking) return s;

    Eigen::Index group_size = p == 16 ? 11 : p == 22 ? 12 : std::max<Eigen::Index>(1, (2 * p) / 3);
    group_size = std::min(group_size, p - 1);
    const Eigen::Index segment = n / 3;
    Eigen::Index length = static_cast<Eigen::Index>(std::lround(0.2 * sampling_rate));
    length = std::clamp<Eigen::Index>(length, 1, std::max<Eigen::Index>(1, segment));
    const Eigen::Index shift = std::max<Eigen::Index>(1, p / 3);
    for (Eigen::Index g = 0; g < 3; ++g) {
        std::vector<Eigen::Index> group;
        for (Eigen::Index j = 0; j < group_size; ++j) group.push_back((g * shift + j) % p);
        std::sort(group.begin(), group.end());
        s.groups.push_back(std::move(group));
        const Eigen::Index start = g * segment + (segment - length) / 2;
        s.windows.push_back({start, start + length});
    }
    return s;
}

Trial sample_gaussian_trial(const SPDMatrix& sigma, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw ShapeError("sample_gaussian_trial: n must be positive");
    std::mt19937_64 rng(seed);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma.matrix());
    if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("sample_gaussian_trial: Cholesky failed");
    const Eigen::MatrixXd z = gaussian_matrix(sigma.dim(), n, rng);
    return Trial::complete(llt.matrixL() * z);
}

Trial inject_electrode_popping(const Trial& trial, std::span<const Eigen::Index> channels) {
    ObservedMask hide = ObservedMask::Constant(trial.channels(), trial.samples(), false);
    for (Eigen::Index c : channels) {
        if (c < 0 || c >= trial.channels()) throw InvalidScenarioError("electrode popping: channel out of range");
        hide.row(c).setConstant(true);
    }
    if (static_cast<Eigen::Index>(hide.col(0).count()) >= trial.channels()) {
        throw InvalidScenarioError("electrode popping: cannot drop every channel");
    }
    try {
        return trial.hide(hide);
    } catch (const IncompleteInputError& e) {
        throw InvalidScenarioError(std::string("electrode popping leaves an empty sample: ") + e.what());
    }
}

Trial inject_eye_blinking(const Trial& trial, const std::vector<std::vector<Eigen::Index>>& groups,
                          const std::vector<Window>& windows) {
    if (groups.size() != windows.size()) throw InvalidScenarioError("eye blinking: one window per group is required");
    ObservedMask hide = ObservedMask::Constant(trial.channels(), trial.samples(), false);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const Window& w = windows[g];
        if (w.start < 0 || w.end > trial.samples() || w.start >= w.end) {
            throw InvalidScenarioError("eye blinking: window outside the trial");
        }
        for (Eigen::Index c : groups[g]) {
            if (c < 0 || c >= trial.channels()) throw InvalidScenarioError("eye blinking: channel out of range");
            hide.row(c).segment(w.start, w.end - w.start).setConstant(true);
        }
    }
    try {
        return trial.hide(hide);
    } catch (const IncompleteInputError& e) {
        throw InvalidScenarioError(std::string("eye blinking leaves a sample with no observed channel: ") + e.what());
    }
}

std::vector<SPDMatrix> make_class_covariances(const SyntheticSpec& spec) {
    spec.validate();
    if (!spec.class_covariances.empty()) return spec.class_covariances;

    const Eigen::Index p = spec.p;
    Eigen::VectorXd spectrum(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        spectrum(k) = std::pow(spec.condition, -static_cast<double>(k) / static_cast<double>(p - 1));
    }
    spectrum *= static_cast<double>(p) / spectrum.sum();

    std::mt19937_64 base_rng(derive_seed(spec.seed, kStreamClassCov, 0));
    const Eigen::MatrixXd base = random_rotation(p, base_rng);
    const Eigen::MatrixXd shared = base * spectrum.asDiagonal() * base.transpose();

    std::vector<SPDMatrix> out;
    for (int z = 0; z < spec.classes; ++z) {
        std::mt19937_64 rng(derive_seed(spec.seed, kStreamClassCov, static_cast<std::uint64_t>(z) + 1));
        const Eigen::MatrixXd g = gaussian_matrix(p, p, rng);
        Eigen::MatrixXd skew = (g - g.transpose()) / 2.0;
        skew /= skew.norm();
        const Eigen::MatrixXd q = (spec.separation * skew).exp();
        const Eigen::MatrixXd s = q * shared * q.transpose();
        out.emplace_back((s + s.transpose()) / 2.0);
    }
    return out;
}

LabeledDataset make_complete_dataset(const SyntheticSpec& spec) {
    const std::vector<SPDMatrix> covs = make_class_covariances(spec);
    LabeledDataset d;
    d.classes = spec.classes;
    d.sampling_rate = spec.sampling_rate;
    d.preset = spec.name;
    d.seed = spec.seed;
    for (Eigen::Index c = 0; c < spec.p; ++c) d.channel_names.push_back("ch" + std::to_string(c));
    std::uint64_t index = 0;
    for (int z = 0; z < spec.classes; ++z) {
        for (int t = 0; t < spec.trials_per_class[static_cast<std::size_t>(z)]; ++t, ++index) {
            d.trials.push_back(sample_gaussian_trial(covs[static_cast<std::size_t>(z)], spec.n,
                                                     derive_seed(spec.seed, kStreamTrial, index)));
            d.labels.push_back(z);
        }
    }
    return d;
}

LabeledDataset apply_scenario(const LabeledDataset& base, const ScenarioSpec& scenario) {
    const Eigen::Index p = base.channels();
    scenario.validate(p, base.samples());

    LabeledDataset out = base;
    ScenarioRecord record;
    record.spec = scenario;
    if (scenario.kind != ScenarioKind::none) {
        const std::size_t total = base.size();
        const auto count = static_cast<std::size_t>(std::lround(scenario.affected_ratio * static_cast<double>(total)));
        std::vector<std::size_t> order(total);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(scenario.seed, kStreamAffected, 0));
        std::shuffle(order.begin(), order.end(), rng);
        record.affected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(record.affected.begin(), record.affected.end());

        for (std::size_t i : record.affected) {
            if (scenario.kind == ScenarioKind::electrode_popping) {
                std::vector<Eigen::Index> channels(static_cast<std::size_t>(p));
                std::iota(channels.begin(), channels.end(), Eigen::Index{0});
                std::mt19937_64 trial_rng(derive_seed(scenario.seed, kStreamPopping, i));
                std::shuffle(channels.begin(), channels.end(), trial_rng);
                channels.resize(static_cast<std::size_t>(scenario.dropped_channels));
                std::sort(channels.begin(), channels.end());
                out.trials[i] = inject_electrode_popping(out.trials[i], channels);
                record.dropped.push_back(std::move(channels));
            } else {
                out.trials[i] = inject_eye_blinking(out.trials[i], scenario.groups, scenario.windows);
            }
        }
    }
    out.scenario = std::move(record);
    return out;
}

LabeledDataset make_synthetic_dataset(const SyntheticSpec& spec, const ScenarioSpec& scenario) {
    return apply_scenario(make_complete_dataset(spec), scenario);
}

}  // namespace misscov
