#pragma once

// Synthetic zero-mean Gaussian trials per class and injection of the two
// missing-data scenarios: electrode popping (whole channels lost for a trial)
// and eye blinking (a channel group lost over short time windows).

#include "misscov/dataset.hpp"
#include "misscov/spd.hpp"
#include "misscov/trial.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace misscov {

// Deterministic seed for stream `stream`, item `index` under a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct SyntheticSpec {
    std::string name = "custom";
    Eigen::Index p = 16;
    Eigen::Index n = 103;
    int classes = 2;
    std::vector<int> trials_per_class{200, 200};
    // 0 gives identical classes; larger values rotate class covariances
    // further apart.
    double separation = 1.0;
    // Shared spectrum decays geometrically to 1/condition.
    double condition = 20.0;
    double sampling_rate = 128.0;
    // When non-empty, used as the class covariances instead of generated ones.
    std::vector<SPDMatrix> class_covariances;
    std::uint64_t seed = 0;

    Eigen::Index total_trials() const;
    // p >= 2, n >= 2, classes >= 2, positive counts per class.
    void validate() const;
};

// "p300" (p=16, n=103, L=1728), "mi" (p=22, n=1001, L=576) and "separated"
// (p=16, n=103, L=400, two well separated classes).
SyntheticSpec synthetic_preset(const std::string& name, std::uint64_t seed);
std::vector<std::string> preset_names();

// Scenario defaults for a p x n layout: two dropped channels for electrode
// popping; for eye blinking three channel groups (11 of 16 or 12 of 22
// channels, about two thirds otherwise) over three 200 ms windows.
ScenarioSpec default_scenario(ScenarioKind kind, Eigen::Index p, Eigen::Index n, double sampling_rate,
                              double affected_ratio, std::uint64_t seed);

// n independent columns from N(0, sigma).
Trial sample_gaussian_trial(const SPDMatrix& sigma, Eigen::Index n, std::uint64_t seed);

// Hides the given channels for all samples.
Trial inject_electrode_popping(const Trial& trial, std::span<const Eigen::Index> channels);

// Hides groups[i] during windows[i]. Throws InvalidScenarioError if a sample
// would be left with no observed channel.
Trial inject_eye_blinking(const Trial& trial, const std::vector<std::vector<Eigen::Index>>& groups,
                          const std::vector<Window>& windows);

// Sigma_z = Q_z B D B^T Q_z^T with shared spectrum D and base rotation B;
// Q_z = exp(separation * K_z) for a random unit skew-symmetric K_z.
std::vector<SPDMatrix> make_class_covariances(const SyntheticSpec& spec);

// Fully observed dataset, trials grouped by class.
LabeledDataset make_complete_dataset(const SyntheticSpec& spec);

// Applies the scenario to round(affected_ratio * L) trials chosen uniformly.
// The affected sets are nested across ratios for a fixed scenario seed, and
// the channels dropped in a trial do not depend on the ratio.
LabeledDataset apply_scenario(const LabeledDataset& base, const ScenarioSpec& scenario);

LabeledDataset make_synthetic_dataset(const SyntheticSpec& spec, const ScenarioSpec& scenario);

}  // namespace misscov
