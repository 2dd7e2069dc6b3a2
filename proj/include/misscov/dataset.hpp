#pragma once

#include "misscov/trial.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace misscov {

enum class ScenarioKind { none, electrode_popping, eye_blinking };

std::string to_string(ScenarioKind kind);
// Accepts "none", "electrode_popping"/"s1", "eye_blinking"/"s2".
ScenarioKind parse_scenario_kind(const std::string& text);

// Sample interval [start, end).
struct Window {
    Eigen::Index start = 0;
    Eigen::Index end = 0;
    bool operator==(const Window&) const = default;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::none;
    double affected_ratio = 0.0;
    // electrode popping: channels dropped per affected trial
    int dropped_channels = 2;
    // eye blinking: groups[i] is hidden during windows[i]
    std::vector<std::vector<Eigen::Index>> groups;
    std::vector<Window> windows;
    std::uint64_t seed = 0;

    // Throws InvalidScenarioError for ratios outside [0, 1], empty or
    // out-of-range groups, windows outside [0, n), or group/window count mismatch.
    void validate(Eigen::Index p, Eigen::Index n) const;
    bool operator==(const ScenarioSpec&) const = default;
};

// What a scenario did to a dataset: the affected trials (ascending) and, for
// electrode popping, the channels dropped in each of them.
struct ScenarioRecord {
    ScenarioSpec spec;
    std::vector<std::size_t> affected;
    std::vector<std::vector<Eigen::Index>> dropped;
    bool operator==(const ScenarioRecord&) const = default;
};

// Labelled trials plus channel metadata. Labels are class indices in [0, classes).
struct LabeledDataset {
    std::vector<Trial> trials;
    std::vector<int> labels;
    int classes = 0;
    std::vector<std::string> channel_names;
    double sampling_rate = 0.0;
    std::string preset;
    std::uint64_t seed = 0;
    std::optional<ScenarioRecord> scenario;

    std::size_t size() const noexcept { return trials.size(); }
    Eigen::Index channels() const { return trials.empty() ? 0 : trials.front().channels(); }
    Eigen::Index samples() const { return trials.empty() ? 0 : trials.front().samples(); }

    // Equal shapes across trials, one label per trial in range, channel names
    // matching p when present.
    void validate() const;
    bool operator==(const LabeledDataset&) const = default;
};

}  // namespace misscov
