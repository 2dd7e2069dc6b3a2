#include "misscov/dataset.hpp"

#include "misscov/errors.hpp"

#include <set>

namespace misscov {

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::none: return "none";
        case ScenarioKind::electrode_popping: return "electrode_popping";
        case ScenarioKind::eye_blinking: return "eye_blinking";
    }
    return "none";
}

ScenarioKind parse_scenario_kind(const std::string& text) {
    if (text == "none") return ScenarioKind::none;
    if (text == "electrode_popping" || text == "s1") return ScenarioKind::electrode_popping;
    if (text == "eye_blinking" || text == "s2") return ScenarioKind::eye_blinking;
    throw ConfigError("unknown scenario '" + text + "' (expected none, electrode_popping/s1, eye_blinking/s2)");
}

void ScenarioSpec::validate(Eigen::Index p, Eigen::Index n) const {
    if (!(affected_ratio >= 0.0 && affected_ratio <= 1.0)) {
        throw InvalidScenarioError("scenario: affected_ratio must lie in [0, 1]");
    }
    if (kind == ScenarioKind::electrode_popping) {
        if (dropped_channels < 0 || dropped_channels >= p) {
            throw InvalidScenarioError("scenario: electrode popping must drop between 0 and p-1 channels");
        }
    }
    if (kind != ScenarioKind::eye_blinking) return;

    if (groups.size() != windows.size()) throw InvalidScenarioError("scenario: one window per channel group is required");
    std::vector<std::set<Eigen::Index>> hidden(static_cast<std::size_t>(n));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw InvalidScenarioError("scenario: empty channel group");
        for (Eigen::Index c : groups[g]) {
            if (c < 0 || c >= p) throw InvalidScenarioError("scenario: group channel out of range");
        }
        const Window& w = windows[g];
        if (w.start < 0 || w.end > n || w.start >= w.end) {
            throw InvalidScenarioError("scenario: window [" + std::to_string(w.start) + ", " + std::to_string(w.end) +
                                       ") outside [0, " + std::to_string(n) + ")");
        }
        for (Eigen::Index s = w.start; s < w.end; ++s) {
            hidden[static_cast<std::size_t>(s)].insert(groups[g].begin(), groups[g].end());
        }
    }
    for (std::size_t s = 0; s < hidden.size(); ++s) {
        if (static_cast<Eigen::Index>(hidden[s].size()) >= p) {
            throw InvalidScenarioError("scenario: sample " + std::to_string(s) + " would have no observed channel");
        }
    }
}

void LabeledDataset::validate() const {
    if (trials.empty()) throw ShapeError("dataset: no trials");
    if (labels.size() != trials.size()) throw ShapeError("dataset: one label per trial is required");
    for (const auto& t : trials) {
        if (t.channels() != channels() || t.samples() != samples()) {
            throw ShapeError("dataset: trials of different shapes");
        }
    }
    for (int z : labels) {
        if (z < 0 || z >= classes) throw ShapeError("dataset: label " + std::to_string(z) + " out of range");
    }
    if (!channel_names.empty() && static_cast<Eigen::Index>(channel_names.size()) != channels()) {
        throw ShapeError("dataset: channel name count differs from channel count");
    }
}

}  // namespace misscov
