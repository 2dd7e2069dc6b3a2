#pragma once

// On-disk dataset layout: a directory with manifest.json and one CSV per
// trial (rows = channels, columns = samples, the literal token NaN marks a
// missing entry). Values are written in shortest round-trip form so a
// dataset reads back bit-identical.

#include "misscov/dataset.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace misscov {

void write_trial_csv(const Trial& trial, std::ostream& out);
void write_trial_csv(const Trial& trial, const std::filesystem::path& path);
// `name` is used in error messages.
Trial read_trial_csv(std::istream& in, const std::string& name);
Trial read_trial_csv(const std::filesystem::path& path);

// Plain numeric matrix (no missing entries).
void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path);

void write_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);
// Throws ParseError (with file and line where applicable) on malformed input.
LabeledDataset read_dataset(const std::filesystem::path& dir);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace misscov
