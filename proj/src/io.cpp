#include "misscov/io.hpp"

#include "misscov/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>
#include <vector>

namespace misscov {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kFormatName = "misscov-dataset";
constexpr int kFormatVersion = 1;

std::string trial_file_name(std::size_t i) {
    std::ostringstream s;
    s << "trial_" << std::setw(5) << std::setfill('0') << i << ".csv";
    return s.str();
}

std::ofstream open_for_write(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open " + path.string() + " for writing");
    return out;
}

json scenario_to_json(const ScenarioRecord& r) {
    json windows = json::array();
    for (const auto& w : r.spec.windows) windows.push_back({w.start, w.end});
    return json{{"kind", to_string(r.spec.kind)},
                {"affected_ratio", r.spec.affected_ratio},
                {"dropped_channels", r.spec.dropped_channels},
                {"groups", r.spec.groups},
                {"windows", windows},
                {"seed", r.spec.seed},
                {"affected", r.affected},
                {"dropped", r.dropped}};
}

ScenarioRecord scenario_from_json(const json& j) {
    ScenarioRecord r;
    r.spec.kind = parse_scenario_kind(j.at("kind").get<std::string>());
    r.spec.affected_ratio = j.at("affected_ratio").get<double>();
    r.spec.dropped_channels = j.at("dropped_channels").get<int>();
    r.spec.groups = j.at("groups").get<std::vector<std::vector<Eigen::Index>>>();
    for (const auto& w : j.at("windows")) r.spec.windows.push_back({w.at(0).get<Eigen::Index>(), w.at(1).get<Eigen::Index>()});
    r.spec.seed = j.at("seed").get<std::uint64_t>();
    r.affected = j.at("affected").get<std::vector<std::size_t>>();
    r.dropped = j.at("dropped").get<std::vector<std::vector<Eigen::Index>>>();
    return r;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_trial_csv(const Trial& trial, std::ostream& out) {
    for (Eigen::Index c = 0; c < trial.channels(); ++c) {
        for (Eigen::Index s = 0; s < trial.samples(); ++s) {
            if (s > 0) out << ',';
            out << (trial.observed()(c, s) ? format_double(trial.values()(c, s)) : std::string("NaN"));
        }
        out << '\n';
    }
}

void write_trial_csv(const Trial& trial, const fs::path& path) {
    auto out = open_for_write(path);
    write_trial_csv(trial, out);
}

Trial read_trial_csv(std::istream& in, const std::string& name) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            throw ParseError(name, line_no, 0, "empty line");
        }
        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string_view cell(line.data() + pos, (comma == std::string::npos ? line.size() : comma) - pos);
            if (cell == "NaN" || cell == "nan") {
                row.push_back(std::nan(""));
            } else {
                double v = 0.0;
                const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || cell.empty()) {
                    throw ParseError(name, line_no, pos + 1, "invalid number '" + std::string(cell) + "'");
                }
                if (!std::isfinite(v)) throw ParseError(name, line_no, pos + 1, "non-finite value");
                row.push_back(v);
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError(name, line_no, 0,
                             "expected " + std::to_string(rows.front().size()) + " values, got " +
                                 std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(name, 0, 0, "no data");

    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    try {
        return Trial::from_nan(std::move(values));
    } catch (const Error& e) {
        throw ParseError(name, 0, 0, e.what());
    }
}

Trial read_trial_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, 0, "cannot open file");
    return read_trial_csv(in, path.string());
}

void write_matrix_csv(const Eigen::MatrixXd& m, const fs::path& path) {
    auto out = open_for_write(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

void write_dataset(const LabeledDataset& dataset, const fs::path& dir) {
    dataset.validate();
    fs::create_directories(dir);
    json manifest{{"format", kFormatName},
                  {"version", kFormatVersion},
                  {"p", dataset.channels()},
                  {"n", dataset.samples()},
                  {"L", dataset.size()},
                  {"Z", dataset.classes},
                  {"channel_names", dataset.channel_names},
                  {"sampling_rate", dataset.sampling_rate},
                  {"preset", dataset.preset},
                  {"seed", dataset.seed},
                  {"labels", dataset.labels}};
    json files = json::array();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const std::string name = trial_file_name(i);
        write_trial_csv(dataset.trials[i], dir / name);
        files.push_back(name);
    }
    manifest["trials"] = files;
    manifest["scenario"] = dataset.scenario ? scenario_to_json(*dataset.scenario) : json(nullptr);

    auto out = open_for_write(dir / kManifestName);
    out << manifest.dump(2) << '\n';
}

LabeledDataset read_dataset(const fs::path& dir) {
    const fs::path manifest_path = dir / kManifestName;
    const std::string mname = manifest_path.string();
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw ParseError(mname, 0, 0, "cannot open manifest");

    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(mname, 0, 0, std::string("invalid JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
    }

    LabeledDataset d;
    std::vector<std::string> files;
    Eigen::Index p = 0;
    Eigen::Index n = 0;
    std::size_t count = 0;
    try {
        if (manifest.at("format").get<std::string>() != kFormatName) throw ParseError(mname, 0, 0, "unknown format");
        if (manifest.at("version").get<int>() != kFormatVersion) throw ParseError(mname, 0, 0, "unsupported version");
        p = manifest.at("p").get<Eigen::Index>();
        n = manifest.at("n").get<Eigen::Index>();
        count = manifest.at("L").get<std::size_t>();
        d.classes = manifest.at("Z").get<int>();
        d.channel_names = manifest.at("channel_names").get<std::vector<std::string>>();
        d.sampling_rate = manifest.at("sampling_rate").get<double>();
        d.preset = manifest.at("preset").get<std::string>();
        d.seed = manifest.at("seed").get<std::uint64_t>();
        d.labels = manifest.at("labels").get<std::vector<int>>();
        files = manifest.at("trials").get<std::vector<std::string>>();
        if (!manifest.at("scenario").is_null()) d.scenario = scenario_from_json(manifest.at("scenario"));
    } catch (const json::exception& e) {
        throw ParseError(mname, 0, 0, std::string("invalid manifest: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(mname, 0, 0, std::string("invalid manifest: ") + e.what());
    }

    if (files.size() != count || d.labels.size() != count) {
        throw ParseError(mname, 0, 0,
                         "manifest declares L=" + std::to_string(count) + " but lists " + std::to_string(files.size()) +
                             " trial files and " + std::to_string(d.labels.size()) + " labels");
    }
    d.trials.reserve(count);
    for (const auto& f : files) {
        Trial t = read_trial_csv(dir / f);
        if (t.channels() != p || t.samples() != n) {
            throw ParseError((dir / f).string(), 0, 0,
                             "trial is " + std::to_string(t.channels()) + "x" + std::to_string(t.samples()) +
                                 ", manifest declares " + std::to_string(p) + "x" + std::to_string(n));
        }
        d.trials.push_back(std::move(t));
    }
    try {
        d.validate();
    } catch (const Error& e) {
        throw ParseError(mname, 0, 0, e.what());
    }
    return d;
}

}  // namespace misscov
