#include "misscov/errors.hpp"
#include "misscov/harness.hpp"
#include "misscov/io.hpp"
#include "misscov/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace misscov;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("misscov_io_" + name);
    fs::remove_all(dir);
    return dir;
}

LabeledDataset small_dataset(ScenarioKind kind) {
    SyntheticSpec spec;
    spec.p = 5;
    spec.n = 24;
    spec.trials_per_class = {4, 3};
    spec.seed = 21;
    return make_synthetic_dataset(spec, default_scenario(kind, spec.p, spec.n, 40.0, 0.5, 22));
}

void rewrite_manifest(const fs::path& dir, const std::string& from, const std::string& to) {
    std::ifstream in(dir / "manifest.json");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    const auto pos = text.find(from);
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, from.size(), to);
    std::ofstream(dir / "manifest.json") << text;
}

}  // namespace

TEST(DatasetIo, RoundTripIncludingMasks) {
    for (ScenarioKind kind : {ScenarioKind::electrode_popping, ScenarioKind::eye_blinking}) {
        const LabeledDataset d = small_dataset(kind);
        const fs::path dir = scratch("roundtrip");
        write_dataset(d, dir);
        EXPECT_EQ(read_dataset(dir), d);
    }
}

TEST(TrialCsv, NaNTokenMarksMissing) {
    std::istringstream in("1.5,NaN,2\n-3,4,NaN\n");
    const Trial t = read_trial_csv(in, "mem");
    EXPECT_EQ(t.channels(), 2);
    EXPECT_EQ(t.samples(), 3);
    EXPECT_FALSE(t.observed()(0, 1));
    EXPECT_FALSE(t.observed()(1, 2));
    EXPECT_TRUE(t.observed()(0, 0));
    EXPECT_EQ(t.values()(1, 0), -3.0);
}

TEST(TrialCsv, WriteUsesShortestRoundTripForm) {
    Eigen::MatrixXd x(2, 3);
    x << 0.1, 1.0 / 3.0, std::nan(""),
         1.0, -2.5, 1e-300;
    std::ostringstream out;
    write_trial_csv(Trial::from_nan(x), out);
    EXPECT_EQ(out.str(), "0.1,0.3333333333333333,NaN\n1,-2.5,1e-300\n");
}

TEST(TrialCsv, ParseErrorsCarryPosition) {
    std::istringstream bad_number("1,2\n3,x\n");
    try {
        read_trial_csv(bad_number, "f.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 3u);
        EXPECT_EQ(std::string(e.what()).rfind("f.csv:2:3:", 0), 0u);
    }
    std::istringstream ragged("1,2\n3\n");
    try {
        read_trial_csv(ragged, "f.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream empty_column("NaN,1\nNaN,2\n");
    EXPECT_THROW(read_trial_csv(empty_column, "f.csv"), ParseError);
}

TEST(DatasetIo, TrialCountMismatchIsParseError) {
    const LabeledDataset d = small_dataset(ScenarioKind::none);
    const fs::path dir = scratch("mismatch");
    write_dataset(d, dir);
    rewrite_manifest(dir, "\"L\": 7", "\"L\": 8");
    EXPECT_THROW(read_dataset(dir), ParseError);
}

TEST(DatasetIo, MalformedManifestIsParseError) {
    const fs::path dir = scratch("malformed");
    fs::create_directories(dir);
    std::ofstream(dir / "manifest.json") << "{ \"format\": ";
    EXPECT_THROW(read_dataset(dir), ParseError);
    EXPECT_THROW(read_dataset(scratch("absent")), ParseError);
}

TEST(DatasetIo, ShapeMismatchIsParseError) {
    const LabeledDataset d = small_dataset(ScenarioKind::none);
    const fs::path dir = scratch("shape");
    write_dataset(d, dir);
    std::ofstream(dir / "trial_00002.csv") << "1,2\n3,4\n";
    EXPECT_THROW(read_dataset(dir), ParseError);
}

TEST(ResultsIo, RoundTripAndNA) {
    ResultsTable t;
    t.rows.push_back({"electrode_popping", "em_scm", 0.2, 0, 0.95, std::nan("")});
    t.rows.push_back({"electrode_popping", "knn_scm", 0.2, 1, std::nan(""), std::nan("")});
    const fs::path dir = scratch("results");
    write_results(t, dir / "results.csv");
    const ResultsTable back = read_results(dir / "results.csv");
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_EQ(back.rows[0].accuracy, 0.95);
    EXPECT_TRUE(std::isnan(back.rows[0].wall_time_ms));
    EXPECT_TRUE(std::isnan(back.rows[1].accuracy));
    EXPECT_EQ(back.rows[1].fold, 1);

    std::ifstream in(dir / "results.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "scenario,pipeline,missing_ratio,fold,accuracy,wall_time_ms");
}

TEST(ResultsIo, RejectsBadRows) {
    const fs::path dir = scratch("results_bad");
    fs::create_directories(dir);
    std::ofstream(dir / "r.csv") << "scenario,pipeline,missing_ratio,fold,accuracy,wall_time_ms\n"
                                 << "none,em_scm,0,0,1.5,NA\n";
    EXPECT_THROW(read_results(dir / "r.csv"), ParseError);
    std::ofstream(dir / "h.csv") << "a,b\n";
    EXPECT_THROW(read_results(dir / "h.csv"), ParseError);
}
