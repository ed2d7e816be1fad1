// Copyright 2026 The modecorr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modecorr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "gtest/gtest.h"

using namespace modecorr;

namespace {

namespace fs = std::filesystem;

ExperimentConfig small_config(std::uint64_t seed, int n, const std::string &modes, int trials) {
    ExperimentConfig cfg;
    cfg.n = n;
    cfg.modes = parse_modes(modes);
    cfg.modes_spec = modes;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.workers = 2;
    return cfg;
}

class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        path_ = fs::temp_directory_path() /
                ("modecorr-test-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path &path() const { return path_; }

  private:
    fs::path path_;
};

std::vector<std::string> dir_files(const fs::path &dir) {
    std::vector<std::string> names;
    for (const auto &e : fs::directory_iterator(dir)) {
        names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

void expect_identical_trees(const fs::path &a, const fs::path &b) {
    const auto names_a = dir_files(a);
    const auto names_b = dir_files(b);
    ASSERT_EQ(names_a, names_b);
    for (const auto &name : names_a) {
        EXPECT_EQ(read_file(a / name), read_file(b / name)) << name;
    }
}

}  // namespace

TEST(ParseModes, SingleAndRange) {
    EXPECT_EQ(parse_modes("120"), (std::vector<int>{120}));
    EXPECT_EQ(parse_modes("20:60:20"), (std::vector<int>{20, 40, 60}));
    EXPECT_EQ(parse_modes("5:6:4"), (std::vector<int>{5}));
    EXPECT_THROW(parse_modes("abc"), config_error);
    EXPECT_THROW(parse_modes("10:5:2"), config_error);
    EXPECT_THROW(parse_modes("10:20:0"), config_error);
    EXPECT_THROW(parse_modes("1:2"), config_error);
    EXPECT_THROW(parse_modes("0"), config_error);
}

TEST(ValidateConfig, DomainChecks) {
    auto cfg = small_config(1, 6, "6", 10);
    EXPECT_THROW(validate_config(cfg), domain_error);
    cfg = small_config(1, 3, "10", 0);
    EXPECT_THROW(validate_config(cfg), domain_error);
    cfg = small_config(1, 3, "10", 10);
    cfg.k = 0.0;
    EXPECT_THROW(validate_config(cfg), domain_error);
}

TEST(Provenance, ExcludesWorkerCount) {
    auto cfg = small_config(9, 3, "10", 5);
    cfg.workers = 16;
    const auto prov = make_provenance(cfg, "sweep");
    EXPECT_EQ(prov.command.find("workers"), std::string::npos);
    EXPECT_NE(prov.command.find("--seed 9"), std::string::npos);
    EXPECT_NE(prov.command.find("-m 10"), std::string::npos);
}

TEST(Sweep, RowLayoutAndPredictions) {
    const auto cfg = small_config(11, 3, "8:16:8", 30);
    const auto result = run_sweep(cfg);
    ASSERT_EQ(result.rows.size(), 8u);  // 2 mode counts x 4 species
    for (const auto &row : result.rows) {
        EXPECT_TRUE(row.m == 8 || row.m == 16);
        EXPECT_TRUE(std::isfinite(row.nm.mean));
        EXPECT_TRUE(std::isfinite(row.nm.std));
        // Loose sanity: the cloud mean tracks the ensemble value.
        EXPECT_NEAR(row.nm.mean, row.prediction.nm, 5.0 * row.nm.std);
        EXPECT_NEAR(row.cv.mean, row.prediction.cv, 5.0 * row.cv.std);
        EXPECT_NEAR(row.s.mean, row.prediction.s, 5.0 * row.s.std);
    }
}

TEST(Sweep, SingleTrialHasNaNStd) {
    auto cfg = small_config(12, 2, "8", 1);
    const auto result = run_sweep(cfg);
    ASSERT_EQ(result.rows.size(), 4u);
    EXPECT_TRUE(std::isnan(result.rows[0].nm.std));

    TempDir dir("sweep-nan");
    cfg.out_dir = dir.path();
    write_sweep(result, cfg);
    const auto text = read_file(dir.path() / "sweep.csv");
    EXPECT_NE(text.find("nan"), std::string::npos);
    EXPECT_NE(text.find("# seed: 12"), std::string::npos);
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
    auto cfg = small_config(13, 4, "12:16:4", 24);
    cfg.workers = 1;
    const auto serial = run_sweep(cfg);
    cfg.workers = 4;
    const auto parallel = run_sweep(cfg);
    ASSERT_EQ(serial.rows.size(), parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        EXPECT_EQ(serial.rows[i].nm.mean, parallel.rows[i].nm.mean);
        EXPECT_EQ(serial.rows[i].cv.std, parallel.rows[i].cv.std);
        EXPECT_EQ(serial.rows[i].s.mean, parallel.rows[i].s.mean);
    }
}

TEST(Sweep, ReuseCircuitModeRuns) {
    auto cfg = small_config(14, 3, "12", 16);
    cfg.reuse_circuit = true;
    const auto result = run_sweep(cfg);
    ASSERT_EQ(result.rows.size(), 4u);
    for (const auto &row : result.rows) {
        EXPECT_TRUE(std::isfinite(row.nm.mean));
    }
}

TEST(Scatter, CloudsAndVerdicts) {
    auto cfg = small_config(15, 3, "10", 25);
    const auto result = run_scatter(cfg);
    ASSERT_EQ(result.clouds.size(), 4u);
    for (const auto &cloud : result.clouds) {
        EXPECT_EQ(cloud.points.size(), 25u);
        EXPECT_EQ(cloud.summary.t, 25);
        // k = 2 accepts a subset of what k = 4 accepts.
        for (Species sp : cloud.verdict_k2.accepted) {
            EXPECT_TRUE(std::find(cloud.verdict_k4.accepted.begin(),
                                  cloud.verdict_k4.accepted.end(),
                                  sp) != cloud.verdict_k4.accepted.end());
        }
    }
    EXPECT_THROW(run_scatter(small_config(15, 3, "10:20:5", 25)), config_error);
}

TEST(Scatter, TinyCloudIsFlaggedLowConfidence) {
    auto cfg = small_config(16, 3, "10", 2);
    const auto result = run_scatter(cfg);
    EXPECT_NE(result.clouds[0].verdict_k4.diagnostic.find("low-confidence"), std::string::npos);
}

TEST(Scatter, FilesAreByteIdenticalAcrossWorkerCounts) {
    TempDir dir_a("scatter-a");
    TempDir dir_b("scatter-b");
    auto cfg = small_config(17, 3, "10", 24);
    cfg.workers = 1;
    cfg.out_dir = dir_a.path();
    write_scatter(run_scatter(cfg), cfg);
    cfg.workers = 3;
    cfg.out_dir = dir_b.path();
    write_scatter(run_scatter(cfg), cfg);
    expect_identical_trees(dir_a.path(), dir_b.path());
}

TEST(Certify, BosonCloudAcceptsBosonRejectsMeanField) {
    // Small-sample certification at n = 6, m = 20 with 20 sampled clouds.
    auto cfg = small_config(18, 6, "20", 20);
    const auto result = run_certify(cfg, Species::boson);
    ASSERT_TRUE(result.verdict.conclusive);
    const auto &accepted = result.verdict.accepted;
    EXPECT_TRUE(std::find(accepted.begin(), accepted.end(), Species::boson) != accepted.end());
    EXPECT_TRUE(std::find(accepted.begin(), accepted.end(), Species::simulated) ==
                accepted.end());
    EXPECT_GT(result.verdict.distances.at(Species::simulated), 4.0);
}

TEST(Certify, WritesVerdictSchema) {
    TempDir dir("certify");
    auto cfg = small_config(19, 3, "12", 12);
    cfg.out_dir = dir.path();
    const auto result = run_certify(cfg, Species::fermion);
    write_certify(result, cfg);
    const auto verdict = nlohmann::json::parse(read_file(dir.path() / "verdict.json"));
    EXPECT_EQ(verdict.at("cloud_species"), "fermion");
    EXPECT_EQ(verdict.at("distances").size(), 4u);
    EXPECT_DOUBLE_EQ(verdict.at("k").get<double>(), 4.0);
    const auto predictions = nlohmann::json::parse(read_file(dir.path() / "predictions.json"));
    EXPECT_EQ(predictions.at("predictions").size(), 4u);
    EXPECT_TRUE(fs::exists(dir.path() / "cloud_fermion.csv"));
}

TEST(Histogram, DensityNormalizedAtPublishedScale) {
    const auto cfg = small_config(20, 6, "120", 1);
    const auto result = run_histogram(cfg);
    ASSERT_EQ(result.series.size(), 4u);
    double s_boson = 0.0, s_fermion = 0.0, nm_boson = 0.0, nm_fermion = 0.0, nm_sim = 0.0;
    for (const auto &series : result.series) {
        EXPECT_EQ(series.dataset.size(), 7140u);
        double integral = 0.0;
        long counted = 0;
        for (const auto &bin : series.bins) {
            integral += bin.density * (bin.hi - bin.lo);
            counted += bin.count;
        }
        EXPECT_NEAR(integral, 1.0, 1e-9) << to_string(series.species);
        EXPECT_EQ(counted, 7140);
        if (series.species == Species::boson) {
            s_boson = series.stats.s;
            nm_boson = series.stats.nm;
        }
        if (series.species == Species::fermion) {
            s_fermion = series.stats.s;
            nm_fermion = series.stats.nm;
        }
        if (series.species == Species::simulated) {
            nm_sim = series.stats.nm;
        }
    }
    // The boson dataset carries the heavier right tail, and the mean-field
    // sampler tracks the bosons far more closely than the fermions do.
    EXPECT_GT(s_boson, s_fermion);
    EXPECT_LT(std::abs(nm_boson - nm_sim), 0.5 * std::abs(nm_boson - nm_fermion));
}

TEST(Histogram, BinOverrideAndDegenerateData) {
    auto cfg = small_config(21, 3, "12", 1);
    cfg.bins = 7;
    const auto result = run_histogram(cfg);
    EXPECT_EQ(result.series[0].bins.size(), 7u);

    const auto degenerate = detail::build_histogram({0.25, 0.25, 0.25}, 0);
    ASSERT_EQ(degenerate.size(), 1u);
    EXPECT_DOUBLE_EQ(degenerate[0].density, 1.0);
}

TEST(Histogram, WritesDatasetsAndSidecars) {
    TempDir dir("histogram");
    auto cfg = small_config(22, 2, "8", 1);
    cfg.out_dir = dir.path();
    write_histogram(run_histogram(cfg), cfg);
    for (const char *name : {"hist_boson.csv", "cdataset_boson.csv", "cdataset_boson.json",
                             "hist_simulated.csv", "cdataset_simulated.json"}) {
        EXPECT_TRUE(fs::exists(dir.path() / name)) << name;
    }
    const auto meta = nlohmann::json::parse(read_file(dir.path() / "cdataset_boson.json"));
    EXPECT_EQ(meta.at("source_seed"), 22);
    EXPECT_EQ(meta.at("m"), 8);
}

TEST(OracleCheck, PassesAtReducedScale) {
    auto cfg = small_config(23, 3, "6", 3);
    cfg.phase_samples = 4000;
    const auto report = run_oracle_check(cfg);
    EXPECT_TRUE(report.pass()) << (report.failures.empty() ? "" : report.failures.front());
    EXPECT_GT(report.exact_checks, 0);
    EXPECT_GT(report.mc_checks, 0);
    EXPECT_GT(report.sum_rule_checks, 0);
    EXPECT_LE(report.max_exact_deviation, kOracleTolerance);
    EXPECT_LE(report.max_sum_rule_residual, kOracleTolerance);
}

TEST(OracleCheck, InjectedErrorIsCaught) {
    auto cfg = small_config(24, 3, "6", 2);
    cfg.phase_samples = 2000;
    cfg.inject_error = true;
    const auto report = run_oracle_check(cfg);
    EXPECT_FALSE(report.pass());
    ASSERT_FALSE(report.failures.empty());
    EXPECT_NE(report.failures.front().find("closed-form vs oracle"), std::string::npos);
}
