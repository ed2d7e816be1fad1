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

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "modecorr/correlators.hpp"
#include "modecorr/errors.hpp"
#include "modecorr/io.hpp"
#include "modecorr/oracle.hpp"
#include "modecorr/rmt.hpp"
#include "modecorr/rng.hpp"
#include "modecorr/species.hpp"
#include "modecorr/stats.hpp"
#include "modecorr/unitary.hpp"

namespace modecorr {

/// Shared configuration of the benchmark experiments. The fields up to
/// `bins` are semantic: they select what is computed and are echoed into
/// provenance. `workers` only chooses how the trials are scheduled and never
/// affects any output byte.
struct ExperimentConfig {
    int n = 6;
    std::vector<int> modes = {120};
    std::string modes_spec = "120";
    int trials = 500;
    std::vector<Species> species{kAllSpecies.begin(), kAllSpecies.end()};
    bool species_all = true;
    std::uint64_t seed = 42;
    double k = 4.0;
    bool reuse_circuit = false;
    long phase_samples = 100000;
    int bins = 0;   // 0: Freedman-Diaconis
    bool inject_error = false;  // oracle-check self-test hook

    std::filesystem::path out_dir = ".";
    int workers = 0;  // 0: hardware concurrency
};

/// Parses "120" or "start:stop:step" into the mode list.
inline std::vector<int> parse_modes(const std::string &spec) {
    std::vector<long> parts;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t colon = spec.find(':', pos);
        const std::string tok = spec.substr(pos, colon == std::string::npos ? colon : colon - pos);
        try {
            std::size_t used = 0;
            parts.push_back(std::stol(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception &) {
            throw config_error("modes: cannot parse '" + spec + "'");
        }
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    std::vector<int> modes;
    if (parts.size() == 1) {
        modes.push_back(static_cast<int>(parts[0]));
    } else if (parts.size() == 3) {
        const long start = parts[0], stop = parts[1], step = parts[2];
        if (step < 1 || start > stop) {
            throw config_error("modes: range must satisfy start <= stop, step >= 1");
        }
        for (long v = start; v <= stop; v += step) modes.push_back(static_cast<int>(v));
    } else {
        throw config_error("modes: expected M or START:STOP:STEP, got '" + spec + "'");
    }
    for (int v : modes) {
        if (v < 1) throw config_error("modes: values must be >= 1");
    }
    return modes;
}

inline void validate_config(const ExperimentConfig &cfg) {
    if (cfg.n < 1) {
        throw domain_error("config: particle count must be >= 1");
    }
    if (cfg.modes.empty()) {
        throw domain_error("config: at least one mode count required");
    }
    const int min_m = *std::min_element(cfg.modes.begin(), cfg.modes.end());
    if (cfg.n >= min_m) {
        throw domain_error("config: requires n < m for every mode count (n = " +
                           std::to_string(cfg.n) + ", smallest m = " + std::to_string(min_m) +
                           ")");
    }
    if (cfg.trials < 1) {
        throw domain_error("config: trials must be >= 1");
    }
    if (cfg.k <= 0.0) {
        throw domain_error("config: certification threshold k must be positive");
    }
    if (cfg.phase_samples < 1) {
        throw domain_error("config: phase samples must be >= 1");
    }
}

inline std::string species_list_string(const ExperimentConfig &cfg) {
    if (cfg.species_all) return "all";
    std::string out;
    for (Species sp : cfg.species) {
        if (!out.empty()) out += ",";
        out += std::string(to_string(sp));
    }
    return out;
}

/// Canonical command echo for provenance. Workers are intentionally absent.
inline Provenance make_provenance(const ExperimentConfig &cfg, const std::string &subcommand) {
    Provenance prov;
    prov.seed = cfg.seed;
    prov.command = "modecorr " + subcommand + " -n " + std::to_string(cfg.n) + " -m " +
                   cfg.modes_spec + " --trials " + std::to_string(cfg.trials) + " --seed " +
                   std::to_string(cfg.seed) + " --species " + species_list_string(cfg) +
                   " --k " + g17(cfg.k);
    if (cfg.reuse_circuit) prov.command += " --reuse-circuit";
    if (subcommand == "histogram" && cfg.bins > 0) {
        prov.command += " --bins " + std::to_string(cfg.bins);
    }
    if (subcommand == "oracle-check") {
        prov.command += " --phase-samples " + std::to_string(cfg.phase_samples);
    }
    return prov;
}

namespace detail {

/// Runs fn(0..count-1), each exactly once, on up to `workers` threads.
/// Results land in an index-addressed vector, so the outcome is identical
/// for any worker count or interleaving.
template <typename T, typename Fn>
std::vector<T> run_indexed(int count, int workers, Fn &&fn) {
    std::vector<T> results(static_cast<std::size_t>(count));
    if (workers <= 0) {
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) results[static_cast<std::size_t>(i)] = fn(i);
        return results;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                results[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers - 1));
        for (int w = 1; w < workers; ++w) pool.emplace_back(body);
        body();
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

/// Uniform random selection of n distinct input modes out of 1..m.
inline InputSelection random_selection(int n, int m, RandomStream rng) {
    std::vector<int> pool(static_cast<std::size_t>(m));
    std::iota(pool.begin(), pool.end(), 1);
    for (int i = 0; i < n; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<int> modes(pool.begin(), pool.begin() + n);
    std::sort(modes.begin(), modes.end());
    return InputSelection::from_modes(std::move(modes));
}

/// One trial's submatrix. Fresh mode: a new Haar draw per trial, input modes
/// 1..n. Reuse mode: one circuit per m, a random input selection per trial.
inline Submatrix trial_submatrix(const ExperimentConfig &cfg, int m, int trial,
                                 const UnitaryMatrix *shared_circuit) {
    if (shared_circuit != nullptr) {
        return extract_submatrix(
            *shared_circuit,
            random_selection(cfg.n, m,
                             RandomStream(cfg.seed, "selection", static_cast<std::uint64_t>(m),
                                          static_cast<std::uint64_t>(trial))));
    }
    return haar_submatrix(cfg.n, m,
                          RandomStream(cfg.seed, "usub", static_cast<std::uint64_t>(m),
                                       static_cast<std::uint64_t>(trial)));
}

using TrialStats = std::array<BenchmarkStats, 4>;

inline TrialStats trial_statistics(const Submatrix &sub) {
    const auto datasets = c_datasets_all(sub);
    TrialStats out;
    for (Species sp : kAllSpecies) {
        out[species_index(sp)] = dataset_statistics(datasets[species_index(sp)]);
    }
    return out;
}

/// All trial statistics for one mode count, scheduled over the worker pool.
inline std::vector<TrialStats> run_trials(const ExperimentConfig &cfg, int m) {
    std::optional<UnitaryMatrix> circuit;
    if (cfg.reuse_circuit) {
        circuit = haar_unitary(m, RandomStream(cfg.seed, "circuit", static_cast<std::uint64_t>(m)));
    }
    const UnitaryMatrix *shared = circuit ? &*circuit : nullptr;
    return run_indexed<TrialStats>(cfg.trials, cfg.workers, [&](int t) {
        return trial_statistics(trial_submatrix(cfg, m, t, shared));
    });
}

struct MeanStd {
    double mean = 0.0;
    double std = std::numeric_limits<double>::quiet_NaN();
};

inline MeanStd mean_std(const std::vector<double> &values) {
    MeanStd out;
    KahanSum sum;
    for (double v : values) sum.add(v);
    out.mean = sum.value() / static_cast<double>(values.size());
    if (values.size() >= 2) {
        KahanSum sq;
        for (double v : values) sq.add((v - out.mean) * (v - out.mean));
        out.std = std::sqrt(sq.value() / static_cast<double>(values.size() - 1));
    }
    return out;
}

}  // namespace detail

// --- sweep: statistics vs mode count -----------------------------------------

struct SweepRow {
    int m = 0;
    Species species = Species::boson;
    detail::MeanStd nm, cv, s;       // cloud mean and standard deviation
    BenchmarkStats prediction;       // closed-form ensemble values
};

struct SweepResult {
    std::vector<SweepRow> rows;  // grouped by m, species in kAllSpecies order
};

/// For each mode count, samples `trials` submatrices, computes per-dataset
/// NM/CV/S for every requested species and summarizes the clouds next to the
/// ensemble predictions.
inline SweepResult run_sweep(const ExperimentConfig &cfg) {
    validate_config(cfg);
    SweepResult result;
    for (int m : cfg.modes) {
        const auto trials = detail::run_trials(cfg, m);
        for (Species sp : cfg.species) {
            std::vector<double> nm, cv, s;
            nm.reserve(trials.size());
            cv.reserve(trials.size());
            s.reserve(trials.size());
            for (const auto &t : trials) {
                const auto &stats = t[species_index(sp)];
                nm.push_back(stats.nm);
                cv.push_back(stats.cv);
                s.push_back(stats.s);
            }
            SweepRow row;
            row.m = m;
            row.species = sp;
            row.nm = detail::mean_std(nm);
            row.cv = detail::mean_std(cv);
            row.s = detail::mean_std(s);
            row.prediction = rmt_statistics(sp, cfg.n, m);
            result.rows.push_back(row);
        }
    }
    return result;
}

inline void write_sweep(const SweepResult &result, const ExperimentConfig &cfg) {
    const Provenance prov = make_provenance(cfg, "sweep");
    std::string csv = prov.csv_comment_block();
    csv += "m,species,nm_mean,nm_std,cv_mean,cv_std,s_mean,s_std,nm_rmt,cv_rmt,s_rmt\n";
    for (const auto &row : result.rows) {
        csv += std::to_string(row.m) + "," + std::string(to_string(row.species)) + "," +
               g17(row.nm.mean) + "," + g17(row.nm.std) + "," + g17(row.cv.mean) + "," +
               g17(row.cv.std) + "," + g17(row.s.mean) + "," + g17(row.s.std) + "," +
               g17(row.prediction.nm) + "," + g17(row.prediction.cv) + "," +
               g17(row.prediction.s) + "\n";
    }
    write_file(cfg.out_dir / "sweep.csv", csv);
}

// --- scatter: (CV, S) clouds at one mode count --------------------------------

struct SpeciesCloud {
    Species species = Species::boson;
    std::vector<std::array<double, 2>> points;  // (cv, s) per trial
    CloudSummary summary;
    BenchmarkStats prediction;
    Verdict verdict_k2;
    Verdict verdict_k4;
};

struct ScatterResult {
    int m = 0;
    std::vector<SpeciesCloud> clouds;
};

namespace detail {

inline void flag_low_confidence(Verdict &v, long trials) {
    if (trials < 10) {
        if (!v.diagnostic.empty()) v.diagnostic += "; ";
        v.diagnostic += "low-confidence: cloud of only " + std::to_string(trials) + " trials";
    }
}

}  // namespace detail

/// Per-trial (CV, S) points for each requested species at a single mode
/// count, with cloud summaries and certification verdicts at k = 2 and 4.
/// Every cloud is tested against the predictions of all four species.
inline ScatterResult run_scatter(const ExperimentConfig &cfg) {
    validate_config(cfg);
    if (cfg.modes.size() != 1) {
        throw config_error("scatter: expects a single mode count, not a range");
    }
    const int m = cfg.modes[0];
    const auto trials = detail::run_trials(cfg, m);
    std::map<Species, BenchmarkStats> predictions;
    for (Species sp : kAllSpecies) {
        predictions[sp] = rmt_statistics(sp, cfg.n, m);
    }
    ScatterResult result;
    result.m = m;
    for (Species sp : cfg.species) {
        SpeciesCloud cloud;
        cloud.species = sp;
        cloud.points.reserve(trials.size());
        for (const auto &t : trials) {
            const auto &stats = t[species_index(sp)];
            cloud.points.push_back({stats.cv, stats.s});
        }
        cloud.summary = cloud_summary(cloud.points);
        cloud.prediction = predictions.at(sp);
        cloud.verdict_k2 = certify(cloud.summary, predictions, 2.0);
        cloud.verdict_k4 = certify(cloud.summary, predictions, 4.0);
        detail::flag_low_confidence(cloud.verdict_k2, cloud.summary.t);
        detail::flag_low_confidence(cloud.verdict_k4, cloud.summary.t);
        result.clouds.push_back(std::move(cloud));
    }
    return result;
}

// --- certify: one cloud species against all predictions -----------------------

struct CertifyResult {
    Species cloud_species = Species::boson;
    int m = 0;
    std::vector<std::array<double, 2>> points;
    CloudSummary summary;
    std::map<Species, BenchmarkStats> predictions;
    Verdict verdict;
};

inline CertifyResult run_certify(const ExperimentConfig &cfg, Species cloud_species) {
    validate_config(cfg);
    if (cfg.modes.size() != 1) {
        throw config_error("certify: expects a single mode count, not a range");
    }
    const int m = cfg.modes[0];
    const auto trials = detail::run_trials(cfg, m);
    CertifyResult result;
    result.cloud_species = cloud_species;
    result.m = m;
    result.points.reserve(trials.size());
    for (const auto &t : trials) {
        const auto &stats = t[species_index(cloud_species)];
        result.points.push_back({stats.cv, stats.s});
    }
    result.summary = cloud_summary(result.points);
    for (Species sp : kAllSpecies) {
        result.predictions[sp] = rmt_statistics(sp, cfg.n, m);
    }
    result.verdict = certify(result.summary, result.predictions, cfg.k);
    detail::flag_low_confidence(result.verdict, result.summary.t);
    return result;
}

// --- histogram: correlator distribution for one circuit -----------------------

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;
    double density = 0.0;  // count / (total * bin width); integrates to one
};

namespace detail {

inline double quantile_sorted(const std::vector<double> &sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

/// Freedman-Diaconis binning by default (bin width 2*IQR/t^{1/3}); falls back
/// to Sturges when the IQR degenerates. `bins_override` > 0 forces a count.
inline std::vector<HistogramBin> build_histogram(const std::vector<double> &values,
                                                 int bins_override) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const auto t = static_cast<double>(sorted.size());
    if (lo == hi) {
        // Degenerate dataset: a single unit-width bin keeps the density normalized.
        return {HistogramBin{lo - 0.5, lo + 0.5, static_cast<long>(sorted.size()), 1.0}};
    }
    int bins;
    if (bins_override > 0) {
        bins = bins_override;
    } else {
        const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
        const double fd_width = 2.0 * iqr / std::cbrt(t);
        if (fd_width > 0.0) {
            bins = std::max(1, static_cast<int>(std::ceil((hi - lo) / fd_width)));
        } else {
            bins = static_cast<int>(std::ceil(std::log2(t))) + 1;
        }
    }
    const double width = (hi - lo) / bins;
    std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        out[static_cast<std::size_t>(b)].lo = lo + b * width;
        out[static_cast<std::size_t>(b)].hi = lo + (b + 1) * width;
    }
    out.back().hi = hi;
    for (double v : values) {
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        ++out[static_cast<std::size_t>(b)].count;
    }
    for (auto &bin : out) {
        bin.density = static_cast<double>(bin.count) / (t * width);
    }
    return out;
}

}  // namespace detail

struct SpeciesHistogram {
    Species species = Species::boson;
    CDataset dataset;
    BenchmarkStats stats;
    std::vector<HistogramBin> bins;
};

struct HistogramResult {
    int m = 0;
    std::vector<SpeciesHistogram> series;
};

/// One Haar circuit, one input selection (modes 1..n), and the C-dataset of
/// every requested species, binned into density-normalized histograms.
inline HistogramResult run_histogram(const ExperimentConfig &cfg) {
    validate_config(cfg);
    if (cfg.modes.size() != 1) {
        throw config_error("histogram: expects a single mode count, not a range");
    }
    const int m = cfg.modes[0];
    const UnitaryMatrix circuit =
        haar_unitary(m, RandomStream(cfg.seed, "circuit", static_cast<std::uint64_t>(m)));
    const Submatrix sub = extract_submatrix(circuit, InputSelection::first_n(cfg.n));
    const auto datasets = c_datasets_all(sub);
    HistogramResult result;
    result.m = m;
    for (Species sp : cfg.species) {
        SpeciesHistogram series;
        series.species = sp;
        series.dataset = datasets[species_index(sp)];
        series.stats = dataset_statistics(series.dataset);
        series.bins = detail::build_histogram(series.dataset.values, cfg.bins);
        result.series.push_back(std::move(series));
    }
    return result;
}

// --- writers ------------------------------------------------------------------

inline nlohmann::json prediction_record(Species sp, int n, int m) {
    const MomentTriple moments = rmt_moments(sp, n, m);
    const BenchmarkStats stats = stats_from_moments(moments, n, m);
    return {
        {"species", to_string(sp)}, {"n", n},           {"m", m},
        {"m1", moments.m1},         {"m2", moments.m2}, {"m3", moments.m3},
        {"nm", stats.nm},           {"cv", stats.cv},   {"s", stats.s},
    };
}

namespace detail {

inline std::string cloud_csv(const std::vector<std::array<double, 2>> &points,
                             const Provenance &prov) {
    std::string csv = prov.csv_comment_block();
    csv += "trial,cv,s\n";
    for (std::size_t t = 0; t < points.size(); ++t) {
        csv += std::to_string(t + 1) + "," + g17(points[t][0]) + "," + g17(points[t][1]) + "\n";
    }
    return csv;
}

inline nlohmann::json summary_json(const CloudSummary &s) {
    const auto mat = [](const Eigen::Matrix2d &c) {
        return nlohmann::json::array(
            {{c(0, 0), c(0, 1)}, {c(1, 0), c(1, 1)}});
    };
    return {
        {"t", s.t},
        {"mean", {s.mean[0], s.mean[1]}},
        {"covariance", mat(s.covariance)},
        {"standard_error_cov", mat(s.standard_error_cov)},
    };
}

inline nlohmann::json predictions_json(const ExperimentConfig &cfg, int m,
                                       const Provenance &prov) {
    nlohmann::json records = nlohmann::json::array();
    for (Species sp : kAllSpecies) {
        records.push_back(prediction_record(sp, cfg.n, m));
    }
    return {{"provenance", prov.to_json()}, {"predictions", records}};
}

}  // namespace detail

inline void write_scatter(const ScatterResult &result, const ExperimentConfig &cfg) {
    const Provenance prov = make_provenance(cfg, "scatter");
    nlohmann::json clouds = nlohmann::json::object();
    for (const auto &cloud : result.clouds) {
        const std::string name(to_string(cloud.species));
        write_file(cfg.out_dir / ("cloud_" + name + ".csv"),
                   detail::cloud_csv(cloud.points, prov));
        for (const auto &[k_tag, verdict] :
             {std::pair{"k2", &cloud.verdict_k2}, std::pair{"k4", &cloud.verdict_k4}}) {
            nlohmann::json v = verdict_to_json(*verdict);
            v["cloud_species"] = name;
            v["provenance"] = prov.to_json();
            write_file(cfg.out_dir / ("verdict_" + name + "_" + k_tag + ".json"),
                       v.dump(2) + "\n");
        }
        nlohmann::json c = detail::summary_json(cloud.summary);
        c["prediction"] = prediction_record(cloud.species, cfg.n, result.m);
        clouds[name] = c;
    }
    const nlohmann::json summary = {
        {"provenance", prov.to_json()}, {"n", cfg.n},         {"m", result.m},
        {"trials", cfg.trials},         {"clouds", clouds},
    };
    write_file(cfg.out_dir / "scatter_summary.json", summary.dump(2) + "\n");
    write_file(cfg.out_dir / "predictions.json",
               detail::predictions_json(cfg, result.m, prov).dump(2) + "\n");
}

inline void write_certify(const CertifyResult &result, const ExperimentConfig &cfg) {
    const Provenance prov = make_provenance(cfg, "certify");
    const std::string name(to_string(result.cloud_species));
    write_file(cfg.out_dir / ("cloud_" + name + ".csv"),
               detail::cloud_csv(result.points, prov));
    nlohmann::json v = verdict_to_json(result.verdict);
    v["cloud_species"] = name;
    v["cloud"] = detail::summary_json(result.summary);
    v["provenance"] = prov.to_json();
    write_file(cfg.out_dir / "verdict.json", v.dump(2) + "\n");
    write_file(cfg.out_dir / "predictions.json",
               detail::predictions_json(cfg, result.m, prov).dump(2) + "\n");
}

inline void write_histogram(const HistogramResult &result, const ExperimentConfig &cfg) {
    const Provenance prov = make_provenance(cfg, "histogram");
    for (const auto &series : result.series) {
        const std::string name(to_string(series.species));
        std::string csv = prov.csv_comment_block();
        csv += "bin_lo,bin_hi,count,density\n";
        for (const auto &bin : series.bins) {
            csv += g17(bin.lo) + "," + g17(bin.hi) + "," + std::to_string(bin.count) + "," +
                   g17(bin.density) + "\n";
        }
        write_file(cfg.out_dir / ("hist_" + name + ".csv"), csv);
        write_file(cfg.out_dir / ("cdataset_" + name + ".csv"),
                   cdataset_to_csv(series.dataset, prov));
        write_file(cfg.out_dir / ("cdataset_" + name + ".json"),
                   cdataset_metadata(series.dataset, cfg.seed, prov).dump(2) + "\n");
    }
}

// --- oracle check --------------------------------------------------------------

/// Result of the formula-vs-oracle equivalence and sum-rule suites over all
/// desk-scale instances.
struct OracleCheckReport {
    long exact_checks = 0;
    double max_exact_deviation = 0.0;
    long mc_checks = 0;
    double max_se_ratio = 0.0;
    long sum_rule_checks = 0;
    double max_sum_rule_residual = 0.0;
    std::vector<std::string> failures;

    bool pass() const { return failures.empty(); }
};

inline constexpr double kOracleTolerance = 1e-10;
inline constexpr double kOracleMcSigmas = 5.0;

namespace detail {

inline double sum_rule_residual(const OutputDistribution &dist) {
    KahanSum total;
    for (int i = 1; i <= dist.m; ++i) {
        total.add(oracle_correlator(dist, i, i));
        for (int j = i + 1; j <= dist.m; ++j) {
            total.add(2.0 * oracle_correlator(dist, i, j));
        }
    }
    return std::abs(total.value());
}

}  // namespace detail

/// Runs the ground-truth suites at oracle scale (n <= 3, m <= 6):
///  - closed-form correlators against distribution covariances, exactly for
///    bosons/fermions/distinguishable and within Monte Carlo error for the
///    mean-field sampler;
///  - the particle-number sum rule for every species.
/// `cfg.trials` sets the Haar draws per (n, m) cell for the exact species.
inline OracleCheckReport run_oracle_check(const ExperimentConfig &cfg) {
    if (cfg.trials < 1) {
        throw domain_error("oracle-check: trials must be >= 1");
    }
    OracleCheckReport report;
    bool injected = !cfg.inject_error;  // corrupt only the first comparison
    const auto record_exact = [&](double closed, double oracle, int n, int m, Species sp) {
        const double dev = std::abs(closed - oracle);
        report.max_exact_deviation = std::max(report.max_exact_deviation, dev);
        ++report.exact_checks;
        if (dev > kOracleTolerance) {
            report.failures.push_back("closed-form vs oracle deviates by " + g17(dev) + " (n=" +
                                      std::to_string(n) + ", m=" + std::to_string(m) + ", " +
                                      std::string(to_string(sp)) + ")");
        }
    };
    const auto record_sum_rule = [&](const OutputDistribution &dist) {
        const double residual = detail::sum_rule_residual(dist);
        report.max_sum_rule_residual = std::max(report.max_sum_rule_residual, residual);
        ++report.sum_rule_checks;
        if (residual > kOracleTolerance) {
            report.failures.push_back("sum rule residual " + g17(residual) + " (n=" +
                                      std::to_string(dist.n) + ", m=" + std::to_string(dist.m) +
                                      ", " + std::string(to_string(dist.species)) + ")");
        }
    };

    std::uint64_t cell = 0;
    for (int n = 1; n <= 3; ++n) {
        for (int m = n + 1; m <= 6; ++m, ++cell) {
            for (int draw = 0; draw < cfg.trials; ++draw) {
                const Submatrix sub = haar_submatrix(
                    n, m, RandomStream(cfg.seed, "oracle-usub", cell, static_cast<std::uint64_t>(draw)));
                const std::array<OutputDistribution, 3> dists = {
                    boson_distribution(sub), fermion_distribution(sub),
                    distinguishable_distribution(sub)};
                for (const auto &dist : dists) {
                    for (int i = 1; i < m; ++i) {
                        for (int j = i + 1; j <= m; ++j) {
                            double closed = correlator(sub, i, j, dist.species);
                            if (!injected) {
                                closed += 1e-6;
                                injected = true;
                            }
                            record_exact(closed, oracle_correlator(dist, i, j), n, m,
                                         dist.species);
                        }
                    }
                    record_sum_rule(dist);
                }
            }

            // Mean-field sampler: Monte Carlo phase averaging; fewer draws,
            // plenty of phase samples.
            const int sim_draws = std::clamp(cfg.trials / 25, 1, 4);
            for (int draw = 0; draw < sim_draws; ++draw) {
                const Submatrix sub = haar_submatrix(
                    n, m,
                    RandomStream(cfg.seed, "oracle-usub-sim", cell, static_cast<std::uint64_t>(draw)));
                const OutputDistribution dist = simulated_distribution(
                    sub, cfg.phase_samples,
                    RandomStream(cfg.seed, "oracle-phases", cell, static_cast<std::uint64_t>(draw)));
                record_sum_rule(dist);
                for (int i = 1; i < m; ++i) {
                    for (int j = i + 1; j <= m; ++j) {
                        const double closed = correlator(sub, i, j, Species::simulated);
                        const McEstimate mc = simulated_correlator_mc(
                            sub, i, j, cfg.phase_samples, 100,
                            RandomStream(cfg.seed, "oracle-mc", cell,
                                         (static_cast<std::uint64_t>(draw) << 32) |
                                             static_cast<std::uint64_t>(CDataset::pair_index(i, j, m))));
                        for (const double estimate : {mc.value, oracle_correlator(dist, i, j)}) {
                            // A phase-independent case (n = 1) has vanishing
                            // Monte Carlo spread; agreement at the exact
                            // tolerance short-circuits the se ratio.
                            const double dev = std::abs(estimate - closed);
                            const double ratio =
                                dev <= kOracleTolerance
                                    ? 0.0
                                    : dev / std::max(mc.standard_error, 1e-300);
                            report.max_se_ratio = std::max(report.max_se_ratio, ratio);
                            ++report.mc_checks;
                            if (ratio > kOracleMcSigmas) {
                                report.failures.push_back(
                                    "mean-field correlator off by " + g17(ratio) +
                                    " standard errors (n=" + std::to_string(n) + ", m=" +
                                    std::to_string(m) + ")");
                            }
                        }
                    }
                }
            }
        }
    }
    return report;
}

}  // namespace modecorr
