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

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modecorr/modecorr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitCheck = 4;

struct CliOptions {
    modecorr::ExperimentConfig cfg;
    std::string modes_spec = "120";
    std::string species_spec = "all";
    int submatrix_rows = 0;  // haar-gen only
};

void resolve(CliOptions &opt) {
    opt.cfg.modes = modecorr::parse_modes(opt.modes_spec);
    opt.cfg.modes_spec = opt.modes_spec;
    if (opt.species_spec == "all") {
        opt.cfg.species.assign(modecorr::kAllSpecies.begin(), modecorr::kAllSpecies.end());
        opt.cfg.species_all = true;
    } else {
        opt.cfg.species = {modecorr::parse_species(opt.species_spec)};
        opt.cfg.species_all = false;
    }
}

void add_common_options(CLI::App *cmd, CliOptions &opt, bool with_trials) {
    cmd->add_option("-n,--particles", opt.cfg.n, "Number of particles");
    cmd->add_option("-m,--modes", opt.modes_spec, "Mode count M or range START:STOP:STEP");
    cmd->add_option("--seed", opt.cfg.seed, "Root seed for all randomness");
    cmd->add_option("--species", opt.species_spec,
                    "Species: boson, fermion, dist, simboson or all");
    cmd->add_option("--out", opt.cfg.out_dir, "Output directory");
    cmd->add_option("--workers", opt.cfg.workers,
                    "Worker threads (0 = hardware concurrency; never affects results)");
    if (with_trials) {
        cmd->add_option("--trials", opt.cfg.trials, "Sampled submatrices per configuration");
        cmd->add_flag("--reuse-circuit", opt.cfg.reuse_circuit,
                      "Reuse one circuit and vary the input selection per trial "
                      "instead of redrawing the circuit");
    }
}

int cmd_predict(const CliOptions &opt, bool write_files) {
    for (int m : opt.cfg.modes) {
        for (modecorr::Species sp : opt.cfg.species) {
            std::cout << modecorr::prediction_record(sp, opt.cfg.n, m).dump() << "\n";
        }
    }
    if (write_files) {
        const auto prov = modecorr::make_provenance(opt.cfg, "predict");
        nlohmann::json records = nlohmann::json::array();
        for (int m : opt.cfg.modes) {
            for (modecorr::Species sp : opt.cfg.species) {
                records.push_back(modecorr::prediction_record(sp, opt.cfg.n, m));
            }
        }
        const nlohmann::json out = {{"provenance", prov.to_json()}, {"predictions", records}};
        modecorr::write_file(opt.cfg.out_dir / "predictions.json", out.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_haar_gen(const CliOptions &opt) {
    const int m = opt.cfg.modes.at(0);
    const auto prov = modecorr::make_provenance(opt.cfg, "haar-gen");
    const modecorr::UnitaryMatrix u = modecorr::haar_unitary(
        m, modecorr::RandomStream(opt.cfg.seed, "circuit", static_cast<std::uint64_t>(m)));
    modecorr::write_file(opt.cfg.out_dir / "haar_unitary.json",
                         modecorr::unitary_to_json(u, &prov) + "\n");
    if (opt.submatrix_rows > 0) {
        const auto sel = modecorr::InputSelection::first_n(opt.submatrix_rows);
        const auto sub = modecorr::extract_submatrix(u, sel);
        modecorr::write_file(opt.cfg.out_dir / "submatrix.json",
                             modecorr::submatrix_to_json(sub, &prov) + "\n");
    }
    std::cout << "wrote haar_unitary.json (m = " << m << ")";
    if (opt.submatrix_rows > 0) std::cout << " and submatrix.json (n = " << opt.submatrix_rows << ")";
    std::cout << " to " << opt.cfg.out_dir.string() << "\n";
    return kExitOk;
}

int cmd_oracle_check(const CliOptions &opt) {
    const auto report = modecorr::run_oracle_check(opt.cfg);
    std::printf("exact checks     : %ld (max deviation %.3g, tolerance %.3g)\n",
                report.exact_checks, report.max_exact_deviation, modecorr::kOracleTolerance);
    std::printf("mc checks        : %ld (worst %.2f standard errors, limit %.1f)\n",
                report.mc_checks, report.max_se_ratio, modecorr::kOracleMcSigmas);
    std::printf("sum-rule checks  : %ld (max residual %.3g, tolerance %.3g)\n",
                report.sum_rule_checks, report.max_sum_rule_residual, modecorr::kOracleTolerance);
    for (const auto &f : report.failures) {
        std::printf("FAILURE: %s\n", f.c_str());
    }
    std::printf("%s\n", report.pass() ? "oracle check PASSED" : "oracle check FAILED");
    return report.pass() ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Exact mode-correlation statistics of multiparticle interference samplers, "
                 "closed-form ensemble predictions, and species certification experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("modecorr ") + modecorr::kVersion);

    CliOptions opt;
    bool predict_out = false;

    auto *predict = app.add_subcommand(
        "predict", "Closed-form ensemble moments and NM/CV/S per species");
    add_common_options(predict, opt, false);
    predict->add_flag("--write", predict_out, "Also write predictions.json to --out");

    auto *histogram = app.add_subcommand(
        "histogram", "C-dataset histograms of one circuit, one input selection");
    add_common_options(histogram, opt, true);
    histogram->add_option("--bins", opt.cfg.bins, "Fixed bin count (default: Freedman-Diaconis)");

    auto *sweep = app.add_subcommand(
        "sweep", "Cloud statistics vs mode count, next to the closed-form curves");
    add_common_options(sweep, opt, true);

    auto *scatter = app.add_subcommand(
        "scatter", "(CV, S) clouds per species at one mode count, with verdicts at k = 2, 4");
    add_common_options(scatter, opt, true);

    auto *certify_cmd = app.add_subcommand(
        "certify", "Certify the species predictions against one sampled cloud");
    add_common_options(certify_cmd, opt, true);
    certify_cmd->add_option("--k", opt.cfg.k, "Acceptance threshold in standard errors");

    auto *oracle_check = app.add_subcommand(
        "oracle-check", "Closed forms vs brute-force distributions plus sum rules");
    add_common_options(oracle_check, opt, true);
    oracle_check->add_option("--phase-samples", opt.cfg.phase_samples,
                             "Phase samples for the mean-field oracle");
    oracle_check
        ->add_flag("--inject-error", opt.cfg.inject_error,
                   "Corrupt one correlator by 1e-6 (harness self-test; must fail)")
        ->group("");  // hidden

    auto *haar_gen = app.add_subcommand("haar-gen", "Write a Haar unitary as JSON");
    add_common_options(haar_gen, opt, false);
    haar_gen->add_option("--submatrix-rows", opt.submatrix_rows,
                         "Also write the submatrix of input modes 1..N");

    // oracle-check is desk-scale: its trials are Haar draws per (n, m) cell.
    oracle_check->parse_complete_callback([&] {
        if (oracle_check->count("--trials") == 0) opt.cfg.trials = 50;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        resolve(opt);
        if (predict->parsed()) return cmd_predict(opt, predict_out);
        if (haar_gen->parsed()) return cmd_haar_gen(opt);
        if (oracle_check->parsed()) return cmd_oracle_check(opt);
        if (histogram->parsed()) {
            modecorr::write_histogram(modecorr::run_histogram(opt.cfg), opt.cfg);
            std::cout << "histogram artifacts written to " << opt.cfg.out_dir.string() << "\n";
            return kExitOk;
        }
        if (sweep->parsed()) {
            modecorr::write_sweep(modecorr::run_sweep(opt.cfg), opt.cfg);
            std::cout << "sweep.csv written to " << opt.cfg.out_dir.string() << "\n";
            return kExitOk;
        }
        if (scatter->parsed()) {
            modecorr::write_scatter(modecorr::run_scatter(opt.cfg), opt.cfg);
            std::cout << "scatter artifacts written to " << opt.cfg.out_dir.string() << "\n";
            return kExitOk;
        }
        if (certify_cmd->parsed()) {
            const modecorr::Species cloud_species =
                opt.cfg.species_all ? modecorr::Species::boson : opt.cfg.species.at(0);
            const auto result = modecorr::run_certify(opt.cfg, cloud_species);
            modecorr::write_certify(result, opt.cfg);
            std::cout << "cloud species: " << modecorr::to_string(cloud_species) << "\n";
            for (const auto &[sp, d] : result.verdict.distances) {
                const bool ok =
                    std::find(result.verdict.accepted.begin(), result.verdict.accepted.end(),
                              sp) != result.verdict.accepted.end();
                std::printf("%-16s distance %8.3f  %s\n", std::string(modecorr::to_string(sp)).c_str(),
                            d, ok ? "ACCEPTED" : "rejected");
            }
            if (!result.verdict.conclusive) {
                std::cout << "verdict inconclusive: " << result.verdict.diagnostic << "\n";
            }
            return kExitOk;
        }
    } catch (const modecorr::config_error &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const modecorr::domain_error &e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const modecorr::check_error &e) {
        std::cerr << "check failure: " << e.what() << "\n";
        return kExitCheck;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
