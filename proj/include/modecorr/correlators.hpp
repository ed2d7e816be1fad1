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

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "modecorr/errors.hpp"
#include "modecorr/io.hpp"
#include "modecorr/species.hpp"
#include "modecorr/unitary.hpp"

namespace modecorr {

/// The assembled correlator expressions are real up to rounding; a larger
/// imaginary residue indicates a bug, not data.
inline constexpr double kImagResidueTolerance = 1e-12;

/// All m(m-1)/2 two-point output-mode correlators C_ij (i < j, lexicographic)
/// for one species and one submatrix.
struct CDataset {
    Species species = Species::boson;
    int n = 0;
    int m = 0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    /// Position of pair (i, j), 1 <= i < j <= m, in lexicographic order.
    static std::size_t pair_index(int i, int j, int m) {
        const auto im = static_cast<std::size_t>(i - 1);
        return im * static_cast<std::size_t>(m) - im * static_cast<std::size_t>(i) / 2 +
               static_cast<std::size_t>(j - i - 1);
    }
};

namespace detail {

/// Per-pair building blocks for the closed-form correlators of all species.
///
/// With a_k = U_sub(k, i) * conj(U_sub(k, j)):
///   diagonal  = sum_k |U_sub(k,i)|^2 |U_sub(k,j)|^2
///   exchange  = sum_{k != l} a_k conj(a_l)   (real up to rounding)
///   colnorm_i = sum_k |U_sub(k,i)|^2, likewise colnorm_j
struct PairSums {
    double diagonal = 0.0;
    std::complex<double> exchange = 0.0;
    double colnorm_i = 0.0;
    double colnorm_j = 0.0;
};

/// Direct evaluation, O(n) for the products and O(n^2) for the exchange sum.
/// `scratch` must have at least n slots and is reused across pairs.
inline PairSums pair_sums(const Eigen::MatrixXcd &sub, int col_i, int col_j,
                          std::complex<double> *scratch) {
    const int n = static_cast<int>(sub.rows());
    PairSums out;
    for (int k = 0; k < n; ++k) {
        const std::complex<double> ui = sub(k, col_i);
        const std::complex<double> uj = sub(k, col_j);
        scratch[k] = ui * std::conj(uj);
        out.diagonal += std::norm(scratch[k]);
        out.colnorm_i += std::norm(ui);
        out.colnorm_j += std::norm(uj);
    }
    std::complex<double> exchange = 0.0;
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (l == k) continue;
            exchange += scratch[k] * std::conj(scratch[l]);
        }
    }
    out.exchange = exchange;
    return out;
}

inline double checked_real(std::complex<double> value) {
    if (std::abs(value.imag()) > kImagResidueTolerance) {
        throw check_error("correlator has non-negligible imaginary residue: " +
                          g17(value.imag()));
    }
    return value.real();
}

/// Species closed forms assembled from the shared sums. The exchange term
/// enters with +1 for bosons, -1 for fermions, 0 for distinguishable
/// particles and weight (1 - 1/n) for simulated bosons, which additionally
/// subtract the factorized all-pairs term colnorm_i * colnorm_j / n.
inline double assemble_correlator(Species s, const PairSums &ps, int n) {
    const double ex = checked_real(ps.exchange);
    switch (s) {
        case Species::boson:
            return -ps.diagonal + ex;
        case Species::fermion:
            return -ps.diagonal - ex;
        case Species::distinguishable:
            return -ps.diagonal;
        case Species::simulated:
            return (1.0 - 1.0 / n) * ex - ps.colnorm_i * ps.colnorm_j / n;
    }
    throw domain_error("unknown species value");
}

inline void check_pair(int i, int j, int m) {
    if (i < 1 || j < 1 || i > m || j > m) {
        throw domain_error("correlator: mode indices out of range 1.." + std::to_string(m));
    }
    if (i == j) {
        throw domain_error("correlator: diagonal C_ii is not defined");
    }
    if (i > j) {
        throw domain_error("correlator: requires i < j");
    }
}

}  // namespace detail

/// Exact two-point correlator C_ij for output modes i < j (1-based).
inline double correlator(const Submatrix &sub, int i, int j, Species species) {
    detail::check_pair(i, j, sub.m());
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(sub.n()));
    const auto sums = detail::pair_sums(sub.entries, i - 1, j - 1, scratch.data());
    return detail::assemble_correlator(species, sums, sub.n());
}

/// The full C-dataset: one value per pair (i, j), i < j, lexicographic.
inline CDataset c_dataset(const Submatrix &sub, Species species) {
    const int n = sub.n();
    const int m = sub.m();
    CDataset ds;
    ds.species = species;
    ds.n = n;
    ds.m = m;
    ds.values.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2);
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
    for (int i = 1; i < m; ++i) {
        for (int j = i + 1; j <= m; ++j) {
            const auto sums = detail::pair_sums(sub.entries, i - 1, j - 1, scratch.data());
            ds.values.push_back(detail::assemble_correlator(species, sums, n));
        }
    }
    return ds;
}

/// Datasets for all four species in one pass over the pairs; the per-pair
/// sums are shared, which matters when sweeping thousands of submatrices.
/// Indexed in kAllSpecies order.
inline std::array<CDataset, 4> c_datasets_all(const Submatrix &sub) {
    const int n = sub.n();
    const int m = sub.m();
    std::array<CDataset, 4> out;
    for (Species sp : kAllSpecies) {
        auto &ds = out[species_index(sp)];
        ds.species = sp;
        ds.n = n;
        ds.m = m;
        ds.values.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2);
    }
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
    for (int i = 1; i < m; ++i) {
        for (int j = i + 1; j <= m; ++j) {
            const auto sums = detail::pair_sums(sub.entries, i - 1, j - 1, scratch.data());
            for (Species sp : kAllSpecies) {
                out[species_index(sp)].values.push_back(
                    detail::assemble_correlator(sp, sums, n));
            }
        }
    }
    return out;
}

// --- C-dataset files ---------------------------------------------------------

/// CSV: header "i,j,value", one row per pair in lexicographic order.
inline std::string cdataset_to_csv(const CDataset &ds, const Provenance &prov) {
    std::string out = prov.csv_comment_block();
    out += "i,j,value\n";
    std::size_t k = 0;
    for (int i = 1; i < ds.m; ++i) {
        for (int j = i + 1; j <= ds.m; ++j, ++k) {
            out += std::to_string(i) + "," + std::to_string(j) + "," + g17(ds.values[k]) + "\n";
        }
    }
    return out;
}

/// Metadata sidecar for a dataset CSV.
inline nlohmann::json cdataset_metadata(const CDataset &ds, std::uint64_t source_seed,
                                        const Provenance &prov) {
    return {
        {"species", to_string(ds.species)},
        {"n", ds.n},
        {"m", ds.m},
        {"source_seed", source_seed},
        {"provenance", prov.to_json()},
    };
}

}  // namespace modecorr
