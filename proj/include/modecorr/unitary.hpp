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

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "modecorr/errors.hpp"
#include "modecorr/io.hpp"
#include "modecorr/rng.hpp"

namespace modecorr {

inline constexpr double kUnitarityTolerance = 1e-10;

/// Max-norm of U^dagger U - I. Zero for an exact unitary.
inline double unitarity_residual(const Eigen::MatrixXcd &u) {
    if (u.rows() != u.cols() || u.rows() == 0) {
        throw domain_error("unitarity_residual: matrix must be square and non-empty");
    }
    Eigen::MatrixXcd gram = u.adjoint() * u;
    gram.diagonal().array() -= 1.0;
    return gram.cwiseAbs().maxCoeff();
}

/// An m x m circuit matrix, unitary to kUnitarityTolerance.
struct UnitaryMatrix {
    Eigen::MatrixXcd entries;

    int m() const { return static_cast<int>(entries.rows()); }

    static UnitaryMatrix from_entries(Eigen::MatrixXcd e) {
        const double residual = unitarity_residual(e);
        if (residual > kUnitarityTolerance) {
            throw check_error("matrix is not unitary: residual " + g17(residual));
        }
        return UnitaryMatrix{std::move(e)};
    }
};

/// Ordered set of occupied input modes, 1-based and strictly increasing.
struct InputSelection {
    std::vector<int> modes;

    int n() const { return static_cast<int>(modes.size()); }

    static InputSelection from_modes(std::vector<int> modes) {
        if (modes.empty()) {
            throw domain_error("input selection must contain at least one mode");
        }
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (modes[i] < 1) {
                throw domain_error("input mode indices are 1-based");
            }
            if (i > 0 && modes[i] <= modes[i - 1]) {
                throw domain_error("input modes must be strictly increasing");
            }
        }
        return InputSelection{std::move(modes)};
    }

    static InputSelection first_n(int n) {
        std::vector<int> modes(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) modes[static_cast<std::size_t>(i)] = i + 1;
        return from_modes(std::move(modes));
    }
};

/// The n x m block of a circuit matrix whose rows are the occupied input
/// modes and whose columns span all output modes. Rows of a unitary, so each
/// row has unit norm.
struct Submatrix {
    Eigen::MatrixXcd entries;  // n rows, m columns

    int n() const { return static_cast<int>(entries.rows()); }
    int m() const { return static_cast<int>(entries.cols()); }

    static Submatrix from_entries(Eigen::MatrixXcd e) {
        if (e.rows() < 1 || e.cols() < 1 || e.rows() > e.cols()) {
            throw domain_error("submatrix must be n x m with 1 <= n <= m");
        }
        for (Eigen::Index r = 0; r < e.rows(); ++r) {
            const double norm_dev = std::abs(e.row(r).norm() - 1.0);
            if (norm_dev > kUnitarityTolerance) {
                throw check_error("submatrix row " + std::to_string(r + 1) +
                                  " is not unit-norm: deviation " + g17(norm_dev));
            }
        }
        return Submatrix{std::move(e)};
    }
};

namespace detail {

/// Complex Ginibre block with i.i.d. standard complex normal entries, filled
/// row-major so the draw order is pinned.
inline Eigen::MatrixXcd ginibre(int rows, int cols, RandomStream &rng) {
    Eigen::MatrixXcd g(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            g(r, c) = rng.complex_normal();
        }
    }
    return g;
}

/// Multiplies column j of q by r_jj / |r_jj|. Plain QR of a Ginibre matrix is
/// not Haar because the factorization leaves the diagonal-phase gauge to the
/// implementation; this correction removes the gauge.
inline void fix_phases(Eigen::MatrixXcd &q, const Eigen::MatrixXcd &qr_matrix) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const std::complex<double> d = qr_matrix(j, j);
        const double mag = std::abs(d);
        if (mag > 0.0) {
            q.col(j) *= d / mag;
        }
    }
}

}  // namespace detail

/// Haar-distributed m x m unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phase correction. Deterministic given the stream.
inline UnitaryMatrix haar_unitary(int m, RandomStream rng) {
    if (m < 1) {
        throw domain_error("haar_unitary: mode count must be >= 1");
    }
    const Eigen::MatrixXcd g = detail::ginibre(m, m, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    detail::fix_phases(q, qr.matrixQR());
    return UnitaryMatrix::from_entries(std::move(q));
}

inline UnitaryMatrix haar_unitary(int m, const RngSeed &seed) {
    return haar_unitary(m, RandomStream(seed));
}

/// Rows q_1..q_n of u, bit-exactly.
inline Submatrix extract_submatrix(const UnitaryMatrix &u, const InputSelection &sel) {
    const int m = u.m();
    const int n = sel.n();
    if (n >= m) {
        throw domain_error("extract_submatrix: requires n < m");
    }
    Eigen::MatrixXcd block(n, m);
    for (int k = 0; k < n; ++k) {
        const int mode = sel.modes[static_cast<std::size_t>(k)];
        if (mode < 1 || mode > m) {
            throw domain_error("extract_submatrix: mode " + std::to_string(mode) +
                               " out of range 1.." + std::to_string(m));
        }
        block.row(k) = u.entries.row(mode - 1);
    }
    return Submatrix{std::move(block)};
}

/// Samples the first n rows of a Haar unitary without forming the full
/// matrix: the phase-fixed thin QR of an m x n Ginibre block gives n
/// orthonormal columns distributed as the leading columns of a Haar matrix,
/// and their transpose has the same law as n rows (the Haar measure is
/// invariant under transposition). O(m n^2) instead of O(m^3).
inline Submatrix haar_submatrix(int n, int m, RandomStream rng) {
    if (n < 1 || n > m) {
        throw domain_error("haar_submatrix: requires 1 <= n <= m");
    }
    const Eigen::MatrixXcd g = detail::ginibre(m, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m, n);
    detail::fix_phases(q, qr.matrixQR());
    return Submatrix::from_entries(q.transpose());
}

// --- matrix file format ----------------------------------------------------
//
// {"m": <int>, "entries": [[[re, im], ... m columns], ... rows]}
// Submatrices carry an extra "n" and have n rows. Numbers are written with 17
// significant digits so values round-trip exactly.

namespace detail {

inline std::string entries_to_json(const Eigen::MatrixXcd &e) {
    std::string out = "[";
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
        out += (r == 0) ? "[" : ",[";
        for (Eigen::Index c = 0; c < e.cols(); ++c) {
            if (c > 0) out += ",";
            out += "[" + g17(e(r, c).real()) + "," + g17(e(r, c).imag()) + "]";
        }
        out += "]";
    }
    out += "]";
    return out;
}

inline Eigen::MatrixXcd entries_from_json(const nlohmann::json &j, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) {
        throw config_error("matrix file: wrong row count");
    }
    Eigen::MatrixXcd e(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto &row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<int>(row.size()) != cols) {
            throw config_error("matrix file: wrong column count");
        }
        for (int c = 0; c < cols; ++c) {
            const auto &cell = row.at(static_cast<std::size_t>(c));
            if (!cell.is_array() || cell.size() != 2) {
                throw config_error("matrix file: entries must be [re, im] pairs");
            }
            e(r, c) = {cell.at(0).get<double>(), cell.at(1).get<double>()};
        }
    }
    return e;
}

}  // namespace detail

inline std::string unitary_to_json(const UnitaryMatrix &u,
                                   const Provenance *prov = nullptr) {
    std::string out = "{\"m\":" + std::to_string(u.m());
    if (prov != nullptr) {
        out += ",\"provenance\":" + prov->to_json().dump();
    }
    out += ",\"entries\":" + detail::entries_to_json(u.entries) + "}";
    return out;
}

inline std::string submatrix_to_json(const Submatrix &s,
                                     const Provenance *prov = nullptr) {
    std::string out =
        "{\"n\":" + std::to_string(s.n()) + ",\"m\":" + std::to_string(s.m());
    if (prov != nullptr) {
        out += ",\"provenance\":" + prov->to_json().dump();
    }
    out += ",\"entries\":" + detail::entries_to_json(s.entries) + "}";
    return out;
}

inline UnitaryMatrix unitary_from_json(const std::string &text) {
    const auto j = nlohmann::json::parse(text);
    const int m = j.at("m").get<int>();
    if (m < 1) throw config_error("matrix file: m must be >= 1");
    return UnitaryMatrix::from_entries(detail::entries_from_json(j.at("entries"), m, m));
}

inline Submatrix submatrix_from_json(const std::string &text) {
    const auto j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    if (n < 1 || m < 1) throw config_error("matrix file: n and m must be >= 1");
    return Submatrix::from_entries(detail::entries_from_json(j.at("entries"), n, m));
}

}  // namespace modecorr
