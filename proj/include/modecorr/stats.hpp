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
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "modecorr/correlators.hpp"
#include "modecorr/errors.hpp"
#include "modecorr/rmt.hpp"
#include "modecorr/species.hpp"

namespace modecorr {

/// Kahan compensated accumulator. Dataset sizes reach ~4.5e4 values whose
/// third powers amplify rounding, and summary means must be independent of
/// accumulation order to ~1e-15.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    double value() const { return sum; }
};

/// Raw population moments of a dataset: mean of values, squares and cubes.
/// No bias correction; a C-dataset is the complete population of pairs.
inline MomentTriple dataset_moments(const CDataset &ds) {
    if (ds.values.empty()) {
        throw domain_error("dataset_moments: empty dataset");
    }
    KahanSum s1, s2, s3;
    for (double v : ds.values) {
        s1.add(v);
        s2.add(v * v);
        s3.add(v * v * v);
    }
    const double t = static_cast<double>(ds.values.size());
    return MomentTriple{s1.value() / t, s2.value() / t, s3.value() / t};
}

/// Empirical NM/CV/S of a dataset, same formulas as the ensemble predictions
/// with n and m taken from the dataset metadata.
inline BenchmarkStats dataset_statistics(const CDataset &ds) {
    return stats_from_moments(dataset_moments(ds), ds.n, ds.m);
}

/// Mean and spread of a (CV, S) cloud sampled over t submatrices.
/// `covariance` is the bias-corrected (t-1) sample covariance — the cloud is
/// a sample of a notional infinite ensemble — and `standard_error_cov` is
/// covariance / t, the covariance of the sample mean.
struct CloudSummary {
    long t = 0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d standard_error_cov = Eigen::Matrix2d::Zero();
};

inline CloudSummary cloud_summary(const std::vector<std::array<double, 2>> &points) {
    const long t = static_cast<long>(points.size());
    if (t < 2) {
        throw domain_error("cloud_summary: needs at least two points");
    }
    CloudSummary out;
    out.t = t;
    KahanSum mx, my;
    for (const auto &p : points) {
        mx.add(p[0]);
        my.add(p[1]);
    }
    out.mean << mx.value() / static_cast<double>(t), my.value() / static_cast<double>(t);
    KahanSum cxx, cxy, cyy;
    for (const auto &p : points) {
        const double dx = p[0] - out.mean[0];
        const double dy = p[1] - out.mean[1];
        cxx.add(dx * dx);
        cxy.add(dx * dy);
        cyy.add(dy * dy);
    }
    const double denom = static_cast<double>(t - 1);
    out.covariance << cxx.value() / denom, cxy.value() / denom, cxy.value() / denom,
        cyy.value() / denom;
    out.standard_error_cov = out.covariance / static_cast<double>(t);
    return out;
}

/// Outcome of testing ensemble predictions against a cloud: the Mahalanobis
/// distance of each prediction from the cloud mean under the standard-error
/// covariance, and the set accepted at threshold k. The accepted set may be
/// empty; a degenerate cloud yields an inconclusive verdict instead of
/// accepting anything.
struct Verdict {
    double k = 4.0;
    bool conclusive = true;
    std::string diagnostic;
    std::map<Species, double> distances;
    std::vector<Species> accepted;
};

namespace detail {

inline bool invert_2x2(const Eigen::Matrix2d &c, Eigen::Matrix2d &inv) {
    const double det = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
    const double scale = (c(0, 0) + c(1, 1)) / 2.0;
    if (!(det > 0.0) || !std::isfinite(det) || det < 1e-28 * scale * scale) {
        return false;
    }
    inv << c(1, 1) / det, -c(0, 1) / det, -c(1, 0) / det, c(0, 0) / det;
    return true;
}

}  // namespace detail

/// Mahalanobis distance of point x from the cloud mean under cov.
inline double mahalanobis_distance(const Eigen::Vector2d &x, const Eigen::Vector2d &mean,
                                   const Eigen::Matrix2d &cov) {
    Eigen::Matrix2d inv;
    if (!detail::invert_2x2(cov, inv)) {
        throw domain_error("mahalanobis_distance: degenerate covariance");
    }
    const Eigen::Vector2d d = x - mean;
    const double q = d.dot(inv * d);
    return std::sqrt(std::max(q, 0.0));
}

/// Tests each species prediction against the cloud. Singular standard-error
/// covariances get a small ridge (1e-12 of the mean diagonal) before
/// inverting; if that still fails the verdict is inconclusive.
inline Verdict certify(const CloudSummary &cloud,
                       const std::map<Species, BenchmarkStats> &predictions, double k = 4.0) {
    if (!(k > 0.0)) {
        throw domain_error("certify: threshold k must be positive");
    }
    Verdict v;
    v.k = k;
    Eigen::Matrix2d cov = cloud.standard_error_cov;
    Eigen::Matrix2d inv;
    if (!detail::invert_2x2(cov, inv)) {
        const double ridge = 1e-12 * (cov(0, 0) + cov(1, 1)) / 2.0;
        cov(0, 0) += ridge;
        cov(1, 1) += ridge;
        if (!detail::invert_2x2(cov, inv)) {
            v.conclusive = false;
            v.diagnostic = "standard-error covariance degenerate after regularization";
            return v;
        }
        v.diagnostic = "standard-error covariance regularized";
    }
    for (const auto &[sp, stats] : predictions) {
        const Eigen::Vector2d x(stats.cv, stats.s);
        const Eigen::Vector2d d = x - cloud.mean;
        const double dist = std::sqrt(std::max(d.dot(inv * d), 0.0));
        v.distances[sp] = dist;
        if (dist <= k) {
            v.accepted.push_back(sp);
        }
    }
    return v;
}

/// {"k":..., "distances": {species: d}, "accepted": [species...]}
inline nlohmann::json verdict_to_json(const Verdict &v) {
    nlohmann::json distances = nlohmann::json::object();
    for (const auto &[sp, d] : v.distances) {
        distances[std::string(to_string(sp))] = d;
    }
    nlohmann::json accepted = nlohmann::json::array();
    for (Species sp : v.accepted) {
        accepted.push_back(std::string(to_string(sp)));
    }
    nlohmann::json out = {
        {"k", v.k},
        {"distances", distances},
        {"accepted", accepted},
        {"conclusive", v.conclusive},
    };
    if (!v.diagnostic.empty()) {
        out["diagnostic"] = v.diagnostic;
    }
    return out;
}

}  // namespace modecorr
