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
#include <bit>
#include <complex>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "modecorr/correlators.hpp"
#include "modecorr/errors.hpp"
#include "modecorr/io.hpp"
#include "modecorr/rmt.hpp"
#include "modecorr/rng.hpp"
#include "modecorr/species.hpp"
#include "modecorr/stats.hpp"
#include "modecorr/unitary.hpp"

namespace modecorr {

// Desk-scale caps. The oracle is ground truth for small instances, not a
// production sampler; the caps keep every call well under a second.
inline constexpr int kPermanentMaxDim = 16;
inline constexpr int kBosonOracleMaxParticles = 5;
inline constexpr int kBosonOracleMaxModes = 12;
inline constexpr int kFermionOracleMaxParticles = 10;
inline constexpr int kFermionOracleMaxModes = 16;

namespace detail {

/// Ryser's inclusion-exclusion permanent with Gray-code subset iteration:
/// each step flips one column in or out of the running row sums, O(2^n * n)
/// total. Sign convention: perm(A) = (-1)^n * sum_S (-1)^{|S|} prod_r (row
/// sums over S).
template <typename Scalar>
Scalar permanent_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &a) {
    if (a.rows() != a.cols()) {
        throw domain_error("permanent: matrix must be square");
    }
    const int n = static_cast<int>(a.rows());
    if (n > kPermanentMaxDim) {
        throw domain_error("permanent: dimension exceeds cap of " +
                           std::to_string(kPermanentMaxDim));
    }
    if (n == 0) {
        return Scalar(1);
    }
    std::vector<Scalar> row_sums(static_cast<std::size_t>(n), Scalar(0));
    Scalar total = Scalar(0);
    std::uint32_t prev_gray = 0;
    const std::uint32_t subsets = std::uint32_t{1} << n;
    for (std::uint32_t k = 1; k < subsets; ++k) {
        const std::uint32_t gray = k ^ (k >> 1);
        const std::uint32_t changed = gray ^ prev_gray;
        const int col = std::countr_zero(changed);
        if (gray & changed) {
            for (int r = 0; r < n; ++r) row_sums[static_cast<std::size_t>(r)] += a(r, col);
        } else {
            for (int r = 0; r < n; ++r) row_sums[static_cast<std::size_t>(r)] -= a(r, col);
        }
        Scalar prod = row_sums[0];
        for (int r = 1; r < n; ++r) prod *= row_sums[static_cast<std::size_t>(r)];
        if (std::popcount(gray) & 1) {
            total -= prod;
        } else {
            total += prod;
        }
        prev_gray = gray;
    }
    return (n % 2) ? -total : total;
}

}  // namespace detail

/// Exact permanent of a complex square matrix (n <= 16).
inline std::complex<double> permanent(const Eigen::MatrixXcd &a) {
    return detail::permanent_impl<std::complex<double>>(a);
}

/// Exact permanent of a real square matrix (n <= 16).
inline double permanent(const Eigen::MatrixXd &a) {
    return detail::permanent_impl<double>(a);
}

/// Output occupation pattern: y[i] particles in output mode i+1, sum = n.
using Occupation = std::vector<int>;

/// Exact (or phase-averaged) probability distribution over all output
/// occupation patterns with sum n. Entries are kept in colex order of y.
struct OutputDistribution {
    Species species = Species::boson;
    int n = 0;
    int m = 0;
    std::vector<std::pair<Occupation, double>> entries;

    double probability_sum() const {
        KahanSum s;
        for (const auto &e : entries) s.add(e.second);
        return s.value();
    }
};

namespace detail {

/// All occupation vectors with sum n over m modes, in colex order: mass moves
/// from low to high indices, starting at (n, 0, ..., 0).
inline std::vector<Occupation> enumerate_occupations(int n, int m) {
    std::vector<Occupation> all;
    Occupation y(static_cast<std::size_t>(m), 0);
    y[0] = n;
    all.push_back(y);
    while (true) {
        int j = 0;
        while (y[static_cast<std::size_t>(j)] == 0) ++j;
        if (j == m - 1) break;
        const int t = y[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(j)] = 0;
        y[static_cast<std::size_t>(j + 1)] += 1;
        y[0] = t - 1;
        all.push_back(y);
    }
    return all;
}

/// Binary occupation vectors (n ones over m slots) in colex order; the
/// exponentially sparse fermion support is enumerated directly.
inline std::vector<Occupation> enumerate_binary_occupations(int n, int m) {
    std::vector<Occupation> all;
    std::vector<int> c(static_cast<std::size_t>(n));
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        Occupation y(static_cast<std::size_t>(m), 0);
        for (int pos : c) y[static_cast<std::size_t>(pos)] = 1;
        all.push_back(std::move(y));
        int i = 0;
        while (i < n) {
            const int cap = (i + 1 < n) ? c[static_cast<std::size_t>(i + 1)] : m;
            if (c[static_cast<std::size_t>(i)] + 1 < cap) break;
            ++i;
        }
        if (i == n) break;
        ++c[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) c[static_cast<std::size_t>(j)] = j;
    }
    return all;
}

/// n x n block whose columns are columns of `sub` taken with multiplicity y.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> columns_with_multiplicity(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &sub, const Occupation &y) {
    const int n = static_cast<int>(sub.rows());
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> block(n, n);
    int col = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (int rep = 0; rep < y[i]; ++rep) {
            block.col(col++) = sub.col(static_cast<Eigen::Index>(i));
        }
    }
    return block;
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;  // exact in double up to 16!
}

inline double occupation_factorial(const Occupation &y) {
    double f = 1.0;
    for (int yi : y) f *= factorial(yi);
    return f;
}

/// Normalization and positivity contract shared by every distribution
/// builder; clamps tiny negative rounding to zero afterwards.
inline void finalize_distribution(OutputDistribution &dist) {
    for (auto &e : dist.entries) {
        if (e.second < -1e-14) {
            throw check_error("distribution has negative probability: " + g17(e.second));
        }
        e.second = std::clamp(e.second, 0.0, 1.0);
    }
    const double total = dist.probability_sum();
    if (std::abs(total - 1.0) > 1e-10) {
        throw check_error("distribution does not normalize: sum = " + g17(total));
    }
}

inline void check_boson_caps(const Submatrix &sub) {
    if (sub.n() > kBosonOracleMaxParticles || sub.m() > kBosonOracleMaxModes) {
        throw domain_error("oracle distribution: size caps are n <= " +
                           std::to_string(kBosonOracleMaxParticles) + ", m <= " +
                           std::to_string(kBosonOracleMaxModes));
    }
}

}  // namespace detail

/// Exact boson output distribution: p(y) = |perm(M_y)|^2 / prod_i y_i!.
inline OutputDistribution boson_distribution(const Submatrix &sub) {
    detail::check_boson_caps(sub);
    OutputDistribution dist{Species::boson, sub.n(), sub.m(), {}};
    for (auto &y : detail::enumerate_occupations(sub.n(), sub.m())) {
        const auto block = detail::columns_with_multiplicity<std::complex<double>>(sub.entries, y);
        const double p = std::norm(permanent(block)) / detail::occupation_factorial(y);
        dist.entries.emplace_back(std::move(y), p);
    }
    detail::finalize_distribution(dist);
    return dist;
}

/// Exact fermion output distribution: p(y) = |det(M_y)|^2 over binary y.
inline OutputDistribution fermion_distribution(const Submatrix &sub) {
    if (sub.n() > kFermionOracleMaxParticles || sub.m() > kFermionOracleMaxModes) {
        throw domain_error("fermion distribution: size caps are n <= " +
                           std::to_string(kFermionOracleMaxParticles) + ", m <= " +
                           std::to_string(kFermionOracleMaxModes));
    }
    OutputDistribution dist{Species::fermion, sub.n(), sub.m(), {}};
    for (auto &y : detail::enumerate_binary_occupations(sub.n(), sub.m())) {
        const auto block = detail::columns_with_multiplicity<std::complex<double>>(sub.entries, y);
        const double p = std::norm(block.determinant());
        dist.entries.emplace_back(std::move(y), p);
    }
    detail::finalize_distribution(dist);
    return dist;
}

/// Exact distribution for distinguishable particles: permanent of the
/// element-wise |U|^2 matrix with columns repeated per y.
inline OutputDistribution distinguishable_distribution(const Submatrix &sub) {
    detail::check_boson_caps(sub);
    const Eigen::MatrixXd probs = sub.entries.cwiseAbs2();
    OutputDistribution dist{Species::distinguishable, sub.n(), sub.m(), {}};
    for (auto &y : detail::enumerate_occupations(sub.n(), sub.m())) {
        const auto block = detail::columns_with_multiplicity<double>(probs, y);
        const double p = permanent(block) / detail::occupation_factorial(y);
        dist.entries.emplace_back(std::move(y), p);
    }
    detail::finalize_distribution(dist);
    return dist;
}

/// Mean-field sampler distribution: for each random phase vector theta the n
/// particles are i.i.d. over modes with p_i = |sum_r e^{i theta_r} U(r,i)|^2/n,
/// giving a multinomial; the returned distribution is the Monte Carlo phase
/// average of those multinomials. Each multinomial normalizes exactly, so the
/// average does too, for any sample count.
inline OutputDistribution simulated_distribution(const Submatrix &sub, long phase_samples,
                                                 RandomStream rng) {
    detail::check_boson_caps(sub);
    if (phase_samples < 1) {
        throw domain_error("simulated_distribution: phase_samples must be >= 1");
    }
    const int n = sub.n();
    const int m = sub.m();
    const auto configs = detail::enumerate_occupations(n, m);
    std::vector<double> coef(configs.size());
    for (std::size_t e = 0; e < configs.size(); ++e) {
        coef[e] = detail::factorial(n) / detail::occupation_factorial(configs[e]);
    }
    std::vector<KahanSum> acc(configs.size());
    std::vector<std::complex<double>> phase(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(m));
    for (long s = 0; s < phase_samples; ++s) {
        for (int r = 0; r < n; ++r) {
            const double a = rng.phase();
            phase[static_cast<std::size_t>(r)] = {std::cos(a), std::sin(a)};
        }
        for (int i = 0; i < m; ++i) {
            std::complex<double> amp = 0.0;
            for (int r = 0; r < n; ++r) {
                amp += phase[static_cast<std::size_t>(r)] * sub.entries(r, i);
            }
            p[static_cast<std::size_t>(i)] = std::norm(amp) / n;
        }
        for (std::size_t e = 0; e < configs.size(); ++e) {
            double prob = coef[e];
            const auto &y = configs[e];
            for (int i = 0; i < m; ++i) {
                for (int rep = 0; rep < y[static_cast<std::size_t>(i)]; ++rep) {
                    prob *= p[static_cast<std::size_t>(i)];
                }
            }
            acc[e].add(prob);
        }
    }
    OutputDistribution dist{Species::simulated, n, m, {}};
    dist.entries.reserve(configs.size());
    for (std::size_t e = 0; e < configs.size(); ++e) {
        dist.entries.emplace_back(configs[e], acc[e].value() / static_cast<double>(phase_samples));
    }
    detail::finalize_distribution(dist);
    return dist;
}

/// Covariance of occupation numbers of modes i and j (1-based) under an
/// exact distribution. i == j is allowed and gives Var(n_i), which the
/// particle-number sum rule needs.
inline double oracle_correlator(const OutputDistribution &dist, int i, int j) {
    if (i < 1 || j < 1 || i > dist.m || j > dist.m) {
        throw domain_error("oracle_correlator: mode indices out of range");
    }
    KahanSum mean_i, mean_j, mean_ij;
    for (const auto &[y, p] : dist.entries) {
        const auto yi = static_cast<double>(y[static_cast<std::size_t>(i - 1)]);
        const auto yj = static_cast<double>(y[static_cast<std::size_t>(j - 1)]);
        mean_i.add(p * yi);
        mean_j.add(p * yj);
        mean_ij.add(p * yi * yj);
    }
    return mean_ij.value() - mean_i.value() * mean_j.value();
}

/// Finite-shot estimates of all pairwise occupation covariances, drawn
/// i.i.d. from an exact distribution. Standard errors scale as
/// O(1/sqrt(shots)); with a single shot the estimate exists but carries no
/// spread information, flagged via `low_confidence`.
struct SampledCounts {
    long shots = 0;
    bool low_confidence = false;
    Eigen::MatrixXd covariance;      // m x m plug-in covariance estimates
    Eigen::MatrixXd standard_error;  // per-entry standard errors
};

inline SampledCounts sampled_counts(const OutputDistribution &dist, long shots,
                                    RandomStream rng) {
    if (shots < 1) {
        throw domain_error("sampled_counts: shots must be >= 1");
    }
    const std::size_t k = dist.entries.size();
    std::vector<double> cdf(k);
    double running = 0.0;
    for (std::size_t e = 0; e < k; ++e) {
        running += dist.entries[e].second;
        cdf[e] = running;
    }
    std::vector<long> tally(k, 0);
    for (long s = 0; s < shots; ++s) {
        const double u = rng.uniform01() * running;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t idx = std::min(static_cast<std::size_t>(it - cdf.begin()), k - 1);
        ++tally[idx];
    }
    const int m = dist.m;
    const double t = static_cast<double>(shots);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (std::size_t e = 0; e < k; ++e) {
        if (tally[e] == 0) continue;
        for (int i = 0; i < m; ++i) {
            mean[i] += tally[e] * static_cast<double>(dist.entries[e].first[static_cast<std::size_t>(i)]);
        }
    }
    mean /= t;
    SampledCounts out;
    out.shots = shots;
    out.low_confidence = shots < 2;
    out.covariance = Eigen::MatrixXd::Zero(m, m);
    out.standard_error = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            KahanSum prod, prod_sq;
            for (std::size_t e = 0; e < k; ++e) {
                if (tally[e] == 0) continue;
                const auto &y = dist.entries[e].first;
                const double di = y[static_cast<std::size_t>(i)] - mean[i];
                const double dj = y[static_cast<std::size_t>(j)] - mean[j];
                prod.add(tally[e] * di * dj);
                prod_sq.add(tally[e] * di * dj * di * dj);
            }
            const double c = prod.value() / t;
            out.covariance(i, j) = out.covariance(j, i) = c;
            if (shots >= 2) {
                const double var = std::max(prod_sq.value() / t - c * c, 0.0);
                out.standard_error(i, j) = out.standard_error(j, i) = std::sqrt(var / t);
            }
        }
    }
    return out;
}

/// Monte Carlo average of the closed-form correlator of the fixed pair
/// (1, 2) over independent Haar draws — the same ensemble the closed-form
/// moment predictions integrate over. Returns the three raw moment estimates
/// with their standard errors.
struct McMoments {
    MomentTriple estimate;
    MomentTriple standard_error;
    long trials = 0;
};

inline McMoments mc_haar_moments(Species species, int n, int m, long trials,
                                 const RngSeed &seed) {
    if (trials < 100) {
        throw domain_error("mc_haar_moments: trials must be >= 100");
    }
    if (n < 1 || n >= m) {
        throw domain_error("mc_haar_moments: requires 1 <= n < m");
    }
    std::array<KahanSum, 6> power_sums;  // sums of c^1 .. c^6
    for (long t = 0; t < trials; ++t) {
        const Submatrix sub = haar_submatrix(n, m, RandomStream(seed, static_cast<std::uint64_t>(t)));
        const double c = correlator(sub, 1, 2, species);
        double pw = 1.0;
        for (auto &s : power_sums) {
            pw *= c;
            s.add(pw);
        }
    }
    const double t = static_cast<double>(trials);
    McMoments out;
    out.trials = trials;
    const auto mean_of = [&](int p) { return power_sums[static_cast<std::size_t>(p - 1)].value() / t; };
    const auto se_of = [&](int p) {
        const double mu = mean_of(p);
        const double second = mean_of(2 * p);
        return std::sqrt(std::max(second - mu * mu, 0.0) / (t - 1.0));
    };
    out.estimate = MomentTriple{mean_of(1), mean_of(2), mean_of(3)};
    out.standard_error = MomentTriple{se_of(1), se_of(2), se_of(3)};
    return out;
}

/// Monte Carlo phase average of the mean-field correlator C_ij with a
/// leave-one-batch-out jackknife standard error. The correlator is a smooth
/// function of three sample means, so the jackknife keeps the estimate free
/// of the product-of-means bias that plain batch means carry. Independent of
/// the closed-form path: works from single-particle probabilities only.
struct McEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    long samples = 0;
    int batches = 0;
};

inline McEstimate simulated_correlator_mc(const Submatrix &sub, int i, int j,
                                          long phase_samples, int batches, RandomStream rng) {
    if (i < 1 || j < 1 || i > sub.m() || j > sub.m() || i == j) {
        throw domain_error("simulated_correlator_mc: invalid mode pair");
    }
    if (batches < 2 || phase_samples < batches) {
        throw domain_error("simulated_correlator_mc: needs phase_samples >= batches >= 2");
    }
    const int n = sub.n();
    const long base = phase_samples / batches;
    const long leftover = phase_samples % batches;
    std::vector<double> sum_pp, sum_pi, sum_pj, sizes;
    std::vector<std::complex<double>> phase(static_cast<std::size_t>(n));
    for (int b = 0; b < batches; ++b) {
        const long size = base + (b < leftover ? 1 : 0);
        KahanSum pp, pi, pj;
        for (long s = 0; s < size; ++s) {
            for (int r = 0; r < n; ++r) {
                const double a = rng.phase();
                phase[static_cast<std::size_t>(r)] = {std::cos(a), std::sin(a)};
            }
            std::complex<double> amp_i = 0.0, amp_j = 0.0;
            for (int r = 0; r < n; ++r) {
                amp_i += phase[static_cast<std::size_t>(r)] * sub.entries(r, i - 1);
                amp_j += phase[static_cast<std::size_t>(r)] * sub.entries(r, j - 1);
            }
            const double p_i = std::norm(amp_i) / n;
            const double p_j = std::norm(amp_j) / n;
            pp.add(p_i * p_j);
            pi.add(p_i);
            pj.add(p_j);
        }
        sum_pp.push_back(pp.value());
        sum_pi.push_back(pi.value());
        sum_pj.push_back(pj.value());
        sizes.push_back(static_cast<double>(size));
    }
    const auto assemble = [n](double pp, double pi, double pj, double count) {
        return n * (n - 1.0) * (pp / count) - (n * pi / count) * (n * pj / count);
    };
    KahanSum total_pp, total_pi, total_pj;
    for (int b = 0; b < batches; ++b) {
        total_pp.add(sum_pp[static_cast<std::size_t>(b)]);
        total_pi.add(sum_pi[static_cast<std::size_t>(b)]);
        total_pj.add(sum_pj[static_cast<std::size_t>(b)]);
    }
    const auto total = static_cast<double>(phase_samples);
    std::vector<double> loo(static_cast<std::size_t>(batches));
    KahanSum loo_mean;
    for (int b = 0; b < batches; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        loo[bi] = assemble(total_pp.value() - sum_pp[bi], total_pi.value() - sum_pi[bi],
                           total_pj.value() - sum_pj[bi], total - sizes[bi]);
        loo_mean.add(loo[bi]);
    }
    const double mean_loo = loo_mean.value() / batches;
    KahanSum var_acc;
    for (double v : loo) var_acc.add((v - mean_loo) * (v - mean_loo));
    McEstimate out;
    out.value = assemble(total_pp.value(), total_pi.value(), total_pj.value(), total);
    out.standard_error =
        std::sqrt(std::max(var_acc.value(), 0.0) * (batches - 1.0) / batches);
    out.samples = phase_samples;
    out.batches = batches;
    return out;
}

/// {"species":..., "n":..., "m":..., "entries": [{"y": [...], "p": ...}]}
inline nlohmann::json distribution_to_json(const OutputDistribution &dist,
                                           const Provenance *prov = nullptr) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto &[y, p] : dist.entries) {
        entries.push_back({{"y", y}, {"p", p}});
    }
    nlohmann::json out = {
        {"species", to_string(dist.species)},
        {"n", dist.n},
        {"m", dist.m},
        {"entries", entries},
    };
    if (prov != nullptr) {
        out["provenance"] = prov->to_json();
    }
    return out;
}

}  // namespace modecorr
