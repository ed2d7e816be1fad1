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

#include <cmath>

#include "modecorr/errors.hpp"
#include "modecorr/species.hpp"

namespace modecorr {

/// Raw (non-central) ensemble moments of a single correlator over
/// Haar-distributed circuits.
struct MomentTriple {
    double m1 = 0.0;  // E[C]
    double m2 = 0.0;  // E[C^2]
    double m3 = 0.0;  // E[C^3]

    double variance() const { return m2 - m1 * m1; }
};

/// The benchmark statistics derived from a moment triple.
///   nm = m1 * m^2 / n           (normalised mean)
///   cv = sqrt(var) / m1         (signed; negative whenever the mean is)
///   s  = central skewness
struct BenchmarkStats {
    double nm = 0.0;
    double cv = 0.0;
    double s = 0.0;
};

namespace detail {

// Horner forms of the moment numerators, grouped by powers of m. The
// denominators stay factored; they cover ranges where their expanded forms
// would lose digits.

inline MomentTriple boson_moments(double n, double m) {
    MomentTriple t;
    t.m1 = n * (-m - n + 2) / (m * (m * m - 1));
    t.m2 = 2 * n * (m * m * (n + 1) + m * (9 * n - 11) + ((n - 2) * n + 5) * n - 4) /
           (m * m * (m + 2) * (m + 3) * (m * m - 1));
    const double p3 = (n + 15) * n + 2;
    const double p2 = ((3 * n + 6) * n + 213) * n - 222;
    const double p1 = (((-3 * n + 45) * n + 32) * n + 372) * n - 464;
    const double p0 = ((((3 * n - 6) * n + 45) * n + 78) * n + 168) * n - 288;
    t.m3 = -2 * n * (((p3 * m + p2) * m + p1) * m + p0) /
           (m * m * (m + 1) * (m + 2) * (m + 3) * (m + 4) * (m + 5) * (m * m - 1));
    return t;
}

inline MomentTriple fermion_moments(double n, double m) {
    MomentTriple t;
    t.m1 = n * (n - m) / (m * (m * m - 1));
    t.m2 = 2 * n * (n + 1) * (m - n) * (m - n + 1) /
           (m * m * (m + 2) * (m + 3) * (m * m - 1));
    t.m3 = -6 * n * (n + 1) * (n + 2) * (m - n) * (m - n + 1) * (m - n + 2) /
           (m * m * (m + 1) * (m + 2) * (m + 3) * (m + 4) * (m + 5) * (m * m - 1));
    return t;
}

inline MomentTriple distinguishable_moments(double n, double m) {
    MomentTriple t;
    t.m1 = -n / (m * (m + 1));
    t.m2 = n * (m * m * (n + 3) + m * (n - 5) + 2 * n - 2) /
           (m * m * (m + 2) * (m + 3) * (m * m - 1));
    t.m3 = -n *
           (m * m * ((n + 9) * n + 26) + m * ((5 * n + 21) * n - 62) + (12 * n + 60) * n - 72) /
           (m * m * (m + 2) * (m + 3) * (m + 4) * (m + 5) * (m * m - 1));
    return t;
}

inline MomentTriple simulated_moments(double n, double m) {
    MomentTriple t;
    t.m1 = -n * (m + n - 2) / (m * (m * m - 1));
    {
        const double q2 = ((2 * n - 1) * n + 4) * n - 1;
        const double q1 = ((18 * n - 25) * n + 4) * n - 1;
        const double q0 = ((((2 * n - 4) * n + 10) * n - 14) * n + 8) * n - 2;
        t.m2 = ((q2 * m + q1) * m + q0) /
               (m * m * (m + 2) * (m + 3) * (m * m - 1) * n);
    }
    {
        const double p3 = ((((-2 * n - 21) * n + 30) * n - 41) * n - 10) * n + 8;
        const double p2 = (((((-6 * n - 3) * n - 285) * n + 261) * n + 75) * n - 66) * n + 24;
        const double p1 =
            ((((((6 * n - 90) * n - 55) * n - 360) * n + 591) * n + 8) * n - 128) * n + 64;
        const double p0 =
            (((((((-6 * n + 12) * n - 90) * n - 120) * n - 24) * n + 396) * n - 168) * n - 48) * n +
            48;
        t.m3 = (((p3 * m + p2) * m + p1) * m + p0) /
               ((m - 1) * m * m * (m + 1) * (m + 1) * (m + 2) * (m + 3) * (m + 4) * (m + 5) * n *
                n);
    }
    return t;
}

}  // namespace detail

/// Closed-form ensemble moments for n particles in m modes. Valid for
/// 1 <= n < m; no asymptotic simplification is applied anywhere.
inline MomentTriple rmt_moments(Species species, int n, int m) {
    if (n < 1) {
        throw domain_error("rmt_moments: particle count must be >= 1");
    }
    if (n >= m) {
        throw domain_error("rmt_moments: requires n < m");
    }
    const double nd = n;
    const double md = m;
    switch (species) {
        case Species::boson:
            return detail::boson_moments(nd, md);
        case Species::fermion:
            return detail::fermion_moments(nd, md);
        case Species::distinguishable:
            return detail::distinguishable_moments(nd, md);
        case Species::simulated:
            return detail::simulated_moments(nd, md);
    }
    throw domain_error("unknown species value");
}

/// NM/CV/S from raw moments. CV keeps the sign of the mean: every species
/// here has a negative mean, so CV < 0, and comparisons against plots must
/// not take absolute values.
inline BenchmarkStats stats_from_moments(const MomentTriple &t, int n, int m) {
    if (t.m1 == 0.0) {
        throw domain_error("statistics: coefficient of variation undefined for zero mean");
    }
    const double var = t.m2 - t.m1 * t.m1;
    if (!(var > 0.0)) {
        throw domain_error("statistics: skewness undefined for zero variance");
    }
    BenchmarkStats out;
    out.nm = t.m1 * static_cast<double>(m) * static_cast<double>(m) / static_cast<double>(n);
    out.cv = std::sqrt(var) / t.m1;
    out.s = (t.m3 - 3.0 * t.m1 * t.m2 + 2.0 * t.m1 * t.m1 * t.m1) / (var * std::sqrt(var));
    return out;
}

inline BenchmarkStats rmt_statistics(Species species, int n, int m) {
    return stats_from_moments(rmt_moments(species, n, m), n, m);
}

}  // namespace modecorr
