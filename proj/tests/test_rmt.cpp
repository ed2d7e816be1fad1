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

#include "modecorr/rmt.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "rational_rmt.hpp"

using namespace modecorr;
using modecorr_test::Rat;
using modecorr_test::rational_moments;

namespace {

double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

TEST(RmtMoments, FermionFirstMomentSmallCase) {
    // n = 2, m = 3: first moment 2(2-3)/(3*8) = -1/12.
    EXPECT_LE(rel_diff(rmt_moments(Species::fermion, 2, 3).m1, -1.0 / 12.0), 1e-15);
}

TEST(RmtMoments, SingleParticleTripleAtFourModes) {
    for (Species sp : kAllSpecies) {
        const auto t = rmt_moments(sp, 1, 4);
        EXPECT_LE(rel_diff(t.m1, -1.0 / 20.0), 1e-13) << to_string(sp);
        EXPECT_LE(rel_diff(t.m2, 1.0 / 210.0), 1e-13) << to_string(sp);
        EXPECT_LE(rel_diff(t.m3, -1.0 / 1680.0), 1e-13) << to_string(sp);
    }
}

TEST(RmtMoments, BosonAndMeanFieldShareTheMean) {
    for (int n = 1; n <= 7; ++n) {
        for (int m : {8, 33, 120, 301}) {
            const double b = rmt_moments(Species::boson, n, m).m1;
            const double s = rmt_moments(Species::simulated, n, m).m1;
            EXPECT_LE(rel_diff(b, s), 1e-15);
        }
    }
}

TEST(RmtMoments, DomainErrors) {
    EXPECT_THROW(rmt_moments(Species::boson, 0, 5), domain_error);
    EXPECT_THROW(rmt_moments(Species::boson, 5, 5), domain_error);
    EXPECT_THROW(rmt_moments(Species::boson, 6, 5), domain_error);
}

TEST(RmtMoments, VarianceNonNegativeAcrossGrid) {
    for (int n = 1; n <= 8; ++n) {
        for (int m = n + 1; m <= 64; ++m) {
            for (Species sp : kAllSpecies) {
                const auto t = rmt_moments(sp, n, m);
                EXPECT_GE(t.m2, t.m1 * t.m1 * (1.0 - 1e-15))
                    << to_string(sp) << " n=" << n << " m=" << m;
            }
        }
    }
}

TEST(RmtStatistics, DistinguishableNormalizedMean) {
    // m1 = -n/(m(m+1)) so NM = -m/(m+1) for every n.
    for (int n : {1, 3, 6}) {
        for (int m : {7, 101, 500}) {
            EXPECT_LE(rel_diff(rmt_statistics(Species::distinguishable, n, m).nm,
                               -static_cast<double>(m) / (m + 1.0)),
                      1e-14);
        }
    }
}

TEST(RmtStatistics, PublishedScaleNormalizedMeans) {
    EXPECT_LE(rel_diff(rmt_statistics(Species::boson, 6, 120).nm, -14880.0 / 14399.0), 1e-12);
    EXPECT_LE(rel_diff(rmt_statistics(Species::fermion, 6, 120).nm, -13680.0 / 14399.0), 1e-12);
}

TEST(RmtStatistics, CoefficientOfVariationKeepsSign) {
    // Means are negative everywhere in the valid domain, so CV must be too.
    for (Species sp : kAllSpecies) {
        for (int m : {20, 120, 300}) {
            EXPECT_LT(rmt_statistics(sp, 6, m).cv, 0.0) << to_string(sp);
        }
    }
}

TEST(RmtStatistics, SpeciesOrderingOfNormalizedMeans) {
    for (int n = 2; n <= 6; ++n) {
        for (int m = 20; m <= 300; m += 20) {
            const double f = rmt_statistics(Species::fermion, n, m).nm;
            const double d = rmt_statistics(Species::distinguishable, n, m).nm;
            const double b = rmt_statistics(Species::boson, n, m).nm;
            const double s = rmt_statistics(Species::simulated, n, m).nm;
            EXPECT_GT(f, d) << "n=" << n << " m=" << m;
            EXPECT_GT(d, b) << "n=" << n << " m=" << m;
            EXPECT_NEAR(b, s, 1e-12 * std::abs(b));
        }
    }
}

TEST(RmtStatistics, SingleParticleCollapseOverAllModeCounts) {
    for (int m = 2; m <= 1000; ++m) {
        const auto ref = rmt_moments(Species::boson, 1, m);
        for (Species sp : {Species::fermion, Species::distinguishable, Species::simulated}) {
            const auto t = rmt_moments(sp, 1, m);
            EXPECT_LE(rel_diff(t.m1, ref.m1), 1e-14) << to_string(sp) << " m=" << m;
            EXPECT_LE(rel_diff(t.m2, ref.m2), 1e-14) << to_string(sp) << " m=" << m;
            EXPECT_LE(rel_diff(t.m3, ref.m3), 1e-14) << to_string(sp) << " m=" << m;
        }
    }
}

TEST(RmtMoments, MeanDecaysAsInverseSquare) {
    // |m1| * m^2 must stay bounded for fixed n as m grows.
    for (Species sp : kAllSpecies) {
        for (int n : {2, 4, 6}) {
            for (int m = 100; m <= 1000; m += 100) {
                const double scaled = std::abs(rmt_moments(sp, n, m).m1) * m * static_cast<double>(m);
                EXPECT_LT(scaled, 2.0 * n) << to_string(sp) << " n=" << n << " m=" << m;
            }
        }
    }
}

TEST(RmtStatistics, UndefinedStatisticsThrow) {
    EXPECT_THROW(stats_from_moments(MomentTriple{0.0, 1.0, 0.0}, 2, 5), domain_error);
    EXPECT_THROW(stats_from_moments(MomentTriple{0.5, 0.25, 0.0}, 2, 5), domain_error);
}

// Cross-check the double-precision path against an exact-rational second
// transcription of the same formulas.
TEST(RmtRationalCrossCheck, FullSmallGridAndSpotChecks) {
    const auto check = [](Species sp, int n, int m) {
        const auto d = rmt_moments(sp, n, m);
        const auto r = rational_moments(sp, n, m);
        EXPECT_LE(rel_diff(d.m1, r.m1.to_double()), 1e-13)
            << to_string(sp) << " n=" << n << " m=" << m;
        EXPECT_LE(rel_diff(d.m2, r.m2.to_double()), 1e-13)
            << to_string(sp) << " n=" << n << " m=" << m;
        EXPECT_LE(rel_diff(d.m3, r.m3.to_double()), 1e-13)
            << to_string(sp) << " n=" << n << " m=" << m;
    };
    for (Species sp : kAllSpecies) {
        for (int n = 1; n <= 8; ++n) {
            for (int m = n + 1; m <= 60; ++m) {
                check(sp, n, m);
            }
        }
        for (int m : {120, 300, 1000}) {
            for (int n = 1; n <= 6; ++n) {
                check(sp, n, m);
            }
        }
    }
}

TEST(RmtRationalCrossCheck, SingleParticleCollapseIsExact) {
    for (int m : {2, 3, 10, 100, 1000}) {
        const auto b = rational_moments(Species::boson, 1, m);
        for (Species sp : {Species::fermion, Species::distinguishable, Species::simulated}) {
            const auto t = rational_moments(sp, 1, m);
            EXPECT_TRUE(t.m1 == b.m1) << to_string(sp) << " m=" << m;
            EXPECT_TRUE(t.m2 == b.m2) << to_string(sp) << " m=" << m;
            EXPECT_TRUE(t.m3 == b.m3) << to_string(sp) << " m=" << m;
        }
    }
}

TEST(RmtRationalCrossCheck, ExactVariancePositivity) {
    for (Species sp : kAllSpecies) {
        for (int n = 1; n <= 6; ++n) {
            for (int m = n + 1; m <= 100; m += (m < 20 ? 1 : 7)) {
                const auto t = rational_moments(sp, n, m);
                const Rat var = t.m2 - t.m1 * t.m1;
                EXPECT_GT(var.num, 0) << to_string(sp) << " n=" << n << " m=" << m;
            }
        }
    }
}
