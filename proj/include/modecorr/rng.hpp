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
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

namespace modecorr {

/// Root seed plus a purpose tag. Identical (seed, stream) pairs reproduce
/// identical draws bit-exactly; distinct tags address independent streams.
struct RngSeed {
    std::uint64_t seed = 0;
    std::string stream;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ whose state is derived from (seed, label, i0, i1) through
/// splitmix64. Streams are addressed by value, never by draw order, so
/// parallel trials see the same numbers under any scheduling. All floating
/// point draws are built from raw 64-bit words with fixed arithmetic; no
/// platform-dependent distribution code is involved.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::string_view label, std::uint64_t i0 = 0,
                 std::uint64_t i1 = 0) {
        std::uint64_t z = seed;
        z += 0x9e3779b97f4a7c15ull * detail::fnv1a64(label);
        z += 0xbf58476d1ce4e5b9ull * (i0 + 0x632be59bd9b4e019ull);
        z += 0x94d049bb133111ebull * (i1 + 0xd1b54a32d192ed03ull);
        for (auto &s : state_) {
            s = detail::splitmix64(z);
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
            state_[0] = 1;  // the all-zero state is a fixed point
        }
    }

    explicit RandomStream(const RngSeed &seed, std::uint64_t i0 = 0, std::uint64_t i1 = 0)
        : RandomStream(seed.seed, seed.stream, i0, i1) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe under log().
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform phase on [0, 2*pi).
    double phase() { return 2.0 * std::numbers::pi * uniform01(); }

    /// Integer uniform on [0, bound) by rejection; bound >= 1.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    /// Standard complex normal: E[z] = 0, E[|z|^2] = 1 (polar construction).
    std::complex<double> complex_normal() {
        const double r = std::sqrt(-std::log(uniform_pos()));
        const double a = phase();
        return {r * std::cos(a), r * std::sin(a)};
    }

  private:
    std::array<std::uint64_t, 4> state_;
};

}  // namespace modecorr
