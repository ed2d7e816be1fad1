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
#include <string>
#include <string_view>

#include "modecorr/errors.hpp"

namespace modecorr {

/// The four particle species whose transport statistics the library compares.
/// "simulated" denotes the mean-field sampler: distinguishable particles in an
/// equal-amplitude single-particle superposition with random phases, averaged
/// over those phases.
enum class Species {
    boson,
    fermion,
    distinguishable,
    simulated,
};

inline constexpr std::array<Species, 4> kAllSpecies = {
    Species::boson,
    Species::fermion,
    Species::distinguishable,
    Species::simulated,
};

inline std::string_view to_string(Species s) {
    switch (s) {
        case Species::boson:
            return "boson";
        case Species::fermion:
            return "fermion";
        case Species::distinguishable:
            return "distinguishable";
        case Species::simulated:
            return "simulated";
    }
    throw domain_error("unknown species value");
}

/// Accepts canonical names plus the CLI short forms "dist" and "simboson".
inline Species parse_species(std::string_view name) {
    if (name == "boson") return Species::boson;
    if (name == "fermion") return Species::fermion;
    if (name == "distinguishable" || name == "dist") return Species::distinguishable;
    if (name == "simulated" || name == "simboson" || name == "simulated_boson") {
        return Species::simulated;
    }
    throw config_error("unknown species: " + std::string(name));
}

inline std::size_t species_index(Species s) {
    return static_cast<std::size_t>(s);
}

}  // namespace modecorr
