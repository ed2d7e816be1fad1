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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "modecorr/errors.hpp"
#include "modecorr/version.hpp"

namespace modecorr {

/// Formats with 17 significant digits, enough to round-trip any double.
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// How an artifact file was produced. Embedded in every emitted file.
/// Deliberately excludes execution details such as the worker count, so a
/// rerun of the same configuration is byte-identical no matter how it was
/// scheduled.
struct Provenance {
    std::string command;       // canonical echo of the semantic configuration
    std::uint64_t seed = 0;
    std::string version = kVersion;

    std::string csv_comment_block() const {
        std::string out;
        out += "# modecorr " + version + "\n";
        out += "# command: " + command + "\n";
        out += "# seed: " + std::to_string(seed) + "\n";
        return out;
    }

    nlohmann::json to_json() const {
        return {{"command", command}, {"seed", seed}, {"version", version}};
    }
};

inline void write_file(const std::filesystem::path &path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw config_error("cannot open for writing: " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw config_error("write failed: " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error("cannot open: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace modecorr
