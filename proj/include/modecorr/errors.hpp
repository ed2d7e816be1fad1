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

#include <stdexcept>

namespace modecorr {

// Malformed configuration (unparseable ranges, bad species tokens, ...).
// The CLI maps this to exit code 2.
class config_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Input outside an operation's domain: invalid dimensions, out-of-range mode
// indices, size caps, statistics undefined for the given data. Exit code 3.
class domain_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A numerical consistency check failed. This signals a bug or corrupted
// input, never ordinary data. Exit code 4.
class check_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace modecorr
