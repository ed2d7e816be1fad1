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

#include "modecorr/correlators.hpp"
#include "modecorr/errors.hpp"
#include "modecorr/experiments.hpp"
#include "modecorr/io.hpp"
#include "modecorr/oracle.hpp"
#include "modecorr/rmt.hpp"
#include "modecorr/rng.hpp"
#include "modecorr/species.hpp"
#include "modecorr/stats.hpp"
#include "modecorr/unitary.hpp"
#include "modecorr/version.hpp"
