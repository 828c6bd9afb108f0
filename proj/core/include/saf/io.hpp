// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saf/beamforming.hpp"
#include "saf/geometry.hpp"
#include "saf/metrics.hpp"
#include "saf/optimizer.hpp"

// Text formats shared by the command-line tool and tests. Readers throw Error(parse)
// with a "line:column" or "/json/path" prefix locating the problem.
namespace saf::io {

/// A layout file: the layout plus the forbidden zones it was designed against.
struct LayoutDocument {
  ArrayLayout layout;
  std::vector<ForbiddenZone> zones;

  friend bool operator==(const LayoutDocument&, const LayoutDocument&) = default;
};

std::string to_json(const LayoutDocument& doc);
LayoutDocument layout_from_json(std::string_view text);

/// Design config: a DesignSpec, optionally with an outer-loop hyperparameter grid.
struct DesignConfig {
  DesignSpec spec;
  std::vector<HyperPoint> outer_loop;

  friend bool operator==(const DesignConfig&, const DesignConfig&) = default;
};

std::string to_json(const DesignConfig& config);
DesignConfig config_from_json(std::string_view text);

/// Key-sorted, whitespace-free rendering of any JSON text; stable input for hashing.
std::string canonical_json(std::string_view text);

std::string to_json(const MetricsReport& report);

/// JSON lines: a header, one record per iteration, then a summary line.
std::string trace_to_jsonl(const OptimizerTrace& trace, std::uint64_t seed, int k_max);

struct TraceSummary {
  int iterations = 0;
  int improvements = 0;
  std::string termination;
  double initial_pslr_db = 0.0;
  double final_pslr_db = 0.0;
};

/// Parses and cross-checks a trace: consecutive iterations, nondecreasing best PSLR,
/// acceptances consistent with the candidates, and a summary line that agrees.
TraceSummary read_trace(std::string_view jsonl);

/// Header `u,v,re,im,mag_db`, rows ordered v-major then u, 17 significant digits.
std::string pattern_to_csv(const Pattern& pattern);

}  // namespace saf::io
