// Copyright 2026 The opplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "opplan/model.hpp"
#include "opplan/solution.hpp"

namespace opplan {

enum class NodeSelection {
  kBestBound,   // children explored in order of their lower bound
  kDepthFirst,  // children explored in fixed decision order
};

struct SolveConfig {
  double time_limit = 60.0;  // seconds
  std::optional<Time> primal_bound;
  double gap_tolerance = 0.0;
  NodeSelection node_selection = NodeSelection::kBestBound;
  bool seedless_determinism = true;
  unsigned workers = 1;  // ignored when seedless_determinism is set
  // Deterministic work cap (search nodes); 0 means no cap.
  std::uint64_t node_limit = 0;
  // Instances up to this many operations go to the exhaustive engine.
  std::size_t exact_max_ops = 12;

  void validate() const;  // throws kInvalidValue
};

struct SolveStats {
  std::uint64_t nodes = 0;
  double seconds = 0.0;
  std::string engine;
  std::vector<Time> incumbents;  // makespans in the order they were found
};

// Minimizes the makespan. The returned plan, if any, always passes verify().
// With a primal bound (in the model or the config) the search stops at the
// first plan whose makespan is within it.
Solution solve(const ScheduleModel& model, const SolveConfig& cfg = {},
               SolveStats* stats = nullptr);

// Attaches a verified incumbent. Throws kRejectedHint, listing the
// violations, when the hint is not a feasible plan for the model.
ScheduleModel warm_start(const ScheduleModel& model, const Solution& hint);

// Writes the program in fixed-format MPS. Columns and rows get short
// positional names; comment lines map them back to variable names and tags.
void export_mps(const ScheduleModel& model, std::ostream& out);

// CPLEX LP format with descriptive (sanitized) names.
void export_lp(const ScheduleModel& model, std::ostream& out);

}  // namespace opplan
