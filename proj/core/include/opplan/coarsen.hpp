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

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opplan/graph.hpp"

namespace opplan {

// Thresholds for the greedy merge heuristic. Non-edge merges may lengthen the
// critical path, so their limits must not exceed the edge-merge limits.
struct CoarsenConfig {
  std::size_t node_budget = 1;
  Time edge_merge_max_duration = 0;
  Mem edge_merge_max_memory = 0;
  Time nonedge_merge_max_duration = 0;
  Mem nonedge_merge_max_memory = 0;

  // Budget-relative defaults: with mean = total / budget, edge merges may
  // reach 2x mean and non-edge merges 1x mean (duration and weight memory).
  static CoarsenConfig defaults_for(const ComputationGraph& g, std::size_t node_budget);

  void validate() const;  // throws kInvalidValue
};

struct MergeRecord {
  std::string new_id;
  // Original operation ids, in topological order of the original graph.
  std::vector<std::string> absorbed;

  friend bool operator==(const MergeRecord&, const MergeRecord&) = default;
};

using NodePair = std::pair<std::string, std::string>;

std::optional<NodePair> get_candidate_edge(const ComputationGraph& g,
                                           const CoarsenConfig& cfg);
std::optional<NodePair> get_candidate_nonedge(const ComputationGraph& g,
                                              const CoarsenConfig& cfg);

struct MergeResult {
  ComputationGraph graph;
  MergeRecord record;  // absorbed = {a, b} as ids of g
};

// Fuses a and b into one node named "a+b" (producer side first). Throws
// kMergeCycle when a path of length >= 2 joins them.
MergeResult merge_nodes(const ComputationGraph& g, const std::string& a,
                        const std::string& b);

struct CoarsenResult {
  ComputationGraph graph;
  // One record per node of the result that absorbed two or more originals.
  std::vector<MergeRecord> records;
  std::size_t merges = 0;
};

CoarsenResult coarsen(const ComputationGraph& g, const CoarsenConfig& cfg);

// Original ids covered by the result graph (records expanded, singletons kept).
std::vector<std::string> expand_ids(const ComputationGraph& coarse,
                                    const std::vector<MergeRecord>& records);

// {"records": [{"id": ..., "absorbed": [...]}, ...]}
void save_merge_records(const std::vector<MergeRecord>& records, std::ostream& out);
std::vector<MergeRecord> load_merge_records(std::istream& in);

}  // namespace opplan
