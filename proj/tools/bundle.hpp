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
#include <vector>

#include "opplan/coarsen.hpp"
#include "opplan/graph.hpp"
#include "opplan/solution.hpp"

namespace opplan::cli {

// The document passed between subcommands: whatever the pipeline has
// produced so far. A bare graph document is accepted as a bundle holding
// only a graph.
struct Bundle {
  std::optional<ComputationGraph> graph;
  std::optional<HardwareCluster> cluster;
  bool memory_capped = true;
  // Set after coarsening: the graph the records refer to.
  std::optional<ComputationGraph> original;
  std::vector<MergeRecord> records;
  std::optional<Solution> solution;
};

Bundle read_bundle(std::istream& in);
void write_bundle(const Bundle& b, std::ostream& out);

// "-" selects stdin / stdout.
Bundle read_bundle_path(const std::string& path);
void write_text_path(const std::string& path, const std::string& text);

const ComputationGraph& need_graph(const Bundle& b);
const HardwareCluster& need_cluster(const Bundle& b);
const Solution& need_solution(const Bundle& b);

}  // namespace opplan::cli
