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

// Exhaustive reference solvers used as test oracles. They share no code with
// the library beyond the graph and cluster containers.

#include <cstdint>
#include <random>

#include "opplan/graph.hpp"

namespace opplan::oracle {

struct OracleResult {
  bool feasible = false;
  Time makespan = 0;
  std::uint64_t schedules = 0;  // complete decision vectors examined
};

// Enumerates every assignment, every machine sequence, every sequence of
// positive-length transfers on each channel and, when the graph carries
// weights, every preload/load/unload pattern; each combination is timed
// by longest paths.
OracleResult brute_force(const ComputationGraph& g, const HardwareCluster& h,
                         bool memory_capped);

struct TinySpec {
  int max_ops = 5;
  int max_machines = 2;
  int max_weights = 0;  // > 0 adds weight assets and uses
  bool allow_comm = true;
  bool allow_pinning = true;
};

struct TinyInstance {
  ComputationGraph graph;
  HardwareCluster cluster;
  bool memory_capped = false;
};

TinyInstance random_tiny(std::mt19937_64& rng, const TinySpec& spec);

}  // namespace opplan::oracle
