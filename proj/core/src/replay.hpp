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

// Shared reconstruction of per-machine state from a Solution: sequences,
// activation levels and (with the loading extension) resident weights.

#include <cstddef>
#include <limits>
#include <vector>

#include "opplan/graph.hpp"
#include "opplan/model.hpp"
#include "opplan/solution.hpp"

namespace opplan::detail {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Lowest starting level for a machine running `deltas` in order: at least the
// static weight total, every level before an op at least that total, every
// level after an op non-negative.
inline Mem base_level(Mem static_weight, const std::vector<Mem>& deltas) {
  Mem base = static_weight;
  Mem prefix = 0;
  for (Mem d : deltas) {
    base = std::max(base, static_weight - prefix);
    prefix += d;
    base = std::max(base, -prefix);
  }
  return base;
}

struct MachineReplay {
  std::vector<std::size_t> sequence;  // op indices in execution order
  Mem static_weight = 0;
  Mem base = 0;
  std::vector<Mem> before;  // activation level before each position
  std::vector<Mem> after;
  std::vector<std::vector<char>> active_before;  // [position][weight]
  std::vector<std::vector<char>> active_after;
  std::vector<char> preload;  // [weight]
};

struct Replay {
  std::vector<std::size_t> machine_of;  // per op, kNone when unplaced
  std::vector<std::size_t> position;    // per op, index in its machine sequence
  std::vector<MachineReplay> machines;
  std::vector<std::vector<char>> load;    // [op][weight]
  std::vector<std::vector<char>> unload;  // [op][weight]
  std::vector<std::string> unknown_ids;
  std::vector<std::string> duplicate_ops;
};

Replay replay(const ComputationGraph& g, const HardwareCluster& h, const Solution& sol,
              const LoadingData* loading);

LoadingData loading_from_graph(const ComputationGraph& g);

}  // namespace opplan::detail
