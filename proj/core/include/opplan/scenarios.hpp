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
#include <utility>

#include "opplan/graph.hpp"
#include "opplan/model.hpp"

namespace opplan {

enum class MemoryMode { kDualPipe, kRelaxed, kUncapped };

const char* to_string(MemoryMode mode);
MemoryMode parse_memory_mode(const std::string& s);  // throws kInvalidValue

// Bidirectional pipeline instance. Half of the micro-batches traverse the
// stages on devices 0..pp-1, the other half on devices pp-1..0, so every
// device hosts two stage replicas.
struct DualPipeSpec {
  int pp = 8;
  int micro_batches = 0;  // 0 selects 2 * pp
  Time t_f = 1;
  Time t_i = 1;
  Time t_w = 1;
  MemoryMode memory_mode = MemoryMode::kDualPipe;

  Time t_b() const { return t_i + t_w; }
  int batches() const { return micro_batches > 0 ? micro_batches : 2 * pp; }
  void validate() const;  // throws kInvalidValue
};

struct Scenario {
  ComputationGraph graph;
  HardwareCluster cluster;
  ModelOptions options;
};

Scenario gen_dualpipe(const DualPipeSpec& spec);

// Busy time of every device: each micro-batch passes every device once.
Time dualpipe_busy_time(const DualPipeSpec& spec);
// (pp/2 - 1) * (t_f + 2 t_b - 3 t_w).
Time dualpipe_bubble(const DualPipeSpec& spec);
// Makespan bound of the reference schedule: busy time plus its bubble.
Time dualpipe_primal_bound(const DualPipeSpec& spec);

struct RandomDagSpec {
  int nodes = 200;
  int max_in_degree = 3;
  int max_out_degree = 3;
  std::pair<Time, Time> duration_range{1, 10};
  std::pair<Mem, Mem> memory_range{1, 10};
  std::pair<Time, Time> comm_range{0, 0};
  std::uint64_t seed = 1;

  void validate() const;  // throws kInvalidValue
};

ComputationGraph gen_random_dag(const RandomDagSpec& spec);

// Fully connected cluster of identical machines m0..m{n-1}.
HardwareCluster gen_cluster(int machines, Mem capacity);

}  // namespace opplan
