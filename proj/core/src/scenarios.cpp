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

#include "opplan/scenarios.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>

#include "opplan/error.hpp"

namespace opplan {

namespace {

std::string padded(const char* prefix, int k, int count) {
  const int width = static_cast<int>(std::to_string(std::max(count - 1, 0)).size());
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, k);
  return buf;
}

std::string dp_id(char kind, int batch, int stage, const DualPipeSpec& spec) {
  return std::string(1, kind) + padded("_b", batch, spec.batches()) + padded("_s", stage, spec.pp);
}

std::string machine_id(int j, int count) { return padded("d", j, count); }

}  // namespace

const char* to_string(MemoryMode mode) {
  switch (mode) {
    case MemoryMode::kDualPipe: return "dualpipe";
    case MemoryMode::kRelaxed: return "relaxed";
    case MemoryMode::kUncapped: return "uncapped";
  }
  return "unknown";
}

MemoryMode parse_memory_mode(const std::string& s) {
  for (MemoryMode m : {MemoryMode::kDualPipe, MemoryMode::kRelaxed, MemoryMode::kUncapped}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorKind::kInvalidValue, "unknown memory mode '" + s + "'");
}

void DualPipeSpec::validate() const {
  if (pp < 2 || pp % 2 != 0) {
    throw Error(ErrorKind::kInvalidValue, "pp must be an even integer >= 2");
  }
  if (micro_batches < 0 || batches() % 2 != 0) {
    throw Error(ErrorKind::kInvalidValue, "micro_batches must be even and positive");
  }
  if (t_f <= 0 || t_i <= 0 || t_w <= 0) {
    throw Error(ErrorKind::kInvalidValue, "stage times must be positive");
  }
}

Scenario gen_dualpipe(const DualPipeSpec& spec) {
  spec.validate();
  const int pp = spec.pp;
  const int nb = spec.batches();
  auto device = [&](int batch, int stage) { return batch < nb / 2 ? stage : pp - 1 - stage; };

  std::vector<Operation> ops;
  std::vector<DependencyEdge> edges;
  for (int b = 0; b < nb; ++b) {
    for (int s = 0; s < pp; ++s) {
      const std::string dev = machine_id(device(b, s), pp);
      // One parameter unit per stage replica, carried by its first forward.
      const bool carries = b == 0 || b == nb / 2;
      ops.push_back(Operation{dp_id('F', b, s, spec), spec.t_f, carries ? 1 : 0, 1, {}, {dev}});
      ops.push_back(Operation{dp_id('I', b, s, spec), spec.t_i, 0, 0, {}, {dev}});
      ops.push_back(Operation{dp_id('W', b, s, spec), spec.t_w, 0, -1, {}, {dev}});
      edges.push_back({dp_id('I', b, s, spec), dp_id('W', b, s, spec), 0});
      if (s + 1 < pp) {
        edges.push_back({dp_id('F', b, s, spec), dp_id('F', b, s + 1, spec), 0});
        edges.push_back({dp_id('I', b, s + 1, spec), dp_id('I', b, s, spec), 0});
      }
    }
    edges.push_back({dp_id('F', b, pp - 1, spec), dp_id('I', b, pp - 1, spec), 0});
  }

  const Mem params = 2;
  Mem cap = 0;
  switch (spec.memory_mode) {
    case MemoryMode::kDualPipe: cap = params + (pp + 1); break;
    case MemoryMode::kRelaxed: cap = params + 2 * (pp + 1); break;
    case MemoryMode::kUncapped: cap = params + static_cast<Mem>(nb) * pp; break;
  }
  std::vector<Machine> machines;
  for (int j = 0; j < pp; ++j) machines.push_back(Machine{machine_id(j, pp), cap});
  std::vector<Channel> channels;
  for (int j = 0; j < pp; ++j) {
    const int k = (j + 1) % pp;
    if (pp == 2 && j == 1) break;
    channels.push_back(Channel{machine_id(j, pp), machine_id(k, pp)});
    channels.push_back(Channel{machine_id(k, pp), machine_id(j, pp)});
  }
  Scenario out{ComputationGraph(std::move(ops), std::move(edges)),
               HardwareCluster(std::move(machines), std::move(channels)), ModelOptions{}};
  out.options.memory_capped = spec.memory_mode != MemoryMode::kUncapped;
  return out;
}

Time dualpipe_busy_time(const DualPipeSpec& spec) {
  spec.validate();
  return static_cast<Time>(spec.batches()) * (spec.t_f + spec.t_b());
}

Time dualpipe_bubble(const DualPipeSpec& spec) {
  spec.validate();
  return static_cast<Time>(spec.pp / 2 - 1) * (spec.t_f + 2 * spec.t_b() - 3 * spec.t_w);
}

Time dualpipe_primal_bound(const DualPipeSpec& spec) {
  return dualpipe_busy_time(spec) + dualpipe_bubble(spec);
}

void RandomDagSpec::validate() const {
  if (nodes < 1) throw Error(ErrorKind::kInvalidValue, "nodes must be positive");
  if (max_in_degree < 1 || max_out_degree < 1) {
    throw Error(ErrorKind::kInvalidValue, "degree caps must be at least 1");
  }
  if (duration_range.first < 0 || duration_range.first > duration_range.second) {
    throw Error(ErrorKind::kInvalidValue, "invalid duration range");
  }
  if (memory_range.first < 0 || memory_range.first > memory_range.second) {
    throw Error(ErrorKind::kInvalidValue, "invalid memory range");
  }
  if (comm_range.first < 0 || comm_range.first > comm_range.second) {
    throw Error(ErrorKind::kInvalidValue, "invalid communication range");
  }
}

ComputationGraph gen_random_dag(const RandomDagSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<Time> dur(spec.duration_range.first, spec.duration_range.second);
  std::uniform_int_distribution<Mem> mem(spec.memory_range.first, spec.memory_range.second);
  std::uniform_int_distribution<Time> comm(spec.comm_range.first, spec.comm_range.second);
  std::uniform_int_distribution<int> indeg(0, spec.max_in_degree);

  std::vector<Operation> ops;
  std::vector<DependencyEdge> edges;
  std::vector<int> out_degree(spec.nodes, 0);
  for (int v = 0; v < spec.nodes; ++v) {
    Operation op;
    op.id = padded("n", v, spec.nodes);
    op.duration = dur(rng);
    op.weight_mem = mem(rng);
    ops.push_back(std::move(op));

    std::vector<int> open;
    for (int u = 0; u < v; ++u) {
      if (out_degree[u] < spec.max_out_degree) open.push_back(u);
    }
    const int want = v == 0 ? 0 : indeg(rng);
    std::vector<int> parents;
    std::sample(open.begin(), open.end(), std::back_inserter(parents),
                std::min<std::size_t>(static_cast<std::size_t>(want), open.size()), rng);
    for (int u : parents) {
      ++out_degree[u];
      edges.push_back({ops[u].id, ops[v].id, comm(rng)});
    }
  }
  return ComputationGraph(std::move(ops), std::move(edges));
}

HardwareCluster gen_cluster(int machines, Mem capacity) {
  if (machines < 1) throw Error(ErrorKind::kInvalidValue, "machines must be positive");
  std::vector<Machine> ms;
  for (int j = 0; j < machines; ++j) ms.push_back(Machine{padded("m", j, machines), capacity});
  std::vector<Channel> chs;
  for (int a = 0; a < machines; ++a) {
    for (int b = 0; b < machines; ++b) {
      if (a != b) chs.push_back(Channel{ms[a].id, ms[b].id});
    }
  }
  return HardwareCluster(std::move(ms), std::move(chs));
}

}  // namespace opplan
