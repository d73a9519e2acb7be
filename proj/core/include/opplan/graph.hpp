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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace opplan {

// Integral time ticks. Files may declare a resolution; everything inside the
// library is exact integer arithmetic.
using Time = std::int64_t;
using Mem = std::int64_t;

struct Operation {
  std::string id;
  Time duration = 0;
  Mem weight_mem = 0;
  Mem activation_delta = 0;
  // Weight assets the operation needs resident while it runs.
  std::vector<std::string> weight_refs;
  // Candidate machines; empty means every machine of the cluster.
  std::vector<std::string> allowed_machines;

  friend bool operator==(const Operation&, const Operation&) = default;
};

struct DependencyEdge {
  std::string producer;
  std::string consumer;
  Time comm_duration = 0;

  friend bool operator==(const DependencyEdge&, const DependencyEdge&) = default;
};

// A parameter block that can be loaded onto / evicted from a machine.
struct WeightAsset {
  std::string id;
  Mem size = 0;
  Time load_cost = 0;
  Time unload_cost = 0;

  friend bool operator==(const WeightAsset&, const WeightAsset&) = default;
};

// Immutable, validated computation DAG. Operations, edges and weight assets
// are stored in id order; operation indices follow that order.
class ComputationGraph {
 public:
  ComputationGraph() = default;

  // Validates every invariant and throws opplan::Error on the first problem.
  ComputationGraph(std::vector<Operation> operations,
                   std::vector<DependencyEdge> edges,
                   std::vector<WeightAsset> weights = {});

  std::size_t size() const { return ops_.size(); }
  const std::vector<Operation>& operations() const { return ops_; }
  const Operation& op(std::size_t i) const { return ops_[i]; }
  const std::vector<DependencyEdge>& edges() const { return edges_; }
  const std::vector<WeightAsset>& weights() const { return weights_; }

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index(std::string_view id) const;  // throws kDanglingRef
  std::optional<std::size_t> find_weight(std::string_view id) const;

  std::size_t edge_source(std::size_t e) const { return edge_ends_[e].first; }
  std::size_t edge_target(std::size_t e) const { return edge_ends_[e].second; }
  const std::vector<std::size_t>& out_edges(std::size_t i) const { return out_[i]; }
  const std::vector<std::size_t>& in_edges(std::size_t i) const { return in_[i]; }
  std::optional<std::size_t> find_edge(std::size_t from, std::size_t to) const;

  Time total_duration() const;
  Mem total_weight_mem() const;
  Mem total_activation_delta() const;

  friend bool operator==(const ComputationGraph& a, const ComputationGraph& b) {
    return a.ops_ == b.ops_ && a.edges_ == b.edges_ && a.weights_ == b.weights_;
  }

 private:
  std::vector<Operation> ops_;
  std::vector<DependencyEdge> edges_;
  std::vector<WeightAsset> weights_;
  std::unordered_map<std::string, std::size_t> op_index_;
  std::vector<std::pair<std::size_t, std::size_t>> edge_ends_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

struct Machine {
  std::string id;
  Mem memory_capacity = 0;

  friend bool operator==(const Machine&, const Machine&) = default;
};

struct Channel {
  std::string from;
  std::string to;

  bool is_self() const { return from == to; }
  friend bool operator==(const Channel&, const Channel&) = default;
};

// Devices plus directed channels. Construction adds the implicit self channel
// (j, j) for every machine; transfers on it always take zero time.
class HardwareCluster {
 public:
  HardwareCluster() = default;
  HardwareCluster(std::vector<Machine> machines, std::vector<Channel> channels);

  std::size_t size() const { return machines_.size(); }
  const std::vector<Machine>& machines() const { return machines_; }
  const Machine& machine(std::size_t j) const { return machines_[j]; }
  // All channels including self channels, ordered by (from, to).
  const std::vector<Channel>& channels() const { return channels_; }
  // Channels as declared (self channels omitted).
  std::vector<Channel> declared_channels() const;

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index(std::string_view id) const;  // throws kDanglingRef
  std::optional<std::size_t> channel_index(std::size_t from, std::size_t to) const;
  bool connected(std::size_t from, std::size_t to) const {
    return channel_index(from, to).has_value();
  }
  std::size_t channel_from(std::size_t c) const { return channel_ends_[c].first; }
  std::size_t channel_to(std::size_t c) const { return channel_ends_[c].second; }

  friend bool operator==(const HardwareCluster& a, const HardwareCluster& b) {
    return a.machines_ == b.machines_ && a.channels_ == b.channels_;
  }

 private:
  std::vector<Machine> machines_;
  std::vector<Channel> channels_;
  std::vector<std::pair<std::size_t, std::size_t>> channel_ends_;
  std::unordered_map<std::string, std::size_t> machine_index_;
  std::vector<std::vector<std::optional<std::size_t>>> channel_matrix_;
};

// Deterministic topological order; ties broken by id.
std::vector<std::string> topo_order(const ComputationGraph& g);
std::vector<std::size_t> topo_indices(const ComputationGraph& g);

// Edges (a, b) bypassed by a two-edge path a -> c -> b. Only single-hop
// bypasses count; see transitive_reduction() for the full closure variant.
std::vector<DependencyEdge> redundant_edges(const ComputationGraph& g);

// Edges implied by any longer path (full transitive reduction complement).
std::vector<DependencyEdge> transitive_redundant_edges(const ComputationGraph& g);

// Copy of g with the given edges removed.
ComputationGraph without_edges(const ComputationGraph& g,
                               const std::vector<DependencyEdge>& removed);

// Longest path through g counting operation durations only.
Time critical_path_length(const ComputationGraph& g);

// File ingestion and serialization (JSON documents).
ComputationGraph load_computation_graph(std::istream& in);
ComputationGraph load_computation_graph(std::string_view text);
ComputationGraph load_computation_graph_file(const std::string& path);
void save_computation_graph(const ComputationGraph& g, std::ostream& out);

HardwareCluster load_cluster(std::istream& in);
HardwareCluster load_cluster(std::string_view text);
HardwareCluster load_cluster_file(const std::string& path);
void save_cluster(const HardwareCluster& h, std::ostream& out);

}  // namespace opplan
