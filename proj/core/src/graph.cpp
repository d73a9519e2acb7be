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

#include "opplan/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "opplan/error.hpp"

namespace opplan {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kDuplicateId: return "duplicate-id";
    case ErrorKind::kDanglingRef: return "dangling-reference";
    case ErrorKind::kCycle: return "cycle";
    case ErrorKind::kInvalidValue: return "invalid-value";
    case ErrorKind::kMergeCycle: return "merge-cycle";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kRejectedHint: return "rejected-hint";
    case ErrorKind::kInconsistent: return "inconsistent";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

namespace {

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Returns one cycle among the nodes Kahn's algorithm could not release,
// rotated so that it starts at its smallest index.
std::vector<std::size_t> find_cycle(
    const std::vector<std::vector<std::size_t>>& succ,
    const std::vector<bool>& stuck) {
  const std::size_t n = succ.size();
  std::vector<int> color(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> cycle;
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) {
    color[v] = 1;
    stack.push_back(v);
    for (std::size_t w : succ[v]) {
      if (!stuck[w]) continue;
      if (color[w] == 1) {
        auto it = std::find(stack.begin(), stack.end(), w);
        cycle.assign(it, stack.end());
        return true;
      }
      if (color[w] == 0 && dfs(w)) return true;
    }
    stack.pop_back();
    color[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n && cycle.empty(); ++v) {
    if (stuck[v] && color[v] == 0) dfs(v);
  }
  auto first = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), first, cycle.end());
  return cycle;
}

}  // namespace

ComputationGraph::ComputationGraph(std::vector<Operation> operations,
                                   std::vector<DependencyEdge> edges,
                                   std::vector<WeightAsset> weights)
    : ops_(std::move(operations)),
      edges_(std::move(edges)),
      weights_(std::move(weights)) {
  std::sort(ops_.begin(), ops_.end(),
            [](const Operation& a, const Operation& b) { return a.id < b.id; });
  std::sort(weights_.begin(), weights_.end(),
            [](const WeightAsset& a, const WeightAsset& b) { return a.id < b.id; });

  for (std::size_t w = 0; w < weights_.size(); ++w) {
    const WeightAsset& asset = weights_[w];
    if (asset.id.empty()) throw Error(ErrorKind::kSchema, "weight with empty id");
    if (w > 0 && weights_[w - 1].id == asset.id) {
      throw Error(ErrorKind::kDuplicateId, "duplicate weight id '" + asset.id + "'",
                  {asset.id});
    }
    if (asset.size < 0 || asset.load_cost < 0 || asset.unload_cost < 0) {
      throw Error(ErrorKind::kInvalidValue,
                  "weight '" + asset.id + "' has a negative size or cost", {asset.id});
    }
  }

  for (std::size_t i = 0; i < ops_.size(); ++i) {
    Operation& op = ops_[i];
    if (op.id.empty()) throw Error(ErrorKind::kSchema, "operation with empty id");
    if (i > 0 && ops_[i - 1].id == op.id) {
      throw Error(ErrorKind::kDuplicateId, "duplicate operation id '" + op.id + "'",
                  {op.id});
    }
    if (op.duration < 0) {
      throw Error(ErrorKind::kInvalidValue,
                  "operation '" + op.id + "' has a negative duration", {op.id});
    }
    if (op.weight_mem < 0) {
      throw Error(ErrorKind::kInvalidValue,
                  "operation '" + op.id + "' has a negative weight_mem", {op.id});
    }
    sort_unique(op.weight_refs);
    sort_unique(op.allowed_machines);
    for (const std::string& ref : op.weight_refs) {
      if (!find_weight(ref)) {
        throw Error(ErrorKind::kDanglingRef,
                    "operation '" + op.id + "' references unknown weight '" + ref + "'",
                    {op.id, ref});
      }
    }
    op_index_.emplace(op.id, i);
  }

  out_.assign(ops_.size(), {});
  in_.assign(ops_.size(), {});
  for (const DependencyEdge& e : edges_) {
    if (!find(e.producer) || !find(e.consumer)) {
      const std::string& missing = find(e.producer) ? e.consumer : e.producer;
      throw Error(ErrorKind::kDanglingRef,
                  "edge " + e.producer + " -> " + e.consumer +
                      " references unknown operation '" + missing + "'",
                  {missing});
    }
    if (e.producer == e.consumer) {
      throw Error(ErrorKind::kInvalidValue, "self edge on '" + e.producer + "'",
                  {e.producer});
    }
    if (e.comm_duration < 0) {
      throw Error(ErrorKind::kInvalidValue,
                  "edge " + e.producer + " -> " + e.consumer +
                      " has a negative comm_duration",
                  {e.producer, e.consumer});
    }
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const DependencyEdge& a, const DependencyEdge& b) {
              return std::tie(a.producer, a.consumer) < std::tie(b.producer, b.consumer);
            });
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const DependencyEdge& e = edges_[k];
    if (k > 0 && edges_[k - 1].producer == e.producer &&
        edges_[k - 1].consumer == e.consumer) {
      throw Error(ErrorKind::kDuplicateId,
                  "duplicate edge " + e.producer + " -> " + e.consumer,
                  {e.producer, e.consumer});
    }
    const std::size_t a = op_index_.at(e.producer);
    const std::size_t b = op_index_.at(e.consumer);
    edge_ends_.emplace_back(a, b);
    out_[a].push_back(k);
    in_[b].push_back(k);
  }

  // Acyclicity.
  std::vector<std::size_t> indeg(ops_.size());
  for (std::size_t i = 0; i < ops_.size(); ++i) indeg[i] = in_[i].size();
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (indeg[i] == 0) ready.push_back(i);
  }
  std::size_t released = 0;
  while (!ready.empty()) {
    std::size_t v = ready.back();
    ready.pop_back();
    ++released;
    for (std::size_t e : out_[v]) {
      if (--indeg[edge_ends_[e].second] == 0) ready.push_back(edge_ends_[e].second);
    }
  }
  if (released != ops_.size()) {
    std::vector<std::vector<std::size_t>> succ(ops_.size());
    std::vector<bool> stuck(ops_.size());
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      stuck[i] = indeg[i] > 0;
      for (std::size_t e : out_[i]) succ[i].push_back(edge_ends_[e].second);
    }
    std::vector<std::size_t> cycle = find_cycle(succ, stuck);
    std::vector<std::string> ids;
    std::ostringstream msg;
    msg << "dependency cycle: ";
    for (std::size_t v : cycle) {
      ids.push_back(ops_[v].id);
      msg << ops_[v].id << " -> ";
    }
    if (!cycle.empty()) msg << ops_[cycle.front()].id;
    throw Error(ErrorKind::kCycle, msg.str(), ids);
  }
}

std::optional<std::size_t> ComputationGraph::find(std::string_view id) const {
  auto it = op_index_.find(std::string(id));
  if (it == op_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ComputationGraph::index(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw Error(ErrorKind::kDanglingRef, "unknown operation '" + std::string(id) + "'",
              {std::string(id)});
}

std::optional<std::size_t> ComputationGraph::find_weight(std::string_view id) const {
  auto it = std::lower_bound(
      weights_.begin(), weights_.end(), id,
      [](const WeightAsset& w, std::string_view key) { return w.id < key; });
  if (it == weights_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - weights_.begin());
}

std::optional<std::size_t> ComputationGraph::find_edge(std::size_t from,
                                                       std::size_t to) const {
  for (std::size_t e : out_[from]) {
    if (edge_ends_[e].second == to) return e;
  }
  return std::nullopt;
}

Time ComputationGraph::total_duration() const {
  Time sum = 0;
  for (const Operation& op : ops_) sum += op.duration;
  return sum;
}

Mem ComputationGraph::total_weight_mem() const {
  Mem sum = 0;
  for (const Operation& op : ops_) sum += op.weight_mem;
  return sum;
}

Mem ComputationGraph::total_activation_delta() const {
  Mem sum = 0;
  for (const Operation& op : ops_) sum += op.activation_delta;
  return sum;
}

HardwareCluster::HardwareCluster(std::vector<Machine> machines,
                                 std::vector<Channel> channels)
    : machines_(std::move(machines)) {
  if (machines_.empty()) throw Error(ErrorKind::kSchema, "cluster has no machines");
  std::sort(machines_.begin(), machines_.end(),
            [](const Machine& a, const Machine& b) { return a.id < b.id; });
  for (std::size_t j = 0; j < machines_.size(); ++j) {
    const Machine& m = machines_[j];
    if (m.id.empty()) throw Error(ErrorKind::kSchema, "machine with empty id");
    if (j > 0 && machines_[j - 1].id == m.id) {
      throw Error(ErrorKind::kDuplicateId, "duplicate machine id '" + m.id + "'", {m.id});
    }
    if (m.memory_capacity <= 0) {
      throw Error(ErrorKind::kInvalidValue,
                  "machine '" + m.id + "' needs a positive memory_capacity", {m.id});
    }
    machine_index_.emplace(m.id, j);
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const Channel& c : channels) {
    for (const std::string& end : {c.from, c.to}) {
      if (!machine_index_.count(end)) {
        throw Error(ErrorKind::kDanglingRef,
                    "channel " + c.from + " -> " + c.to + " references unknown machine '" +
                        end + "'",
                    {end});
      }
    }
    if (c.is_self()) continue;  // implicit anyway
    if (!seen.emplace(c.from, c.to).second) {
      throw Error(ErrorKind::kDuplicateId, "duplicate channel " + c.from + " -> " + c.to,
                  {c.from, c.to});
    }
  }
  for (const Machine& m : machines_) seen.emplace(m.id, m.id);
  for (const auto& [from, to] : seen) channels_.push_back(Channel{from, to});

  const std::size_t n = machines_.size();
  channel_matrix_.assign(n, std::vector<std::optional<std::size_t>>(n));
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const std::size_t a = machine_index_.at(channels_[c].from);
    const std::size_t b = machine_index_.at(channels_[c].to);
    channel_ends_.emplace_back(a, b);
    channel_matrix_[a][b] = c;
  }
}

std::vector<Channel> HardwareCluster::declared_channels() const {
  std::vector<Channel> out;
  for (const Channel& c : channels_) {
    if (!c.is_self()) out.push_back(c);
  }
  return out;
}

std::optional<std::size_t> HardwareCluster::find(std::string_view id) const {
  auto it = machine_index_.find(std::string(id));
  if (it == machine_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t HardwareCluster::index(std::string_view id) const {
  if (auto j = find(id)) return *j;
  throw Error(ErrorKind::kDanglingRef, "unknown machine '" + std::string(id) + "'",
              {std::string(id)});
}

std::optional<std::size_t> HardwareCluster::channel_index(std::size_t from,
                                                          std::size_t to) const {
  return channel_matrix_[from][to];
}

std::vector<std::size_t> topo_indices(const ComputationGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> indeg(n);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = g.in_edges(i).size();
  // Indices follow id order, so a min-heap on the index breaks ties by id.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t e : g.out_edges(v)) {
      std::size_t w = g.edge_target(e);
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  return order;
}

std::vector<std::string> topo_order(const ComputationGraph& g) {
  std::vector<std::string> ids;
  for (std::size_t i : topo_indices(g)) ids.push_back(g.op(i).id);
  return ids;
}

std::vector<DependencyEdge> redundant_edges(const ComputationGraph& g) {
  std::vector<DependencyEdge> out;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const std::size_t a = g.edge_source(e);
    const std::size_t b = g.edge_target(e);
    for (std::size_t first : g.out_edges(a)) {
      const std::size_t mid = g.edge_target(first);
      if (mid != b && g.find_edge(mid, b)) {
        out.push_back(g.edges()[e]);
        break;
      }
    }
  }
  return out;
}

std::vector<DependencyEdge> transitive_redundant_edges(const ComputationGraph& g) {
  const std::size_t n = g.size();
  std::vector<DependencyEdge> out;
  std::vector<char> reach(n);
  for (std::size_t a = 0; a < n; ++a) {
    // Nodes reachable from a through paths of length >= 2.
    std::fill(reach.begin(), reach.end(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t e : g.out_edges(a)) {
      std::size_t mid = g.edge_target(e);
      for (std::size_t e2 : g.out_edges(mid)) stack.push_back(g.edge_target(e2));
    }
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      if (reach[v]) continue;
      reach[v] = 1;
      for (std::size_t e : g.out_edges(v)) stack.push_back(g.edge_target(e));
    }
    for (std::size_t e : g.out_edges(a)) {
      if (reach[g.edge_target(e)]) out.push_back(g.edges()[e]);
    }
  }
  std::sort(out.begin(), out.end(), [](const DependencyEdge& x, const DependencyEdge& y) {
    return std::tie(x.producer, x.consumer) < std::tie(y.producer, y.consumer);
  });
  return out;
}

ComputationGraph without_edges(const ComputationGraph& g,
                               const std::vector<DependencyEdge>& removed) {
  std::set<std::pair<std::string, std::string>> drop;
  for (const DependencyEdge& e : removed) drop.emplace(e.producer, e.consumer);
  std::vector<DependencyEdge> kept;
  for (const DependencyEdge& e : g.edges()) {
    if (!drop.count({e.producer, e.consumer})) kept.push_back(e);
  }
  return ComputationGraph(g.operations(), std::move(kept), g.weights());
}

Time critical_path_length(const ComputationGraph& g) {
  std::vector<Time> finish(g.size(), 0);
  Time best = 0;
  for (std::size_t v : topo_indices(g)) {
    Time start = 0;
    for (std::size_t e : g.in_edges(v)) start = std::max(start, finish[g.edge_source(e)]);
    finish[v] = start + g.op(v).duration;
    best = std::max(best, finish[v]);
  }
  return best;
}

}  // namespace opplan
