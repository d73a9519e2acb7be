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

#include "opplan/coarsen.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>

#include "opplan/error.hpp"

namespace opplan {

namespace {

// Descendant sets as packed bit rows.
class Reachability {
 public:
  explicit Reachability(const ComputationGraph& g)
      : n_(g.size()), words_((n_ + 63) / 64), bits_(n_ * words_, 0) {
    std::vector<std::size_t> order = topo_indices(g);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t v = *it;
      for (std::size_t e : g.out_edges(v)) {
        const std::size_t w = g.edge_target(e);
        set(v, w);
        for (std::size_t k = 0; k < words_; ++k) bits_[v * words_ + k] |= bits_[w * words_ + k];
      }
    }
  }

  bool reaches(std::size_t from, std::size_t to) const {
    return (bits_[from * words_ + to / 64] >> (to % 64)) & 1U;
  }

 private:
  void set(std::size_t from, std::size_t to) {
    bits_[from * words_ + to / 64] |= std::uint64_t{1} << (to % 64);
  }

  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

std::optional<std::vector<std::string>> merged_placement(const Operation& a,
                                                         const Operation& b) {
  if (a.allowed_machines.empty()) return b.allowed_machines;
  if (b.allowed_machines.empty()) return a.allowed_machines;
  std::vector<std::string> both;
  std::set_intersection(a.allowed_machines.begin(), a.allowed_machines.end(),
                        b.allowed_machines.begin(), b.allowed_machines.end(),
                        std::back_inserter(both));
  if (both.empty()) return std::nullopt;
  return both;
}

bool within(const Operation& a, const Operation& b, Time max_duration, Mem max_memory) {
  return a.duration + b.duration <= max_duration &&
         a.weight_mem + b.weight_mem <= max_memory &&
         merged_placement(a, b).has_value();
}

}  // namespace

CoarsenConfig CoarsenConfig::defaults_for(const ComputationGraph& g,
                                          std::size_t node_budget) {
  CoarsenConfig cfg;
  cfg.node_budget = std::max<std::size_t>(node_budget, 1);
  const auto budget = static_cast<std::int64_t>(cfg.node_budget);
  cfg.edge_merge_max_duration = 2 * g.total_duration() / budget;
  cfg.edge_merge_max_memory = 2 * g.total_weight_mem() / budget;
  cfg.nonedge_merge_max_duration = g.total_duration() / budget;
  cfg.nonedge_merge_max_memory = g.total_weight_mem() / budget;
  return cfg;
}

void CoarsenConfig::validate() const {
  if (node_budget < 1) throw Error(ErrorKind::kInvalidValue, "node budget must be >= 1");
  if (nonedge_merge_max_duration > edge_merge_max_duration ||
      nonedge_merge_max_memory > edge_merge_max_memory) {
    throw Error(ErrorKind::kInvalidValue,
                "non-edge merge thresholds must not exceed edge merge thresholds");
  }
}

std::optional<NodePair> get_candidate_edge(const ComputationGraph& g,
                                           const CoarsenConfig& cfg) {
  const ComputationGraph reduced = without_edges(g, redundant_edges(g));
  for (std::size_t e = 0; e < reduced.edges().size(); ++e) {
    const std::size_t a = reduced.edge_source(e);
    const std::size_t b = reduced.edge_target(e);
    if (reduced.out_edges(a).size() != 1 || reduced.in_edges(b).size() != 1) continue;
    if (!within(reduced.op(a), reduced.op(b), cfg.edge_merge_max_duration,
                cfg.edge_merge_max_memory)) {
      continue;
    }
    return NodePair{reduced.op(a).id, reduced.op(b).id};
  }
  return std::nullopt;
}

std::optional<NodePair> get_candidate_nonedge(const ComputationGraph& g,
                                              const CoarsenConfig& cfg) {
  // Redundant edges only ever shadow an existing path, so reachability on g
  // equals reachability on the reduced graph.
  const Reachability reach(g);
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b = a + 1; b < g.size(); ++b) {
      if (reach.reaches(a, b) || reach.reaches(b, a)) continue;
      if (!within(g.op(a), g.op(b), cfg.nonedge_merge_max_duration,
                  cfg.nonedge_merge_max_memory)) {
        continue;
      }
      return NodePair{g.op(a).id, g.op(b).id};
    }
  }
  return std::nullopt;
}

MergeResult merge_nodes(const ComputationGraph& g, const std::string& a,
                        const std::string& b) {
  std::size_t ia = g.index(a);
  std::size_t ib = g.index(b);
  if (ia == ib) throw Error(ErrorKind::kInvalidValue, "cannot merge '" + a + "' with itself", {a});

  const Reachability reach(g);
  auto long_path = [&](std::size_t from, std::size_t to) {
    for (std::size_t e : g.out_edges(from)) {
      const std::size_t mid = g.edge_target(e);
      if (mid != to && reach.reaches(mid, to)) return true;
    }
    return false;
  };
  if (long_path(ia, ib) || long_path(ib, ia)) {
    throw Error(ErrorKind::kMergeCycle,
                "merging '" + a + "' and '" + b + "' would create a cycle", {a, b});
  }
  if (g.find_edge(ib, ia)) std::swap(ia, ib);

  const Operation& first = g.op(ia);
  const Operation& second = g.op(ib);
  auto placement = merged_placement(first, second);
  if (!placement) {
    throw Error(ErrorKind::kInvalidValue,
                "'" + a + "' and '" + b + "' share no candidate machine", {a, b});
  }

  Operation merged;
  merged.id = first.id + "+" + second.id;
  while (g.find(merged.id)) merged.id += "'";
  merged.duration = first.duration + second.duration;
  merged.weight_mem = first.weight_mem + second.weight_mem;
  merged.activation_delta = first.activation_delta + second.activation_delta;
  merged.weight_refs = first.weight_refs;
  merged.weight_refs.insert(merged.weight_refs.end(), second.weight_refs.begin(),
                            second.weight_refs.end());
  merged.allowed_machines = *placement;

  std::vector<Operation> ops;
  ops.reserve(g.size() - 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i != ia && i != ib) ops.push_back(g.op(i));
  }
  ops.push_back(merged);

  auto rename = [&](std::size_t i) -> const std::string& {
    return (i == ia || i == ib) ? merged.id : g.op(i).id;
  };
  std::map<std::pair<std::string, std::string>, Time> collapsed;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const std::string& from = rename(g.edge_source(e));
    const std::string& to = rename(g.edge_target(e));
    if (from == to) continue;
    collapsed[{from, to}] += g.edges()[e].comm_duration;
  }
  std::vector<DependencyEdge> edges;
  for (const auto& [key, comm] : collapsed) {
    edges.push_back(DependencyEdge{key.first, key.second, comm});
  }

  MergeResult result{ComputationGraph(std::move(ops), std::move(edges), g.weights()),
                     MergeRecord{merged.id, {first.id, second.id}}};
  return result;
}

CoarsenResult coarsen(const ComputationGraph& g, const CoarsenConfig& cfg) {
  cfg.validate();
  CoarsenResult result{g, {}, 0};
  if (g.size() <= cfg.node_budget) return result;

  std::unordered_map<std::string, std::vector<std::string>> members;
  for (const Operation& op : g.operations()) members[op.id] = {op.id};

  auto apply = [&](const NodePair& pair) {
    MergeResult merged = merge_nodes(result.graph, pair.first, pair.second);
    std::vector<std::string> absorbed = std::move(members[merged.record.absorbed[0]]);
    std::vector<std::string>& tail = members[merged.record.absorbed[1]];
    absorbed.insert(absorbed.end(), tail.begin(), tail.end());
    members.erase(merged.record.absorbed[0]);
    members.erase(merged.record.absorbed[1]);
    members[merged.record.new_id] = std::move(absorbed);
    result.graph = std::move(merged.graph);
    ++result.merges;
  };

  bool done = false;
  while (!done) {
    bool progressed = false;
    while (auto pair = get_candidate_edge(result.graph, cfg)) {
      apply(*pair);
      progressed = true;
      if (result.graph.size() <= cfg.node_budget) {
        done = true;
        break;
      }
    }
    if (done) break;
    while (auto pair = get_candidate_nonedge(result.graph, cfg)) {
      apply(*pair);
      progressed = true;
      if (result.graph.size() <= cfg.node_budget) {
        done = true;
        break;
      }
    }
    if (!progressed) break;
  }

  const std::vector<std::size_t> order = topo_indices(g);
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t k = 0; k < order.size(); ++k) rank[g.op(order[k]).id] = k;
  for (const Operation& op : result.graph.operations()) {
    std::vector<std::string>& absorbed = members.at(op.id);
    if (absorbed.size() < 2) continue;
    std::sort(absorbed.begin(), absorbed.end(),
              [&](const std::string& x, const std::string& y) { return rank.at(x) < rank.at(y); });
    result.records.push_back(MergeRecord{op.id, absorbed});
  }
  return result;
}

std::vector<std::string> expand_ids(const ComputationGraph& coarse,
                                    const std::vector<MergeRecord>& records) {
  std::unordered_map<std::string, const MergeRecord*> by_id;
  for (const MergeRecord& r : records) by_id[r.new_id] = &r;
  std::vector<std::string> out;
  for (const Operation& op : coarse.operations()) {
    auto it = by_id.find(op.id);
    if (it == by_id.end()) {
      out.push_back(op.id);
    } else {
      out.insert(out.end(), it->second->absorbed.begin(), it->second->absorbed.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace opplan
