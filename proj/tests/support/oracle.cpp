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

#include "oracle.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace opplan::oracle {

namespace {

class Enumerator {
 public:
  Enumerator(const ComputationGraph& g, const HardwareCluster& h, bool capped)
      : g_(g), h_(h), capped_(capped), n_(g.size()), m_(h.size()), nw_(g.weights().size()) {
    assign_.assign(n_, 0);
    seq_.assign(m_, {});
    uses_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (const std::string& w : g.op(i).weight_refs) uses_[i] |= 1U << *g.find_weight(w);
    }
  }

  OracleResult run() {
    assign_rec(0);
    return best_;
  }

 private:
  bool eligible(std::size_t i, std::size_t j) const {
    const auto& allowed = g_.op(i).allowed_machines;
    return allowed.empty() ||
           std::find(allowed.begin(), allowed.end(), h_.machine(j).id) != allowed.end();
  }

  void assign_rec(std::size_t i) {
    if (i == n_) {
      for (std::size_t e = 0; e < g_.edges().size(); ++e) {
        const std::size_t a = assign_[g_.edge_source(e)];
        const std::size_t b = assign_[g_.edge_target(e)];
        if (a != b && !h_.connected(a, b)) return;
      }
      for (auto& s : seq_) s.clear();
      for (std::size_t k = 0; k < n_; ++k) seq_[assign_[k]].push_back(k);
      perm_rec(0);
      return;
    }
    for (std::size_t j = 0; j < m_; ++j) {
      if (!eligible(i, j)) continue;
      assign_[i] = j;
      assign_rec(i + 1);
    }
  }

  void perm_rec(std::size_t j) {
    if (j == m_) {
      occupied_.assign(n_, 0);
      for (std::size_t i = 0; i < n_; ++i) occupied_[i] = g_.op(i).duration;
      load_rec(0);
      return;
    }
    std::vector<std::size_t> ops = seq_[j];
    std::sort(ops.begin(), ops.end());
    do {
      seq_[j] = ops;
      perm_rec(j + 1);
    } while (std::next_permutation(ops.begin(), ops.end()));
  }

  // Weight decisions machine by machine; without weights only the
  // activation chain is checked.
  void load_rec(std::size_t j) {
    if (j == m_) {
      channel_setup();
      return;
    }
    if (seq_[j].empty()) {
      load_rec(j + 1);
      return;
    }
    const unsigned full = (1U << nw_) - 1;
    for (unsigned pre = 0; pre <= full; ++pre) {
      if (nw_ == 0 && pre > 0) break;
      assets_.assign(seq_[j].size(), 0);
      op_rec(j, 0, pre);
    }
  }

  void op_rec(std::size_t j, std::size_t pos, unsigned active) {
    if (pos == seq_[j].size()) {
      if (memory_ok(j)) load_rec(j + 1);
      return;
    }
    const std::size_t i = seq_[j][pos];
    const unsigned full = (1U << nw_) - 1;
    for (unsigned load = 0; load <= full; ++load) {
      if (load & active) continue;
      const unsigned present = active | load;
      if ((uses_[i] & present) != uses_[i]) continue;
      for (unsigned unload = 0; unload <= full; ++unload) {
        if (unload & ~present) continue;
        Time extra = 0;
        Mem size = 0;
        for (std::size_t w = 0; w < nw_; ++w) {
          const WeightAsset& a = g_.weights()[w];
          if (load >> w & 1U) extra += a.load_cost;
          if (unload >> w & 1U) extra += a.unload_cost;
          if (present >> w & 1U) size += a.size;
        }
        occupied_[i] = g_.op(i).duration + extra;
        assets_[pos] = size;
        op_rec(j, pos + 1, present & ~unload);
      }
    }
    occupied_[i] = g_.op(i).duration;
  }

  // Some starting level in [0, cap] keeps every level within bounds.
  bool memory_ok(std::size_t j) const {
    if (!capped_) return true;
    const Mem cap = h_.machine(j).memory_capacity;
    Mem stat = 0;
    for (std::size_t i : seq_[j]) stat += g_.op(i).weight_mem;
    for (Mem start = 0; start <= cap; ++start) {
      Mem level = start;
      bool ok = true;
      for (std::size_t pos = 0; pos < seq_[j].size() && ok; ++pos) {
        const Mem before = level;
        const Mem after = level + g_.op(seq_[j][pos]).activation_delta;
        ok = before >= stat && after >= 0 && std::max(before, after) + assets_[pos] <= cap;
        level = after;
      }
      if (ok) return true;
    }
    return false;
  }

  void channel_setup() {
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> by_channel;
    for (std::size_t e = 0; e < g_.edges().size(); ++e) {
      const std::size_t a = assign_[g_.edge_source(e)];
      const std::size_t b = assign_[g_.edge_target(e)];
      if (a != b && g_.edges()[e].comm_duration > 0) by_channel[{a, b}].push_back(e);
    }
    channel_lists_.clear();
    for (auto& [key, list] : by_channel) channel_lists_.push_back(list);
    channel_rec(0);
  }

  void channel_rec(std::size_t c) {
    if (c == channel_lists_.size()) {
      time_all();
      return;
    }
    std::vector<std::size_t> order = channel_lists_[c];
    const std::vector<std::size_t> saved = order;
    do {
      channel_lists_[c] = order;
      channel_rec(c + 1);
    } while (std::next_permutation(order.begin(), order.end()));
    channel_lists_[c] = saved;
  }

  void time_all() {
    ++best_.schedules;
    // Nodes: ops 0..n-1, then one node per positive-length cross-machine
    // transfer (indexed by edge).
    const std::size_t ne = g_.edges().size();
    std::vector<Time> dur(n_ + ne, 0);
    for (std::size_t i = 0; i < n_; ++i) dur[i] = occupied_[i];
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    for (std::size_t e = 0; e < ne; ++e) {
      const std::size_t a = g_.edge_source(e);
      const std::size_t b = g_.edge_target(e);
      if (assign_[a] != assign_[b] && g_.edges()[e].comm_duration > 0) {
        dur[n_ + e] = g_.edges()[e].comm_duration;
        arcs.push_back({a, n_ + e});
        arcs.push_back({n_ + e, b});
      } else {
        arcs.push_back({a, b});
      }
    }
    for (const auto& s : seq_) {
      for (std::size_t k = 1; k < s.size(); ++k) arcs.push_back({s[k - 1], s[k]});
    }
    for (const auto& list : channel_lists_) {
      for (std::size_t k = 1; k < list.size(); ++k) arcs.push_back({n_ + list[k - 1], n_ + list[k]});
    }
    std::vector<Time> start(n_ + ne, 0);
    const std::size_t rounds = n_ + ne + 1;
    bool changed = true;
    for (std::size_t r = 0; r < rounds && changed; ++r) {
      changed = false;
      for (auto [u, v] : arcs) {
        if (start[u] + dur[u] > start[v]) {
          start[v] = start[u] + dur[u];
          changed = true;
        }
      }
    }
    if (changed) return;  // cyclic sequencing
    Time makespan = 0;
    for (std::size_t i = 0; i < n_; ++i) makespan = std::max(makespan, start[i] + dur[i]);
    if (!best_.feasible || makespan < best_.makespan) {
      best_.feasible = true;
      best_.makespan = makespan;
    }
  }

  const ComputationGraph& g_;
  const HardwareCluster& h_;
  bool capped_;
  std::size_t n_, m_, nw_;
  std::vector<std::size_t> assign_;
  std::vector<std::vector<std::size_t>> seq_;
  std::vector<unsigned> uses_;
  std::vector<Time> occupied_;
  std::vector<Mem> assets_;
  std::vector<std::vector<std::size_t>> channel_lists_;
  OracleResult best_;
};

}  // namespace

OracleResult brute_force(const ComputationGraph& g, const HardwareCluster& h,
                         bool memory_capped) {
  return Enumerator(g, h, memory_capped).run();
}

TinyInstance random_tiny(std::mt19937_64& rng, const TinySpec& spec) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  const int n = uni(1, spec.max_ops);
  const int m = uni(1, spec.max_machines);
  std::vector<Machine> machines;
  const bool capped = chance(0.5);
  for (int j = 0; j < m; ++j) {
    machines.push_back(Machine{"m" + std::to_string(j), capped ? uni(1, 8) : 1000});
  }
  std::vector<Channel> channels;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a != b && chance(0.8)) channels.push_back({machines[a].id, machines[b].id});
    }
  }

  std::vector<WeightAsset> weights;
  const int nw = spec.max_weights > 0 ? uni(1, spec.max_weights) : 0;
  for (int w = 0; w < nw; ++w) {
    weights.push_back(WeightAsset{"w" + std::to_string(w), uni(1, 3), uni(0, 2), uni(0, 2)});
  }

  std::vector<Operation> ops;
  for (int i = 0; i < n; ++i) {
    Operation op;
    op.id = "o" + std::to_string(i);
    op.duration = chance(0.1) ? 0 : uni(1, 4);
    op.weight_mem = uni(0, 2);
    op.activation_delta = uni(-1, 2);
    for (const WeightAsset& w : weights) {
      if (chance(0.5)) op.weight_refs.push_back(w.id);
    }
    if (spec.allow_pinning && m > 1 && chance(0.2)) {
      op.allowed_machines = {machines[uni(0, m - 1)].id};
    }
    ops.push_back(std::move(op));
  }
  std::vector<DependencyEdge> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (chance(0.35)) {
        edges.push_back({ops[a].id, ops[b].id, spec.allow_comm ? uni(0, 3) : 0});
      }
    }
  }
  return TinyInstance{ComputationGraph(std::move(ops), std::move(edges), std::move(weights)),
                      HardwareCluster(std::move(machines), std::move(channels)), capped};
}

}  // namespace opplan::oracle
