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

#include <algorithm>
#include <map>
#include <tuple>

#include "opplan/error.hpp"
#include "opplan/model.hpp"
#include "opplan/solution.hpp"
#include "replay.hpp"

namespace opplan {

namespace detail {

LoadingData loading_from_graph(const ComputationGraph& g) {
  LoadingData ld;
  ld.weights = g.weights();
  ld.uses.assign(g.size(), {});
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const std::string& ref : g.op(i).weight_refs) {
      ld.uses[i].push_back(*g.find_weight(ref));
    }
    std::sort(ld.uses[i].begin(), ld.uses[i].end());
  }
  return ld;
}

Replay replay(const ComputationGraph& g, const HardwareCluster& h, const Solution& sol,
              const LoadingData* loading) {
  Replay r;
  const std::size_t nw = loading ? loading->weights.size() : 0;
  r.machine_of.assign(g.size(), kNone);
  r.position.assign(g.size(), kNone);
  r.machines.resize(h.size());
  r.load.assign(g.size(), std::vector<char>(nw, 0));
  r.unload.assign(g.size(), std::vector<char>(nw, 0));
  for (MachineReplay& m : r.machines) m.preload.assign(nw, 0);

  for (const OpPlacement& p : sol.ops) {
    auto i = g.find(p.op);
    auto j = h.find(p.machine);
    if (!i) r.unknown_ids.push_back(p.op);
    if (!j) r.unknown_ids.push_back(p.machine);
    if (!i || !j) continue;
    if (r.machine_of[*i] != kNone) {
      r.duplicate_ops.push_back(p.op);
      continue;
    }
    r.machine_of[*i] = *j;
    r.position[*i] = r.machines[*j].sequence.size();
    r.machines[*j].sequence.push_back(*i);
  }

  auto weight_index = [&](const std::string& id) -> std::size_t {
    if (!loading) return kNone;
    for (std::size_t w = 0; w < nw; ++w) {
      if (loading->weights[w].id == id) return w;
    }
    return kNone;
  };
  for (const LoadEvent& ev : sol.load_events) {
    auto i = g.find(ev.op);
    const std::size_t w = weight_index(ev.weight);
    if (!i || w == kNone) {
      r.unknown_ids.push_back(!i ? ev.op : ev.weight);
      continue;
    }
    (ev.kind == LoadKind::kLoad ? r.load : r.unload)[*i][w] = 1;
  }
  for (const Preload& p : sol.preloads) {
    auto j = h.find(p.machine);
    const std::size_t w = weight_index(p.weight);
    if (!j || w == kNone) {
      r.unknown_ids.push_back(!j ? p.machine : p.weight);
      continue;
    }
    r.machines[*j].preload[w] = 1;
  }

  for (MachineReplay& m : r.machines) {
    std::vector<Mem> deltas;
    for (std::size_t i : m.sequence) {
      m.static_weight += g.op(i).weight_mem;
      deltas.push_back(g.op(i).activation_delta);
    }
    m.base = base_level(m.static_weight, deltas);
    Mem level = m.base;
    std::vector<char> active = m.preload;
    for (std::size_t i : m.sequence) {
      m.before.push_back(level);
      level += g.op(i).activation_delta;
      m.after.push_back(level);
      m.active_before.push_back(active);
      for (std::size_t w = 0; w < nw; ++w) {
        active[w] = static_cast<char>(active[w] + r.load[i][w] - r.unload[i][w]);
      }
      m.active_after.push_back(active);
    }
  }
  return r;
}

}  // namespace detail

std::vector<RowViolation> evaluate(const ScheduleModel& model,
                                   const std::vector<std::int64_t>& values) {
  std::vector<RowViolation> out;
  if (values.size() != model.variables().size()) {
    throw Error(ErrorKind::kInconsistent, "value vector does not match the model's variables");
  }
  const auto& rows = model.constraints();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::int64_t lhs = 0;
    for (const Term& t : rows[r].terms) lhs += t.coef * values[t.var];
    bool ok = false;
    switch (rows[r].sense) {
      case Sense::kLe: ok = lhs <= rows[r].rhs; break;
      case Sense::kGe: ok = lhs >= rows[r].rhs; break;
      case Sense::kEq: ok = lhs == rows[r].rhs; break;
    }
    if (!ok) out.push_back(RowViolation{r, rows[r].tag, lhs});
  }
  for (std::size_t v = 0; v < values.size(); ++v) {
    const Variable& var = model.variables()[v];
    const bool bad = values[v] < 0 || (var.domain == Domain::kBinary && values[v] > 1);
    if (bad) out.push_back(RowViolation{rows.size(), var.name(), values[v]});
  }
  return out;
}

std::vector<std::int64_t> assignment_from_solution(const ScheduleModel& model,
                                                   const Solution& sol) {
  const ComputationGraph& g = model.graph();
  const HardwareCluster& h = model.cluster();
  const detail::Replay rp = detail::replay(g, h, sol, model.loading());
  if (!rp.unknown_ids.empty() || !rp.duplicate_ops.empty()) {
    throw Error(ErrorKind::kInconsistent, "solution does not match the model's ids",
                rp.unknown_ids.empty() ? rp.duplicate_ops : rp.unknown_ids);
  }
  std::vector<std::int64_t> v(model.variables().size(), 0);
  auto set = [&](VarKind kind, std::vector<std::string> ix, std::int64_t value) {
    auto id = model.find(kind, ix);
    if (!id) {
      if (value == 0) return;
      throw Error(ErrorKind::kInconsistent,
                  "solution uses a combination the model excludes: " +
                      Variable{kind, ix, Domain::kBinary}.name());
    }
    v[*id] = value;
  };

  std::vector<Time> start(g.size(), 0);
  std::vector<Time> end(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const OpPlacement* p = sol.find_op(g.op(i).id);
    if (!p) throw Error(ErrorKind::kInconsistent, "missing op '" + g.op(i).id + "'", {g.op(i).id});
    start[i] = p->start;
    end[i] = p->end;
  }
  set(VarKind::kMakespan, {}, sol.makespan());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::string& id = g.op(i).id;
    const std::size_t j = rp.machine_of[i];
    const detail::MachineReplay& mr = rp.machines[j];
    const std::size_t pos = rp.position[i];
    set(VarKind::kStart, {id}, start[i]);
    set(VarKind::kEnd, {id}, end[i]);
    set(VarKind::kAssign, {id, h.machine(j).id}, 1);
    if (pos == 0) set(VarKind::kFirst, {id, h.machine(j).id}, 1);
    set(VarKind::kMemBefore, {id}, mr.before[pos]);
    set(VarKind::kMemAfter, {id}, mr.after[pos]);
    if (pos + 1 < mr.sequence.size()) set(VarKind::kImmediate, {id, g.op(mr.sequence[pos + 1]).id}, 1);
  }
  // Order variables: sequence position on a shared machine, otherwise
  // (start, index) order.
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b = 0; b < g.size(); ++b) {
      if (a == b) continue;
      bool before = false;
      if (rp.machine_of[a] == rp.machine_of[b]) {
        before = rp.position[a] < rp.position[b];
      } else {
        // Pairs that can never share a machine carry no order variable.
        if (!model.find(VarKind::kOrder, {g.op(a).id, g.op(b).id})) continue;
        before = std::tie(start[a], a) < std::tie(start[b], b);
      }
      if (before) set(VarKind::kOrder, {g.op(a).id, g.op(b).id}, 1);
    }
  }

  struct CommInfo {
    std::vector<std::string> ix;
    std::size_t channel;
    Time start;
    Time end;
  };
  std::vector<CommInfo> comms;
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const DependencyEdge& e = g.edges()[k];
    std::vector<std::string> ix = {e.producer, e.consumer};
    const std::size_t ja = rp.machine_of[g.edge_source(k)];
    const std::size_t jb = rp.machine_of[g.edge_target(k)];
    auto ch = h.channel_index(ja, jb);
    if (!ch) {
      throw Error(ErrorKind::kInconsistent, "edge placed across unconnected machines",
                  {e.producer, e.consumer});
    }
    Time cs = end[g.edge_source(k)];
    Time ce = cs;
    for (const CommPlacement& c : sol.comms) {
      if (c.producer == e.producer && c.consumer == e.consumer) {
        cs = c.start;
        ce = c.end;
      }
    }
    set(VarKind::kSlack, ix, start[g.edge_target(k)] - start[g.edge_source(k)]);
    set(VarKind::kCommStart, ix, cs);
    set(VarKind::kCommEnd, ix, ce);
    auto zix = ix;
    zix.push_back(h.machine(ja).id);
    zix.push_back(h.machine(jb).id);
    set(VarKind::kChannelUse, zix, 1);
    comms.push_back(CommInfo{ix, *ch, cs, ce});
  }
  for (std::size_t k1 = 0; k1 < comms.size(); ++k1) {
    for (std::size_t k2 = 0; k2 < comms.size(); ++k2) {
      if (k1 == k2) continue;
      auto ix = comms[k1].ix;
      ix.insert(ix.end(), comms[k2].ix.begin(), comms[k2].ix.end());
      if (!model.find(VarKind::kCommOrder, ix)) continue;
      const bool before = std::tie(comms[k1].start, comms[k1].end, k1) <
                          std::tie(comms[k2].start, comms[k2].end, k2);
      if (before) v[model.at(VarKind::kCommOrder, ix)] = 1;
    }
  }

  if (const LoadingData* ld = model.loading()) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const detail::MachineReplay& mr = rp.machines[rp.machine_of[i]];
      const std::size_t pos = rp.position[i];
      for (std::size_t w = 0; w < ld->weights.size(); ++w) {
        const std::string& wid = ld->weights[w].id;
        set(VarKind::kLoad, {g.op(i).id, wid}, rp.load[i][w]);
        set(VarKind::kUnload, {g.op(i).id, wid}, rp.unload[i][w]);
        set(VarKind::kActiveBefore, {g.op(i).id, wid}, mr.active_before[pos][w]);
        set(VarKind::kActiveAfter, {g.op(i).id, wid}, mr.active_after[pos][w]);
      }
    }
    for (std::size_t j = 0; j < h.size(); ++j) {
      for (std::size_t w = 0; w < ld->weights.size(); ++w) {
        set(VarKind::kPreload, {ld->weights[w].id, h.machine(j).id}, rp.machines[j].preload[w]);
      }
    }
  }
  return v;
}

}  // namespace opplan
