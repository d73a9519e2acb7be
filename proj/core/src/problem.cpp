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

#include "problem.hpp"

#include <algorithm>
#include <limits>

#include "opplan/error.hpp"
#include "replay.hpp"

namespace opplan::detail {

Time Problem::occupied(std::size_t i, const std::vector<char>* load,
                       const std::vector<char>* unload) const {
  Time t = dur[i];
  if (!ext) return t;
  for (std::size_t w = 0; w < nw; ++w) {
    if (load && (*load)[w]) t += wload[w];
    if (unload && (*unload)[w]) t += wunload[w];
  }
  return t;
}

Problem make_problem(const ScheduleModel& model) {
  const ComputationGraph& g = model.graph();
  const HardwareCluster& h = model.cluster();
  Problem p;
  p.model = &model;
  p.n = g.size();
  p.m = h.size();
  p.ne = g.edges().size();
  for (const Operation& op : g.operations()) {
    p.dur.push_back(op.duration);
    p.weight.push_back(op.weight_mem);
    p.delta.push_back(op.activation_delta);
  }
  p.can_run.assign(p.n, std::vector<char>(p.m, 0));
  for (std::size_t i = 0; i < p.n; ++i) {
    p.eligible.push_back(model.eligible(i));
    for (std::size_t j : p.eligible[i]) p.can_run[i][j] = 1;
  }
  p.in_edges.assign(p.n, {});
  p.out_edges.assign(p.n, {});
  for (std::size_t k = 0; k < p.ne; ++k) {
    p.esrc.push_back(g.edge_source(k));
    p.edst.push_back(g.edge_target(k));
    p.ecomm.push_back(g.edges()[k].comm_duration);
    p.out_edges[g.edge_source(k)].push_back(k);
    p.in_edges[g.edge_target(k)].push_back(k);
  }
  p.channel.assign(p.m, std::vector<std::ptrdiff_t>(p.m, -1));
  p.nch = h.channels().size();
  for (std::size_t c = 0; c < p.nch; ++c) {
    p.channel[h.channel_from(c)][h.channel_to(c)] = static_cast<std::ptrdiff_t>(c);
    p.channel_self.push_back(h.channels()[c].is_self() ? 1 : 0);
  }
  for (std::size_t k = 0; k < p.ne; ++k) {
    Time best = std::numeric_limits<Time>::max();
    for (std::size_t j1 : p.eligible[p.esrc[k]]) {
      for (std::size_t j2 : p.eligible[p.edst[k]]) {
        if (p.channel[j1][j2] >= 0) best = std::min(best, p.comm_time(k, j1, j2));
      }
    }
    p.min_comm.push_back(best == std::numeric_limits<Time>::max() ? 0 : best);
  }

  p.capped = model.options().memory_capped;
  const Mem unlimited = std::numeric_limits<Mem>::max() / 4;
  for (std::size_t j = 0; j < p.m; ++j) p.cap.push_back(p.capped ? model.capacity(j) : unlimited);

  if (const LoadingData* ld = model.loading()) {
    p.ext = true;
    p.nw = ld->weights.size();
    for (const WeightAsset& w : ld->weights) {
      p.wsize.push_back(w.size);
      p.wload.push_back(w.load_cost);
      p.wunload.push_back(w.unload_cost);
    }
    p.uses = ld->uses;
  } else {
    p.uses.assign(p.n, {});
  }

  p.topo = topo_indices(g);
  p.head.assign(p.n, 0);
  p.tail.assign(p.n, 0);
  for (std::size_t i : p.topo) {
    for (std::size_t k : p.out_edges[i]) {
      p.head[p.edst[k]] = std::max(p.head[p.edst[k]], p.head[i] + p.dur[i] + p.min_comm[k]);
    }
  }
  for (auto it = p.topo.rbegin(); it != p.topo.rend(); ++it) {
    const std::size_t i = *it;
    for (std::size_t k : p.out_edges[i]) {
      const std::size_t b = p.edst[k];
      p.tail[i] = std::max(p.tail[i], p.min_comm[k] + p.dur[b] + p.tail[b]);
    }
  }
  p.horizon = model.big_m();
  return p;
}

void Plan::reset(const Problem& p) {
  machine.assign(p.n, kNone);
  start.assign(p.n, 0);
  end.assign(p.n, 0);
  seq.assign(p.m, {});
  comm_start.assign(p.ne, 0);
  comm_end.assign(p.ne, 0);
  load.assign(p.n, std::vector<char>(p.nw, 0));
  unload.assign(p.n, std::vector<char>(p.nw, 0));
  preload.assign(p.m, std::vector<char>(p.nw, 0));
  makespan = 0;
}

bool time_plan(const Problem& p, Plan& plan,
               const std::vector<std::vector<std::size_t>>& channel_seq) {
  // Nodes: ops [0, n), transfers [n, n + ne).
  const std::size_t total = p.n + p.ne;
  std::vector<std::vector<std::size_t>> succ(total);
  std::vector<std::size_t> indeg(total, 0);
  auto arc = [&](std::size_t a, std::size_t b) {
    succ[a].push_back(b);
    ++indeg[b];
  };
  for (std::size_t j = 0; j < p.m; ++j) {
    for (std::size_t k = 1; k < plan.seq[j].size(); ++k) arc(plan.seq[j][k - 1], plan.seq[j][k]);
  }
  for (std::size_t e = 0; e < p.ne; ++e) {
    arc(p.esrc[e], p.n + e);
    arc(p.n + e, p.edst[e]);
  }
  for (const auto& order : channel_seq) {
    for (std::size_t k = 1; k < order.size(); ++k) arc(p.n + order[k - 1], p.n + order[k]);
  }

  std::vector<Time> ready(total, 0);
  std::vector<std::size_t> stack;
  for (std::size_t v = 0; v < total; ++v) {
    if (indeg[v] == 0) stack.push_back(v);
  }
  std::size_t seen = 0;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    ++seen;
    Time finish = 0;
    if (v < p.n) {
      plan.start[v] = ready[v];
      plan.end[v] = ready[v] + p.occupied(v, p.ext ? &plan.load[v] : nullptr,
                                          p.ext ? &plan.unload[v] : nullptr);
      finish = plan.end[v];
    } else {
      const std::size_t e = v - p.n;
      plan.comm_start[e] = ready[v];
      plan.comm_end[e] =
          ready[v] + p.comm_time(e, plan.machine[p.esrc[e]], plan.machine[p.edst[e]]);
      finish = plan.comm_end[e];
    }
    for (std::size_t w : succ[v]) {
      ready[w] = std::max(ready[w], finish);
      if (--indeg[w] == 0) stack.push_back(w);
    }
  }
  if (seen != total) return false;
  plan.makespan = 0;
  for (std::size_t i = 0; i < p.n; ++i) plan.makespan = std::max(plan.makespan, plan.end[i]);
  return true;
}

bool memory_ok_machine(const Problem& p, const Plan& plan, std::size_t j) {
  const auto& seq = plan.seq[j];
  Mem stat = 0;
  std::vector<Mem> deltas;
  deltas.reserve(seq.size());
  for (std::size_t i : seq) {
    stat += p.weight[i];
    deltas.push_back(p.delta[i]);
  }
  Mem level = base_level(stat, deltas);
  std::vector<char> resident = p.ext ? plan.preload[j] : std::vector<char>();
  for (std::size_t i : seq) {
    Mem assets = 0;
    if (p.ext) {
      for (std::size_t w = 0; w < p.nw; ++w) {
        const bool have = resident[w];
        const bool ld = plan.load[i][w];
        if (have && ld) return false;
        if (plan.unload[i][w] && !(have || ld)) return false;
        if (have || ld) assets += p.wsize[w];
      }
      for (std::size_t w : p.uses[i]) {
        if (!resident[w] && !plan.load[i][w]) return false;
      }
    }
    const Mem after = level + p.delta[i];
    if (std::max(level, after) + assets > p.cap[j]) return false;
    level = after;
    if (p.ext) {
      for (std::size_t w = 0; w < p.nw; ++w) {
        resident[w] = static_cast<char>((resident[w] || plan.load[i][w]) && !plan.unload[i][w]);
      }
    }
  }
  return true;
}

bool memory_ok(const Problem& p, const Plan& plan) {
  for (std::size_t j = 0; j < p.m; ++j) {
    if (!memory_ok_machine(p, plan, j)) return false;
  }
  return true;
}

Solution to_solution(const Problem& p, const Plan& plan) {
  const ComputationGraph& g = p.model->graph();
  const HardwareCluster& h = p.model->cluster();
  Solution sol;
  for (std::size_t j = 0; j < p.m; ++j) {
    for (std::size_t i : plan.seq[j]) {
      sol.ops.push_back(OpPlacement{g.op(i).id, h.machine(j).id, plan.start[i], plan.end[i]});
    }
  }
  for (std::size_t e = 0; e < p.ne; ++e) {
    sol.comms.push_back(CommPlacement{g.op(p.esrc[e]).id, g.op(p.edst[e]).id,
                                      h.machine(plan.machine[p.esrc[e]]).id,
                                      h.machine(plan.machine[p.edst[e]]).id, plan.comm_start[e],
                                      plan.comm_end[e]});
  }
  if (p.ext) {
    const LoadingData& ld = *p.model->loading();
    for (std::size_t i = 0; i < p.n; ++i) {
      for (std::size_t w = 0; w < p.nw; ++w) {
        if (plan.load[i][w]) sol.load_events.push_back({g.op(i).id, ld.weights[w].id, LoadKind::kLoad});
        if (plan.unload[i][w]) {
          sol.load_events.push_back({g.op(i).id, ld.weights[w].id, LoadKind::kUnload});
        }
      }
    }
    for (std::size_t w = 0; w < p.nw; ++w) {
      for (std::size_t j = 0; j < p.m; ++j) {
        if (plan.preload[j][w]) sol.preloads.push_back({ld.weights[w].id, h.machine(j).id});
      }
    }
  }
  sol.objective = plan.makespan;
  return sol;
}

Plan plan_from_solution(const Problem& p, const Solution& sol) {
  const ComputationGraph& g = p.model->graph();
  const HardwareCluster& h = p.model->cluster();
  const Replay rp = replay(g, h, sol, p.model->loading());
  if (!rp.unknown_ids.empty()) {
    throw Error(ErrorKind::kInconsistent, "solution names unknown ids", rp.unknown_ids);
  }
  Plan plan;
  plan.reset(p);
  for (std::size_t i = 0; i < p.n; ++i) {
    if (rp.machine_of[i] == kNone) {
      throw Error(ErrorKind::kInconsistent, "solution misses op '" + g.op(i).id + "'", {g.op(i).id});
    }
    plan.machine[i] = rp.machine_of[i];
  }
  for (std::size_t j = 0; j < p.m; ++j) plan.seq[j] = rp.machines[j].sequence;
  for (const OpPlacement& op : sol.ops) {
    const std::size_t i = *g.find(op.op);
    plan.start[i] = op.start;
    plan.end[i] = op.end;
    plan.makespan = std::max(plan.makespan, op.end);
  }
  for (std::size_t e = 0; e < p.ne; ++e) {
    plan.comm_start[e] = plan.comm_end[e] = plan.end[p.esrc[e]];
  }
  for (const CommPlacement& c : sol.comms) {
    auto a = g.find(c.producer);
    auto b = g.find(c.consumer);
    if (!a || !b) continue;
    auto e = g.find_edge(*a, *b);
    if (!e) continue;
    plan.comm_start[*e] = c.start;
    plan.comm_end[*e] = c.end;
  }
  plan.load = rp.load;
  plan.unload = rp.unload;
  for (std::size_t j = 0; j < p.m; ++j) plan.preload[j] = rp.machines[j].preload;
  return plan;
}

}  // namespace opplan::detail
