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
#include <set>

#include "opplan/error.hpp"
#include "opplan/verify.hpp"

namespace opplan {

Solution expand_schedule(const Solution& sol, const std::vector<MergeRecord>& records,
                         const ComputationGraph& original) {
  std::map<std::string, const MergeRecord*> by_node;
  std::map<std::string, std::string> node_of;  // original id -> coarse id
  for (const MergeRecord& r : records) {
    by_node[r.new_id] = &r;
    for (const std::string& id : r.absorbed) {
      if (!original.find(id)) {
        throw Error(ErrorKind::kInconsistent, "merge record names unknown op '" + id + "'", {id});
      }
      if (!node_of.emplace(id, r.new_id).second) {
        throw Error(ErrorKind::kInconsistent, "op '" + id + "' absorbed twice", {id});
      }
    }
  }

  Solution out;
  out.status = sol.status;
  out.objective = sol.objective;
  out.bound = sol.bound;
  out.infeasible_tags = sol.infeasible_tags;
  std::map<std::string, std::string> machine_of;
  std::set<std::string> seen;
  for (const OpPlacement& p : sol.ops) {
    auto rec = by_node.find(p.op);
    if (rec == by_node.end()) {
      if (!original.find(p.op) || node_of.count(p.op)) {
        throw Error(ErrorKind::kInconsistent, "schedule names unknown op '" + p.op + "'", {p.op});
      }
      out.ops.push_back(p);
      machine_of[p.op] = p.machine;
      seen.insert(p.op);
      continue;
    }
    const auto& absorbed = rec->second->absorbed;
    Time total = 0;
    for (const std::string& id : absorbed) total += original.op(original.index(id)).duration;
    const Time span = p.end - p.start;
    Time prefix = 0;
    for (std::size_t k = 0; k < absorbed.size(); ++k) {
      const Time d = original.op(original.index(absorbed[k])).duration;
      const Time s = total > 0 ? p.start + span * prefix / total : p.start;
      prefix += d;
      Time e = total > 0 ? p.start + span * prefix / total : p.start;
      if (k + 1 == absorbed.size()) e = p.end;
      out.ops.push_back(OpPlacement{absorbed[k], p.machine, s, e});
      machine_of[absorbed[k]] = p.machine;
      seen.insert(absorbed[k]);
    }
  }
  for (const Operation& op : original.operations()) {
    if (!seen.count(op.id)) {
      throw Error(ErrorKind::kInconsistent, "schedule does not cover op '" + op.id + "'", {op.id});
    }
  }

  auto coarse = [&](const std::string& id) {
    auto it = node_of.find(id);
    return it == node_of.end() ? id : it->second;
  };
  std::map<std::pair<std::string, std::string>, const CommPlacement*> coarse_comm;
  for (const CommPlacement& c : sol.comms) coarse_comm[{c.producer, c.consumer}] = &c;
  std::map<std::string, Time> end_of;
  for (const OpPlacement& p : out.ops) end_of[p.op] = p.end;
  for (const DependencyEdge& e : original.edges()) {
    const std::string a = coarse(e.producer);
    const std::string b = coarse(e.consumer);
    CommPlacement c{e.producer, e.consumer, machine_of[e.producer], machine_of[e.consumer],
                    end_of[e.producer], end_of[e.producer]};
    if (a != b) {
      auto it = coarse_comm.find({a, b});
      if (it == coarse_comm.end()) {
        throw Error(ErrorKind::kInconsistent,
                    "schedule lacks the transfer " + a + " -> " + b, {a, b});
      }
      c.start = it->second->start;
      c.end = it->second->end;
    }
    out.comms.push_back(c);
  }

  for (const LoadEvent& ev : sol.load_events) {
    auto rec = by_node.find(ev.op);
    if (rec == by_node.end()) {
      out.load_events.push_back(ev);
      continue;
    }
    const auto& absorbed = rec->second->absorbed;
    out.load_events.push_back(
        LoadEvent{ev.kind == LoadKind::kLoad ? absorbed.front() : absorbed.back(), ev.weight,
                  ev.kind});
  }
  out.preloads = sol.preloads;
  return out;
}

}  // namespace opplan
