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

#include "opplan/trace.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <tuple>

#include "json.hpp"
#include "opplan/error.hpp"

namespace opplan {

Trace build_trace(const Solution& sol, const ComputationGraph& g, const HardwareCluster& h) {
  Trace t;
  const int m = static_cast<int>(h.size());
  for (int j = 0; j < m; ++j) t.lanes.push_back({j, h.machine(j).id});
  const std::vector<Channel> channels = h.declared_channels();
  std::map<std::pair<std::string, std::string>, int> channel_lane;
  for (const Channel& c : channels) {
    const int pid = static_cast<int>(t.lanes.size());
    channel_lane[{c.from, c.to}] = pid;
    t.lanes.push_back({pid, c.from + "->" + c.to});
  }
  const bool streams = !g.weights().empty() || !sol.load_events.empty();
  const int stream_base = static_cast<int>(t.lanes.size());
  if (streams) {
    for (int j = 0; j < m; ++j) t.lanes.push_back({stream_base + j, h.machine(j).id + " weights"});
  }

  auto us = [](Time v) { return static_cast<std::int64_t>(v) * kTraceMicrosPerUnit; };
  std::map<std::string, std::vector<const LoadEvent*>> events_of;
  for (const LoadEvent& ev : sol.load_events) events_of[ev.op].push_back(&ev);
  auto weight = [&](const std::string& id) -> const WeightAsset& {
    auto w = g.find_weight(id);
    if (!w) throw Error(ErrorKind::kInconsistent, "unknown weight '" + id + "'", {id});
    return g.weights()[*w];
  };

  for (const OpPlacement& p : sol.ops) {
    auto j = h.find(p.machine);
    auto i = g.find(p.op);
    if (!j || !i) {
      throw Error(ErrorKind::kInconsistent, "trace names unknown ids", {p.op, p.machine});
    }
    std::vector<const LoadEvent*> loads;
    std::vector<const LoadEvent*> unloads;
    for (const LoadEvent* ev : events_of[p.op]) {
      (ev->kind == LoadKind::kLoad ? loads : unloads).push_back(ev);
    }
    auto by_weight = [&](const LoadEvent* a, const LoadEvent* b) {
      return *g.find_weight(a->weight) < *g.find_weight(b->weight);
    };
    Time cursor = p.start;
    for (const LoadEvent* ev : loads) weight(ev->weight);
    std::sort(loads.begin(), loads.end(), by_weight);
    for (const LoadEvent* ev : loads) {
      const Time c = weight(ev->weight).load_cost;
      t.events.push_back({ev->weight, "load", us(cursor), us(c), stream_base + int(*j), 0});
      cursor += c;
    }
    const Time d = g.op(*i).duration;
    t.events.push_back({p.op, "compute", us(cursor), us(d), static_cast<int>(*j), 0});
    cursor += d;
    for (const LoadEvent* ev : unloads) weight(ev->weight);
    std::sort(unloads.begin(), unloads.end(), by_weight);
    for (const LoadEvent* ev : unloads) {
      const Time c = weight(ev->weight).unload_cost;
      t.events.push_back({ev->weight, "unload", us(cursor), us(c), stream_base + int(*j), 0});
      cursor += c;
    }
  }
  for (const CommPlacement& c : sol.comms) {
    if (c.from_machine == c.to_machine || c.end <= c.start) continue;
    auto lane = channel_lane.find({c.from_machine, c.to_machine});
    if (lane == channel_lane.end()) {
      throw Error(ErrorKind::kInconsistent, "transfer on an undeclared channel",
                  {c.from_machine, c.to_machine});
    }
    t.events.push_back({c.producer + "->" + c.consumer, "comm", us(c.start), us(c.end - c.start),
                        lane->second, 0});
  }
  std::stable_sort(t.events.begin(), t.events.end(), [](const TraceEvent& a, const TraceEvent& b) {
    return std::tie(a.process_id, a.start_us) < std::tie(b.process_id, b.start_us);
  });
  return t;
}

void export_trace(const Solution& sol, const ComputationGraph& g, const HardwareCluster& h,
                  std::ostream& out) {
  const Trace t = build_trace(sol, g, h);
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  doc.push_back({{"name", "time_scale"},
                 {"ph", "M"},
                 {"pid", 0},
                 {"tid", 0},
                 {"args", {{"us_per_unit", kTraceMicrosPerUnit}}}});
  for (const TraceLane& lane : t.lanes) {
    doc.push_back({{"name", "process_name"},
                   {"ph", "M"},
                   {"pid", lane.process_id},
                   {"tid", 0},
                   {"args", {{"name", lane.name}}}});
    doc.push_back({{"name", "process_sort_index"},
                   {"ph", "M"},
                   {"pid", lane.process_id},
                   {"tid", 0},
                   {"args", {{"sort_index", lane.process_id}}}});
  }
  for (const TraceEvent& e : t.events) {
    doc.push_back({{"name", e.name},
                   {"cat", e.category},
                   {"ph", "X"},
                   {"ts", e.start_us},
                   {"dur", e.duration_us},
                   {"pid", e.process_id},
                   {"tid", e.thread_id}});
  }
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

void write_gantt(const Solution& sol, std::ostream& out) {
  std::size_t wm = 7;
  std::size_t wo = 2;
  for (const OpPlacement& p : sol.ops) {
    wm = std::max(wm, p.machine.size());
    wo = std::max(wo, p.op.size());
  }
  out << std::left << std::setw(static_cast<int>(wm)) << "machine" << "  "
      << std::setw(static_cast<int>(wo)) << "op" << "  " << std::right << std::setw(8) << "start"
      << "  " << std::setw(8) << "end" << '\n';
  for (const OpPlacement& p : sol.ops) {
    out << std::left << std::setw(static_cast<int>(wm)) << p.machine << "  "
        << std::setw(static_cast<int>(wo)) << p.op << "  " << std::right << std::setw(8)
        << p.start << "  " << std::setw(8) << p.end << '\n';
  }
  out << std::left;
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

}  // namespace opplan
