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

#include "opplan/verify.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "json.hpp"
#include "json_util.hpp"
#include "replay.hpp"

namespace opplan {

namespace {

class Checker {
 public:
  Checker(const ComputationGraph& g, const HardwareCluster& h, const Solution& sol,
          bool capped, const LoadingData* ld)
      : g_(g), h_(h), sol_(sol), capped_(capped), ld_(ld) {}

  VerifyReport run() {
    rp_ = detail::replay(g_, h_, sol_, ld_);
    for (const std::string& id : rp_.unknown_ids) add("unknown-id", {id}, 0);
    for (const std::string& id : rp_.duplicate_ops) add("duplicate-op", {id}, 0);
    start_.assign(g_.size(), 0);
    end_.assign(g_.size(), 0);
    for (const OpPlacement& p : sol_.ops) {
      if (auto i = g_.find(p.op)) {
        start_[*i] = p.start;
        end_[*i] = p.end;
      }
    }
    bool complete = true;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      if (rp_.machine_of[i] == detail::kNone) {
        add("missing-op", {g_.op(i).id}, 0);
        complete = false;
      }
    }
    for (const OpPlacement& p : sol_.ops) {
      report_.makespan = std::max(report_.makespan, p.end);
    }
    check_ops();
    check_machines();
    if (complete) {
      check_comms();
      check_memory();
    }
    stats();
    report_.feasible = report_.violations.empty();
    return std::move(report_);
  }

 private:
  void add(std::string kind, std::vector<std::string> ids, Time t) {
    report_.violations.push_back(Violation{std::move(kind), std::move(ids), t});
  }

  Time occupied(std::size_t i) const {
    Time t = g_.op(i).duration;
    if (!ld_) return t;
    for (std::size_t w = 0; w < ld_->weights.size(); ++w) {
      if (rp_.load[i][w]) t += ld_->weights[w].load_cost;
      if (rp_.unload[i][w]) t += ld_->weights[w].unload_cost;
    }
    return t;
  }

  void check_ops() {
    for (std::size_t i = 0; i < g_.size(); ++i) {
      const std::size_t j = rp_.machine_of[i];
      if (j == detail::kNone) continue;
      const Operation& op = g_.op(i);
      if (start_[i] < 0) add("negative-time", {op.id}, start_[i]);
      if (end_[i] - start_[i] != occupied(i)) add("duration", {op.id}, start_[i]);
      if (!op.allowed_machines.empty() &&
          std::find(op.allowed_machines.begin(), op.allowed_machines.end(),
                    h_.machine(j).id) == op.allowed_machines.end()) {
        add("ineligible-machine", {op.id, h_.machine(j).id}, start_[i]);
      }
    }
  }

  void check_machines() {
    for (std::size_t j = 0; j < h_.size(); ++j) {
      const auto& seq = rp_.machines[j].sequence;
      for (std::size_t k = 1; k < seq.size(); ++k) {
        const std::size_t a = seq[k - 1];
        const std::size_t b = seq[k];
        if (start_[b] < end_[a]) {
          add("machine-overlap", {h_.machine(j).id, g_.op(a).id, g_.op(b).id}, start_[b]);
        }
      }
    }
  }

  void check_comms() {
    std::map<std::pair<std::string, std::string>, const CommPlacement*> by_edge;
    for (const CommPlacement& c : sol_.comms) {
      auto key = std::make_pair(c.producer, c.consumer);
      if (by_edge.count(key)) add("duplicate-comm", {c.producer, c.consumer}, c.start);
      by_edge[key] = &c;
      auto a = g_.find(c.producer);
      auto b = g_.find(c.consumer);
      if (!a || !b || !g_.find_edge(*a, *b)) add("unknown-comm", {c.producer, c.consumer}, c.start);
    }
    // Busy intervals per non-self channel.
    std::map<std::size_t, std::vector<std::pair<Time, Time>>> busy;
    std::map<std::size_t, std::vector<std::size_t>> edges_on;
    for (std::size_t k = 0; k < g_.edges().size(); ++k) {
      const DependencyEdge& e = g_.edges()[k];
      const std::size_t a = g_.edge_source(k);
      const std::size_t b = g_.edge_target(k);
      const std::size_t ja = rp_.machine_of[a];
      const std::size_t jb = rp_.machine_of[b];
      auto ch = h_.channel_index(ja, jb);
      if (!ch) {
        add("unconnected-channel", {e.producer, e.consumer}, end_[a]);
        continue;
      }
      auto it = by_edge.find({e.producer, e.consumer});
      if (it == by_edge.end()) {
        add("missing-comm", {e.producer, e.consumer}, end_[a]);
        continue;
      }
      const CommPlacement& c = *it->second;
      if (c.from_machine != h_.machine(ja).id || c.to_machine != h_.machine(jb).id) {
        add("comm-endpoints", {e.producer, e.consumer}, c.start);
      }
      const Time need = ja == jb ? 0 : e.comm_duration;
      if (c.end - c.start < need || c.end < c.start) {
        add("comm-duration", {e.producer, e.consumer}, c.start);
      }
      if (c.start < end_[a]) add("comm-release", {e.producer, e.consumer}, c.start);
      if (start_[b] < c.end) add("comm-arrival", {e.producer, e.consumer}, start_[b]);
      if (ja != jb && c.end > c.start) {
        busy[*ch].push_back({c.start, c.end});
        edges_on[*ch].push_back(k);
      }
    }
    for (auto& [ch, intervals] : busy) {
      std::vector<std::size_t> order(intervals.size());
      for (std::size_t x = 0; x < order.size(); ++x) order[x] = x;
      std::sort(order.begin(), order.end(),
                [&](std::size_t x, std::size_t y) { return intervals[x] < intervals[y]; });
      Time total = 0;
      for (std::size_t x = 0; x < order.size(); ++x) {
        total += intervals[order[x]].second - intervals[order[x]].first;
        if (x > 0 && intervals[order[x]].first < intervals[order[x - 1]].second) {
          const DependencyEdge& e1 = g_.edges()[edges_on[ch][order[x - 1]]];
          const DependencyEdge& e2 = g_.edges()[edges_on[ch][order[x]]];
          add("channel-overlap", {e1.producer, e1.consumer, e2.producer, e2.consumer},
              intervals[order[x]].first);
        }
      }
      const Channel& c = h_.channels()[ch];
      report_.channel_busy[c.from + "->" + c.to] =
          report_.makespan > 0 ? static_cast<double>(total) / static_cast<double>(report_.makespan)
                               : 0.0;
    }
  }

  void check_memory() {
    const std::size_t nw = ld_ ? ld_->weights.size() : 0;
    for (std::size_t j = 0; j < h_.size(); ++j) {
      const detail::MachineReplay& mr = rp_.machines[j];
      const Machine& mach = h_.machine(j);
      auto& trace = report_.memory_trace[mach.id];
      for (std::size_t pos = 0; pos < mr.sequence.size(); ++pos) {
        const std::size_t i = mr.sequence[pos];
        const std::string& id = g_.op(i).id;
        report_.op_levels[id] = {mr.before[pos], mr.after[pos]};
        Mem assets = 0;
        Mem assets_after = 0;
        for (std::size_t w = 0; w < nw; ++w) {
          const bool have = mr.active_before[pos][w];
          const bool ld = rp_.load[i][w];
          const bool ul = rp_.unload[i][w];
          const std::string& wid = ld_->weights[w].id;
          if (have && ld) add("load-resident", {id, wid}, start_[i]);
          if (ul && !(have || ld)) add("unload-absent", {id, wid}, end_[i]);
          if (have || ld) assets += ld_->weights[w].size;
          if ((have || ld) && !ul) assets_after += ld_->weights[w].size;
        }
        if (ld_) {
          for (std::size_t w : ld_->uses[i]) {
            if (!mr.active_before[pos][w] && !rp_.load[i][w]) {
              add("weight-absent", {id, ld_->weights[w].id}, start_[i]);
            }
          }
        }
        const Mem peak = std::max(mr.before[pos], mr.after[pos]) + assets;
        trace.push_back(MemoryPoint{start_[i], mr.before[pos] + assets});
        trace.push_back(MemoryPoint{end_[i], mr.after[pos] + assets_after});
        if (capped_ && peak > mach.memory_capacity) {
          add("memory-capacity", {mach.id, id}, start_[i]);
        }
      }
      Mem preloaded = 0;
      for (std::size_t w = 0; w < nw; ++w) {
        if (mr.preload[w]) preloaded += ld_->weights[w].size;
      }
      if (capped_ && mr.sequence.empty() && preloaded > mach.memory_capacity) {
        add("memory-capacity", {mach.id}, 0);
      }
    }
  }

  void stats() {
    Time busiest = 0;
    for (std::size_t j = 0; j < h_.size(); ++j) {
      DeviceStats d;
      d.machine = h_.machine(j).id;
      std::vector<std::pair<Time, Time>> iv;
      for (std::size_t i : rp_.machines[j].sequence) iv.push_back({start_[i], end_[i]});
      std::sort(iv.begin(), iv.end());
      Time reach = 0;
      for (std::size_t k = 0; k < iv.size(); ++k) {
        d.busy += iv[k].second - iv[k].first;
        if (k == 0) {
          d.leading_idle = iv[k].first;
        } else if (iv[k].first > reach) {
          d.bubble += iv[k].first - reach;
        }
        reach = std::max(reach, iv[k].second);
      }
      d.trailing_idle = iv.empty() ? report_.makespan : report_.makespan - reach;
      busiest = std::max(busiest, d.busy);
      report_.per_device_bubble[d.machine] = d.bubble;
      report_.interior_bubble_sum += d.bubble;
      report_.devices.push_back(std::move(d));
    }
    report_.bubble_total = report_.makespan - busiest;
  }

  const ComputationGraph& g_;
  const HardwareCluster& h_;
  const Solution& sol_;
  bool capped_;
  const LoadingData* ld_;
  detail::Replay rp_;
  std::vector<Time> start_;
  std::vector<Time> end_;
  VerifyReport report_;
};

}  // namespace

VerifyReport verify(const ComputationGraph& g, const HardwareCluster& h, const Solution& sol,
                    const VerifyOptions& opts) {
  if (opts.weights) {
    ComputationGraph with(g.operations(), g.edges(), *opts.weights);
    const LoadingData ld = detail::loading_from_graph(with);
    return Checker(with, h, sol, opts.memory_capped, &ld).run();
  }
  return Checker(g, h, sol, opts.memory_capped, nullptr).run();
}

VerifyReport verify(const ScheduleModel& model, const Solution& sol) {
  return Checker(model.graph(), model.cluster(), sol, model.options().memory_capped,
                 model.loading())
      .run();
}

void save_report(const VerifyReport& r, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["feasible"] = r.feasible;
  doc["makespan"] = r.makespan;
  auto& vs = doc["violations"] = nlohmann::ordered_json::array();
  for (const Violation& v : r.violations) {
    vs.push_back({{"kind", v.kind}, {"ids", v.ids}, {"time", v.time}});
  }
  auto& ds = doc["devices"] = nlohmann::ordered_json::array();
  for (const DeviceStats& d : r.devices) {
    ds.push_back({{"machine", d.machine},
                  {"busy", d.busy},
                  {"bubble", d.bubble},
                  {"leading_idle", d.leading_idle},
                  {"trailing_idle", d.trailing_idle}});
  }
  doc["per_device_bubble"] = r.per_device_bubble;
  doc["interior_bubble_sum"] = r.interior_bubble_sum;
  doc["bubble_total"] = r.bubble_total;
  auto& mt = doc["memory_trace"] = nlohmann::ordered_json::object();
  for (const auto& [machine, points] : r.memory_trace) {
    auto& arr = mt[machine] = nlohmann::ordered_json::array();
    for (const MemoryPoint& p : points) arr.push_back({p.time, p.level});
  }
  doc["channel_busy"] = r.channel_busy;
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

}  // namespace opplan
