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
#include <fstream>

#include "json_util.hpp"
#include "opplan/error.hpp"
#include "opplan/solution.hpp"

namespace opplan {

namespace {

using json = nlohmann::ordered_json;

constexpr std::pair<SolveStatus, const char*> kStatusNames[] = {
    {SolveStatus::kOptimal, "optimal"},
    {SolveStatus::kFeasible, "feasible"},
    {SolveStatus::kInfeasible, "infeasible"},
    {SolveStatus::kTimeLimit, "time-limit"},
};

SolveStatus parse_status(const std::string& s) {
  for (const auto& [status, name] : kStatusNames) {
    if (s == name) return status;
  }
  throw Error(ErrorKind::kSchema, "unknown status '" + s + "'");
}

}  // namespace

const char* to_string(SolveStatus status) {
  for (const auto& [st, name] : kStatusNames) {
    if (st == status) return name;
  }
  return "unknown";
}

const OpPlacement* Solution::find_op(const std::string& id) const {
  for (const OpPlacement& p : ops) {
    if (p.op == id) return &p;
  }
  return nullptr;
}

Time Solution::makespan() const {
  Time t = 0;
  for (const OpPlacement& p : ops) t = std::max(t, p.end);
  return t;
}

void save_solution(const Solution& sol, std::ostream& out) {
  json doc;
  doc["status"] = to_string(sol.status);
  doc["objective"] = sol.objective;
  doc["bound"] = sol.bound;
  json& ops = doc["ops"] = json::array();
  for (const OpPlacement& p : sol.ops) {
    ops.push_back({{"op", p.op}, {"machine", p.machine}, {"start", p.start}, {"end", p.end}});
  }
  json& comms = doc["comms"] = json::array();
  for (const CommPlacement& c : sol.comms) {
    comms.push_back({{"from", c.producer},
                     {"to", c.consumer},
                     {"from_machine", c.from_machine},
                     {"to_machine", c.to_machine},
                     {"start", c.start},
                     {"end", c.end}});
  }
  json& loads = doc["load_events"] = json::array();
  for (const LoadEvent& ev : sol.load_events) {
    loads.push_back({{"op", ev.op},
                     {"weight", ev.weight},
                     {"kind", ev.kind == LoadKind::kLoad ? "load" : "unload"}});
  }
  json& pre = doc["preloads"] = json::array();
  for (const Preload& p : sol.preloads) pre.push_back({{"weight", p.weight}, {"machine", p.machine}});
  doc["infeasible_tags"] = sol.infeasible_tags;
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

Solution load_solution(std::istream& in) {
  const nlohmann::json doc = detail::parse_document(in);
  detail::expect_keys(doc, "solution document", {"status", "objective", "bound", "ops"},
                      {"comms", "load_events", "preloads", "infeasible_tags"});
  Solution sol;
  sol.status = parse_status(detail::get_string(doc, "status", "solution"));
  sol.objective = detail::get_integer(doc, "objective", "solution");
  sol.bound = detail::get_integer(doc, "bound", "solution");
  for (const auto& j : detail::get_array(doc, "ops")) {
    detail::expect_keys(j, "op placement", {"op", "machine", "start", "end"}, {});
    sol.ops.push_back(OpPlacement{detail::get_string(j, "op", "op placement"),
                                  detail::get_string(j, "machine", "op placement"),
                                  detail::get_integer(j, "start", "op placement"),
                                  detail::get_integer(j, "end", "op placement")});
  }
  if (doc.contains("comms")) {
    for (const auto& j : detail::get_array(doc, "comms")) {
      detail::expect_keys(j, "comm placement",
                          {"from", "to", "from_machine", "to_machine", "start", "end"}, {});
      sol.comms.push_back(CommPlacement{detail::get_string(j, "from", "comm"),
                                        detail::get_string(j, "to", "comm"),
                                        detail::get_string(j, "from_machine", "comm"),
                                        detail::get_string(j, "to_machine", "comm"),
                                        detail::get_integer(j, "start", "comm"),
                                        detail::get_integer(j, "end", "comm")});
    }
  }
  if (doc.contains("load_events")) {
    for (const auto& j : detail::get_array(doc, "load_events")) {
      detail::expect_keys(j, "load event", {"op", "weight", "kind"}, {});
      const std::string kind = detail::get_string(j, "kind", "load event");
      if (kind != "load" && kind != "unload") {
        throw Error(ErrorKind::kSchema, "load event kind must be load or unload");
      }
      sol.load_events.push_back(LoadEvent{detail::get_string(j, "op", "load event"),
                                          detail::get_string(j, "weight", "load event"),
                                          kind == "load" ? LoadKind::kLoad : LoadKind::kUnload});
    }
  }
  if (doc.contains("preloads")) {
    for (const auto& j : detail::get_array(doc, "preloads")) {
      detail::expect_keys(j, "preload", {"weight", "machine"}, {});
      sol.preloads.push_back(Preload{detail::get_string(j, "weight", "preload"),
                                     detail::get_string(j, "machine", "preload")});
    }
  }
  if (doc.contains("infeasible_tags")) {
    sol.infeasible_tags = detail::get_string_list(doc, "infeasible_tags", "solution");
  }
  return sol;
}

Solution load_solution_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return load_solution(in);
}

}  // namespace opplan
