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

#include <iosfwd>
#include <string>
#include <vector>

#include "opplan/graph.hpp"

namespace opplan {

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kTimeLimit };

const char* to_string(SolveStatus status);

struct OpPlacement {
  std::string op;
  std::string machine;
  // Occupied interval, including any weight loads before and unloads after
  // the computation.
  Time start = 0;
  Time end = 0;

  friend bool operator==(const OpPlacement&, const OpPlacement&) = default;
};

struct CommPlacement {
  std::string producer;
  std::string consumer;
  std::string from_machine;
  std::string to_machine;
  Time start = 0;
  Time end = 0;

  friend bool operator==(const CommPlacement&, const CommPlacement&) = default;
};

enum class LoadKind { kLoad, kUnload };

struct LoadEvent {
  std::string op;
  std::string weight;
  LoadKind kind = LoadKind::kLoad;

  friend bool operator==(const LoadEvent&, const LoadEvent&) = default;
};

struct Preload {
  std::string weight;
  std::string machine;

  friend bool operator==(const Preload&, const Preload&) = default;
};

// A solved plan. `ops` lists every operation grouped by machine (machines in
// id order) and, within a machine, in execution order; that order is the
// machine sequence the memory recursion follows.
struct Solution {
  SolveStatus status = SolveStatus::kInfeasible;
  Time objective = 0;
  Time bound = 0;  // best proven lower bound on the makespan
  std::vector<OpPlacement> ops;
  std::vector<CommPlacement> comms;  // one per dependency edge, (producer, consumer) order
  std::vector<LoadEvent> load_events;
  std::vector<Preload> preloads;
  // Constraint groups that made the instance infeasible, when known.
  std::vector<std::string> infeasible_tags;

  bool has_schedule() const { return !ops.empty(); }
  const OpPlacement* find_op(const std::string& id) const;
  Time makespan() const;

  friend bool operator==(const Solution&, const Solution&) = default;
};

void save_solution(const Solution& sol, std::ostream& out);
Solution load_solution(std::istream& in);
Solution load_solution_file(const std::string& path);

}  // namespace opplan
