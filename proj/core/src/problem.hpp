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

// Dense, index-based view of a ScheduleModel used by the search engines.

#include <cstddef>
#include <optional>
#include <vector>

#include "opplan/model.hpp"
#include "opplan/solution.hpp"

namespace opplan::detail {

struct Problem {
  const ScheduleModel* model = nullptr;
  std::size_t n = 0;   // operations
  std::size_t m = 0;   // machines
  std::size_t ne = 0;  // edges
  std::size_t nw = 0;  // weight assets (extension only)

  std::vector<Time> dur;
  std::vector<Mem> weight;
  std::vector<Mem> delta;
  std::vector<std::vector<std::size_t>> eligible;
  std::vector<std::vector<char>> can_run;  // [op][machine]

  std::vector<std::size_t> esrc;
  std::vector<std::size_t> edst;
  std::vector<Time> ecomm;
  std::vector<std::vector<std::size_t>> in_edges;
  std::vector<std::vector<std::size_t>> out_edges;
  std::vector<Time> min_comm;  // per edge, over every feasible placement

  std::vector<std::vector<std::ptrdiff_t>> channel;  // [from][to] -> channel index or -1
  std::vector<char> channel_self;
  std::size_t nch = 0;

  bool capped = true;
  std::vector<Mem> cap;

  bool ext = false;
  std::vector<Mem> wsize;
  std::vector<Time> wload;
  std::vector<Time> wunload;
  std::vector<std::vector<std::size_t>> uses;  // per op, sorted weight indices

  std::vector<std::size_t> topo;
  std::vector<Time> head;  // earliest start ignoring resources
  std::vector<Time> tail;  // remaining path after the op ends
  Time horizon = 0;

  Time comm_time(std::size_t e, std::size_t from, std::size_t to) const {
    return from == to ? 0 : ecomm[e];
  }
  Time occupied(std::size_t i, const std::vector<char>* load,
                const std::vector<char>* unload) const;
};

Problem make_problem(const ScheduleModel& model);

// A complete plan in index form.
struct Plan {
  std::vector<std::size_t> machine;
  std::vector<Time> start;
  std::vector<Time> end;
  std::vector<std::vector<std::size_t>> seq;  // per machine
  std::vector<Time> comm_start;               // per edge
  std::vector<Time> comm_end;
  std::vector<std::vector<char>> load;     // [op][weight]
  std::vector<std::vector<char>> unload;   // [op][weight]
  std::vector<std::vector<char>> preload;  // [machine][weight]
  Time makespan = 0;

  void reset(const Problem& p);
};

// Semi-active timing for fixed machine sequences, channel sequences and load
// pattern: every task starts as soon as its predecessors allow. Fills start,
// end, comm times and makespan. Returns false when the orders are cyclic.
bool time_plan(const Problem& p, Plan& plan,
               const std::vector<std::vector<std::size_t>>& channel_seq);

// Activation levels plus resident weights never exceed capacity, and each
// op's weights are present. Loads/unloads must already be consistent.
bool memory_ok(const Problem& p, const Plan& plan);
bool memory_ok_machine(const Problem& p, const Plan& plan, std::size_t j);

Solution to_solution(const Problem& p, const Plan& plan);
Plan plan_from_solution(const Problem& p, const Solution& sol);

}  // namespace opplan::detail
