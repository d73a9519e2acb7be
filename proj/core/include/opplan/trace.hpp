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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "opplan/graph.hpp"
#include "opplan/solution.hpp"

namespace opplan {

// One time unit is rendered as this many microseconds.
inline constexpr std::int64_t kTraceMicrosPerUnit = 1000;

struct TraceEvent {
  std::string name;
  std::string category;  // compute, comm, load, unload
  std::int64_t start_us = 0;
  std::int64_t duration_us = 0;
  int process_id = 0;  // lane: machines, then channels, then weight streams
  int thread_id = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TraceLane {
  int process_id = 0;
  std::string name;
};

struct Trace {
  std::vector<TraceLane> lanes;
  std::vector<TraceEvent> events;
};

// Weight costs come from g.weights(); throws kInconsistent for ids the
// graph or cluster do not know.
Trace build_trace(const Solution& sol, const ComputationGraph& g, const HardwareCluster& h);

// Chrome tracing JSON array: lane-name metadata, then complete ("X") events.
void export_trace(const Solution& sol, const ComputationGraph& g, const HardwareCluster& h,
                  std::ostream& out);

// Plain text table: machine, op, start, end (solution order).
void write_gantt(const Solution& sol, std::ostream& out);

}  // namespace opplan
