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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opplan/coarsen.hpp"
#include "opplan/graph.hpp"
#include "opplan/model.hpp"
#include "opplan/solution.hpp"

namespace opplan {

struct Violation {
  std::string kind;  // e.g. "machine-overlap", "memory-capacity"
  std::vector<std::string> ids;
  Time time = 0;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct DeviceStats {
  std::string machine;
  Time busy = 0;
  Time bubble = 0;  // idle time strictly between first start and last end
  Time leading_idle = 0;
  Time trailing_idle = 0;
};

struct MemoryPoint {
  Time time = 0;
  Mem level = 0;
};

struct VerifyReport {
  bool feasible = true;
  std::vector<Violation> violations;
  Time makespan = 0;
  std::vector<DeviceStats> devices;                 // machine id order
  std::map<std::string, Time> per_device_bubble;    // interior idle per machine
  Time interior_bubble_sum = 0;                     // sum of per_device_bubble
  // Pipeline bubble size: makespan minus the busiest device's busy time,
  // i.e. the idle time every device has to absorb.
  Time bubble_total = 0;
  std::map<std::string, std::vector<MemoryPoint>> memory_trace;
  // Activation level before/after every op (weights excluded).
  std::map<std::string, std::pair<Mem, Mem>> op_levels;
  std::map<std::string, double> channel_busy;  // "from->to" -> occupied fraction
};

struct VerifyOptions {
  bool memory_capped = true;
  // Weight assets for loading-aware checks; use relation from weight_refs.
  std::optional<std::vector<WeightAsset>> weights;
};

VerifyReport verify(const ComputationGraph& g, const HardwareCluster& h, const Solution& sol,
                    const VerifyOptions& opts = {});

// Checks against exactly what the model encodes: its memory option and, when
// extended, its weight assets and use relation.
VerifyReport verify(const ScheduleModel& model, const Solution& sol);

void save_report(const VerifyReport& report, std::ostream& out);

// Splits each merged node's interval among its absorbed operations in
// topological order, proportionally to their durations. Throws kInconsistent
// when the records do not match `original`.
Solution expand_schedule(const Solution& sol, const std::vector<MergeRecord>& records,
                         const ComputationGraph& original);

}  // namespace opplan
