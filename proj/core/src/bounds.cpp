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

#include "bounds.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace opplan::detail {

Time jackson_bound(std::vector<Job> jobs, Time available) {
  if (jobs.empty()) return 0;
  std::sort(jobs.begin(), jobs.end(),
            [](const Job& a, const Job& b) { return a.release < b.release; });
  // (tail, remaining body)
  std::priority_queue<std::pair<Time, Time>> ready;
  Time t = std::max(available, jobs.front().release);
  Time best = 0;
  std::size_t next = 0;
  while (next < jobs.size() || !ready.empty()) {
    if (ready.empty()) t = std::max(t, jobs[next].release);
    while (next < jobs.size() && jobs[next].release <= t) {
      ready.emplace(jobs[next].tail, jobs[next].body);
      ++next;
    }
    auto [tail, body] = ready.top();
    ready.pop();
    const Time horizon = next < jobs.size() ? jobs[next].release : std::numeric_limits<Time>::max();
    if (t + body <= horizon) {
      t += body;
      best = std::max(best, t + tail);
    } else {
      body -= horizon - t;
      t = horizon;
      ready.emplace(tail, body);
    }
  }
  return best;
}

RootBound root_bound(const Problem& p) {
  RootBound out;
  for (std::size_t i = 0; i < p.n; ++i) {
    const Time v = p.head[i] + p.dur[i] + p.tail[i];
    if (v > out.value) {
      out.value = v;
      out.tags = {"duration", "dependency", "comm_arrival"};
    }
  }

  Time total = 0;
  for (Time d : p.dur) total += d;
  if (p.m > 0) {
    const Time energy = (total + static_cast<Time>(p.m) - 1) / static_cast<Time>(p.m);
    if (energy > out.value) {
      out.value = energy;
      out.tags = {"duration", "assignment", "machine_overlap"};
    }
  }

  for (std::size_t j = 0; j < p.m; ++j) {
    std::vector<Job> jobs;
    Mem pinned_weight = 0;
    for (std::size_t i = 0; i < p.n; ++i) {
      if (p.eligible[i].size() == 1 && p.eligible[i][0] == j) {
        jobs.push_back(Job{p.head[i], p.dur[i], p.tail[i]});
        pinned_weight += p.weight[i];
      }
    }
    if (pinned_weight > p.cap[j]) {
      out.value = std::numeric_limits<Time>::max();
      out.tags = {"memory_init", "memory_cap"};
      return out;
    }
    const Time v = jackson_bound(std::move(jobs));
    if (v > out.value) {
      out.value = v;
      out.tags = {"duration", "machine_overlap", "machine_order"};
    }
  }
  return out;
}

}  // namespace opplan::detail
