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

// Plumbing shared by the exhaustive and the list-scheduling engines.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <vector>

#include "opplan/solver.hpp"
#include "problem.hpp"

namespace opplan::detail {

inline constexpr Time kInfinity = std::numeric_limits<Time>::max() / 4;

// Best plan found so far. Improvements are monotone; the cell is shared by
// concurrent workers.
class Incumbent {
 public:
  Time value() const { return value_.load(std::memory_order_acquire); }

  // Accepts the plan when it is strictly better. Returns true if accepted.
  bool offer(const Plan& plan) {
    std::lock_guard<std::mutex> lock(mu_);
    if (plan.makespan >= value_.load()) return false;
    plan_ = plan;
    value_.store(plan.makespan, std::memory_order_release);
    history_.push_back(plan.makespan);
    return true;
  }

  std::optional<Plan> plan() const {
    std::lock_guard<std::mutex> lock(mu_);
    return plan_;
  }
  std::vector<Time> history() const {
    std::lock_guard<std::mutex> lock(mu_);
    return history_;
  }

 private:
  mutable std::mutex mu_;
  std::atomic<Time> value_{kInfinity};
  std::optional<Plan> plan_;
  std::vector<Time> history_;
};

struct SearchControl {
  std::chrono::steady_clock::time_point deadline;
  std::uint64_t node_limit = 0;  // 0: unlimited
  std::optional<Time> stop_at;   // stop once the incumbent is within this
  Time lower_bound = 0;          // stop once the incumbent reaches this
  NodeSelection selection = NodeSelection::kBestBound;
  std::atomic<bool>* cancel = nullptr;

  std::uint64_t nodes = 0;
  bool out_of_budget = false;

  // Counts a node; returns false when the search must stop.
  bool tick(const Incumbent& inc) {
    ++nodes;
    if (done(inc)) return false;
    if (node_limit && nodes >= node_limit) out_of_budget = true;
    if ((nodes & 255) == 0 && std::chrono::steady_clock::now() >= deadline) out_of_budget = true;
    if (cancel && cancel->load(std::memory_order_relaxed)) out_of_budget = true;
    return !out_of_budget;
  }

  bool done(const Incumbent& inc) const {
    const Time v = inc.value();
    return v <= lower_bound || (stop_at && v <= *stop_at);
  }
};

enum class SearchOutcome {
  kExhausted,  // every branch explored or pruned: incumbent is optimal
  kStopped,    // incumbent reached the stop value or the lower bound
  kBudget,     // time or node budget ran out
};

SearchOutcome exact_search(const Problem& p, SearchControl& ctl, Incumbent& inc);

struct ListSearchOptions {
  unsigned variant = 0;  // priority rule family, for portfolio workers
};

SearchOutcome list_search(const Problem& p, SearchControl& ctl, Incumbent& inc,
                          const ListSearchOptions& opts);

// Improves the incumbent's machine sequences until the budget runs out.
// Needs an incumbent; not used with the loading extension.
SearchOutcome local_search(const Problem& p, SearchControl& ctl, Incumbent& inc);

}  // namespace opplan::detail
