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

#include "opplan/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bounds.hpp"
#include "opplan/error.hpp"
#include "opplan/verify.hpp"
#include "problem.hpp"
#include "search.hpp"

namespace opplan {

void SolveConfig::validate() const {
  if (!(time_limit > 0.0) || !std::isfinite(time_limit)) {
    throw Error(ErrorKind::kInvalidValue, "time_limit must be a positive number of seconds");
  }
  if (!(gap_tolerance >= 0.0)) {
    throw Error(ErrorKind::kInvalidValue, "gap_tolerance must be non-negative");
  }
  if (primal_bound && *primal_bound <= 0) {
    throw Error(ErrorKind::kInvalidValue, "primal_bound must be positive");
  }
}

namespace {

using detail::Incumbent;
using detail::kInfinity;
using detail::SearchControl;
using detail::SearchOutcome;

// Smallest incumbent value that already meets the gap tolerance.
Time gap_target(Time lower_bound, double gap) {
  if (gap <= 0.0) return lower_bound;
  if (gap >= 1.0) return kInfinity;
  return static_cast<Time>(std::floor(static_cast<double>(lower_bound) / (1.0 - gap)));
}

SearchOutcome run_portfolio(const detail::Problem& p, const SearchControl& proto,
                            Incumbent& inc, unsigned workers, std::uint64_t& nodes,
                            bool& out_of_budget) {
  std::atomic<bool> cancel{false};
  std::vector<SearchControl> controls(workers, proto);
  std::vector<SearchOutcome> outcomes(workers, SearchOutcome::kBudget);
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    controls[w].cancel = &cancel;
    threads.emplace_back([&, w] {
      outcomes[w] = detail::list_search(p, controls[w], inc, detail::ListSearchOptions{w});
      if (outcomes[w] != SearchOutcome::kBudget) cancel.store(true);
    });
  }
  for (std::thread& t : threads) t.join();
  SearchOutcome best = SearchOutcome::kBudget;
  out_of_budget = true;
  for (unsigned w = 0; w < workers; ++w) {
    nodes += controls[w].nodes;
    if (outcomes[w] == SearchOutcome::kExhausted) best = SearchOutcome::kExhausted;
    if (outcomes[w] == SearchOutcome::kStopped && best != SearchOutcome::kExhausted) {
      best = SearchOutcome::kStopped;
    }
    // Cancelled workers report a spent budget; only genuine exhaustion counts.
    if (!controls[w].out_of_budget) out_of_budget = false;
  }
  if (cancel.load()) out_of_budget = false;
  return best;
}

// Constraint groups able to exclude every schedule once the structural
// checks in build_model have passed.
std::vector<std::string> binding_groups(const detail::Problem& p, bool bounded) {
  std::vector<std::string> tags;
  bool restricted = false;
  for (std::size_t e = 0; e < p.ne && !restricted; ++e) {
    for (std::size_t a : p.eligible[p.esrc[e]]) {
      for (std::size_t b : p.eligible[p.edst[e]]) restricted = restricted || p.channel[a][b] < 0;
    }
  }
  if (restricted) tags.push_back("channel_restrict");
  if (p.capped) tags.push_back(p.ext ? "ext_memory_cap" : "memory_cap");
  if (bounded) tags.push_back("primal_bound");
  return tags;
}

}  // namespace

Solution solve(const ScheduleModel& model, const SolveConfig& cfg, SolveStats* stats) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const detail::Problem p = detail::make_problem(model);
  const detail::RootBound rb = detail::root_bound(p);

  std::optional<Time> stop = model.primal_bound();
  if (cfg.primal_bound) stop = stop ? std::min(*stop, *cfg.primal_bound) : *cfg.primal_bound;

  Solution out;
  SolveStats local;
  SolveStats& st = stats ? *stats : local;
  st = SolveStats{};
  auto finish = [&]() {
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };

  if (rb.value >= kInfinity) {
    out.status = SolveStatus::kInfeasible;
    out.infeasible_tags = rb.tags;
    return finish();
  }
  out.bound = rb.value;
  if (stop && rb.value > *stop) {
    out.status = SolveStatus::kInfeasible;
    out.infeasible_tags = rb.tags;
    out.infeasible_tags.push_back("primal_bound");
    return finish();
  }

  Incumbent inc;
  if (const Solution* hint = model.hint()) inc.offer(detail::plan_from_solution(p, *hint));

  SearchControl ctl;
  ctl.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(cfg.time_limit));
  ctl.node_limit = cfg.node_limit;
  ctl.stop_at = stop;
  ctl.lower_bound = gap_target(rb.value, cfg.gap_tolerance);
  ctl.selection = cfg.node_selection;

  SearchOutcome outcome = SearchOutcome::kStopped;
  bool out_of_budget = false;
  if (!ctl.done(inc)) {
    if (p.n <= cfg.exact_max_ops) {
      st.engine = "exact";
      outcome = detail::exact_search(p, ctl, inc);
      st.nodes = ctl.nodes;
      out_of_budget = ctl.out_of_budget;
    } else if (!cfg.seedless_determinism && cfg.workers > 1) {
      st.engine = "list-portfolio";
      outcome = run_portfolio(p, ctl, inc, cfg.workers, st.nodes, out_of_budget);
    } else {
      st.engine = "list";
      outcome = detail::list_search(p, ctl, inc, detail::ListSearchOptions{});
      if (outcome == SearchOutcome::kBudget && !ctl.out_of_budget && inc.plan() && !p.ext) {
        st.engine = "list+tabu";
        outcome = detail::local_search(p, ctl, inc);
      }
      st.nodes = ctl.nodes;
      out_of_budget = ctl.out_of_budget;
    }
  } else {
    st.engine = "hint";
  }
  st.incumbents = inc.history();

  const std::optional<detail::Plan> plan = inc.plan();
  if (!plan) {
    if (outcome == SearchOutcome::kExhausted) {
      out.status = SolveStatus::kInfeasible;
      out.infeasible_tags = binding_groups(p, stop.has_value());
    } else {
      out.status = SolveStatus::kTimeLimit;
    }
    return finish();
  }

  const Time value = plan->makespan;
  const bool proven = outcome == SearchOutcome::kExhausted || value <= rb.value;
  if (stop && value > *stop) {
    // The incumbent violates the bound row, so it is not a plan of this model.
    out.status = proven ? SolveStatus::kInfeasible : SolveStatus::kTimeLimit;
    if (proven) out.infeasible_tags = {"primal_bound"};
    out.bound = proven ? value : rb.value;
    return finish();
  }

  const Solution sol = detail::to_solution(p, *plan);
  out.ops = sol.ops;
  out.comms = sol.comms;
  out.load_events = sol.load_events;
  out.preloads = sol.preloads;
  out.objective = value;
  out.bound = proven ? value : rb.value;
  const double gap = static_cast<double>(value - out.bound);
  if (proven || gap <= cfg.gap_tolerance * static_cast<double>(value)) {
    out.status = SolveStatus::kOptimal;
  } else if (out_of_budget) {
    out.status = SolveStatus::kTimeLimit;
  } else {
    out.status = SolveStatus::kFeasible;
  }

  const VerifyReport report = verify(model, out);
  if (!report.feasible || report.makespan != out.objective) {
    throw std::logic_error("solver produced a plan that fails verification: " +
                           (report.violations.empty() ? std::string("objective mismatch")
                                                      : report.violations.front().kind));
  }
  return finish();
}

ScheduleModel warm_start(const ScheduleModel& model, const Solution& hint) {
  const VerifyReport report = verify(model, hint);
  if (!report.feasible) {
    std::ostringstream msg;
    msg << "hint rejected:";
    for (const Violation& v : report.violations) {
      msg << ' ' << v.kind << '(';
      for (std::size_t k = 0; k < v.ids.size(); ++k) msg << (k ? "," : "") << v.ids[k];
      msg << ")@" << v.time;
    }
    throw Error(ErrorKind::kRejectedHint, msg.str(), report.violations.front().ids);
  }
  ScheduleModel out = model;
  Solution h = hint;
  h.objective = report.makespan;
  out.hint_ = std::move(h);
  return out;
}

}  // namespace opplan
