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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "opplan/error.hpp"
#include "opplan/model.hpp"
#include "opplan/scenarios.hpp"
#include "opplan/solver.hpp"
#include "oracle.hpp"

using namespace opplan;

namespace {

std::size_t count_kind(const ScheduleModel& m, VarKind kind) {
  return static_cast<std::size_t>(std::count_if(m.variables().begin(), m.variables().end(),
                                                [&](const Variable& v) { return v.kind == kind; }));
}

}  // namespace

TEST(BuildModel, SingleOp) {
  const ComputationGraph g({{"A", 3}}, {});
  const HardwareCluster h({{"m0", 4}}, {});
  const ScheduleModel m = build_model(g, h);
  EXPECT_TRUE(m.find(VarKind::kAssign, {"A", "m0"}));
  const std::size_t s = m.at(VarKind::kStart, {"A"});
  const std::size_t e = m.at(VarKind::kEnd, {"A"});
  // x = 1 is the only assignment satisfying the assignment row.
  bool has_assignment = false, has_duration = false, has_makespan = false;
  for (const LinearConstraint& row : m.constraints()) {
    if (row.tag == "assignment") {
      has_assignment = row.sense == Sense::kEq && row.rhs == 1 && row.terms.size() == 1;
    }
    if (row.tag == "duration") {
      std::int64_t cs = 0, ce = 0;
      for (const Term& t : row.terms) {
        if (t.var == s) cs = t.coef;
        if (t.var == e) ce = t.coef;
      }
      has_duration = row.sense == Sense::kEq && ce == -cs && ce * 3 == row.rhs;
    }
    if (row.tag == "makespan") has_makespan = true;
  }
  EXPECT_TRUE(has_assignment);
  EXPECT_TRUE(has_duration);
  EXPECT_TRUE(has_makespan);
  EXPECT_GE(m.big_m(), 3);
}

TEST(BuildModel, ChannelUseIndexSet) {
  const ComputationGraph g({{"A", 1}, {"B", 1}}, {{"A", "B", 1}});
  const HardwareCluster h({{"m0", 4}, {"m1", 4}}, {{"m0", "m1"}, {"m1", "m0"}});
  const ScheduleModel m = build_model(g, h);
  // One edge times (two declared + two self) channels.
  EXPECT_EQ(count_kind(m, VarKind::kChannelUse), 4u);
  std::set<std::pair<std::string, std::string>> seen;
  for (const Variable& v : m.variables()) {
    if (v.kind != VarKind::kChannelUse) continue;
    ASSERT_EQ(v.indices.size(), 4u);
    EXPECT_EQ(v.domain, Domain::kBinary);
    seen.insert({v.indices[2], v.indices[3]});
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(BuildModel, BigMCoversHorizon) {
  const ComputationGraph g = gen_random_dag(RandomDagSpec{.nodes = 30, .comm_range = {1, 3}});
  const ScheduleModel m = build_model(g, gen_cluster(2, 100));
  Time horizon = g.total_duration();
  for (const auto& e : g.edges()) horizon += e.comm_duration;
  EXPECT_GE(m.big_m(), horizon);
}

TEST(BuildModel, EveryTermReferencesAVariable) {
  DualPipeSpec spec;
  spec.pp = 2;
  const Scenario sc = gen_dualpipe(spec);
  const ScheduleModel m = build_model(sc.graph, sc.cluster, sc.options);
  for (const LinearConstraint& row : m.constraints()) {
    EXPECT_FALSE(row.terms.empty()) << row.tag;
    EXPECT_FALSE(row.tag.empty());
    for (const Term& t : row.terms) EXPECT_LT(t.var, m.variables().size());
  }
}

TEST(BuildModel, DualPipeFourTagCounts) {
  DualPipeSpec spec;
  spec.pp = 4;
  const Scenario sc = gen_dualpipe(spec);
  const ScheduleModel m = build_model(sc.graph, sc.cluster, sc.options);
  const std::size_t n = sc.graph.size();
  const std::size_t edges = sc.graph.edges().size();
  const std::size_t per_device = n / 4;
  const auto counts = m.tag_counts();
  // Counts implied by the index sets: one row per op or edge, one
  // disjunction row per ordered same-device pair.
  EXPECT_EQ(n, 96u);
  EXPECT_EQ(counts.at("assignment"), n);
  EXPECT_EQ(counts.at("duration"), n);
  EXPECT_EQ(counts.at("makespan"), n);
  EXPECT_EQ(counts.at("dependency"), edges);
  EXPECT_EQ(counts.at("slack"), edges);
  EXPECT_EQ(counts.at("machine_overlap"), 4 * per_device * (per_device - 1));
  EXPECT_EQ(counts.at("machine_order"), 4 * per_device * (per_device - 1) / 2);
  EXPECT_EQ(counts.at("memory_cap"), 2 * n);
  // Regression goldens for the remaining groups.
  const std::map<std::string, std::size_t> golden = {
      {"assignment", 96},       {"channel_product", 264}, {"comm_arrival", 88},
      {"comm_duration", 88},    {"comm_release", 88},     {"dependency", 88},
      {"duration", 96},         {"first_link", 196},      {"machine_order", 1104},
      {"machine_overlap", 2208}, {"makespan", 96},        {"memory_cap", 192},
      {"memory_delta", 96},     {"memory_init", 96},      {"memory_link_hi", 2208},
      {"memory_link_lo", 2208}, {"slack", 88},            {"u_link", 6816},
  };
  EXPECT_EQ(counts, golden);
}

TEST(BuildModel, UncappedDropsMemoryRows) {
  DualPipeSpec spec;
  spec.pp = 2;
  spec.memory_mode = MemoryMode::kUncapped;
  const Scenario sc = gen_dualpipe(spec);
  EXPECT_FALSE(sc.options.memory_capped);
  const ScheduleModel m = build_model(sc.graph, sc.cluster, sc.options);
  // Levels are still tracked; only the capacity rows go.
  const auto counts = m.tag_counts();
  EXPECT_FALSE(counts.count("memory_cap"));
  EXPECT_TRUE(counts.count("memory_delta"));
}

TEST(BuildModel, StructuralInfeasibility) {
  // Dependent ops pinned to machines with no channel between them.
  const ComputationGraph g({{"A", 1, 0, 0, {}, {"m0"}}, {"B", 1, 0, 0, {}, {"m1"}}},
                           {{"A", "B", 0}});
  const HardwareCluster h({{"m0", 4}, {"m1", 4}}, {});
  try {
    build_model(g, h);
    FAIL() << "accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
  const ComputationGraph pinned({{"A", 1, 0, 0, {}, {"m7"}}}, {});
  try {
    build_model(pinned, h);
    FAIL() << "accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDanglingRef);
  }
}

TEST(PrimalBound, AddsRowAndValidates) {
  const ComputationGraph g({{"A", 1}, {"B", 2}, {"C", 1}}, {{"A", "B", 0}, {"B", "C", 0}});
  const ScheduleModel base = build_model(g, gen_cluster(2, 10));
  EXPECT_THROW(set_primal_bound(base, 0), Error);
  const ScheduleModel bounded = set_primal_bound(base, base.big_m());
  EXPECT_EQ(bounded.constraints().size(), base.constraints().size() + 1);
  EXPECT_EQ(bounded.primal_bound(), base.big_m());
  EXPECT_EQ(solve(bounded).objective, solve(base).objective);
}

TEST(PrimalBound, BelowCriticalPathIsInfeasible) {
  const ComputationGraph g({{"A", 1}, {"B", 2}, {"C", 1}}, {{"A", "B", 0}, {"B", "C", 0}});
  Time cp = 0;
  for (const auto& op : g.operations()) cp += op.duration;  // a chain
  const ScheduleModel m = set_primal_bound(build_model(g, gen_cluster(2, 10)), cp - 1);
  EXPECT_EQ(solve(m).status, SolveStatus::kInfeasible);
}

// Every plan the solver returns is a feasible point of the program.
TEST(Evaluate, SolverPlansSatisfyEveryRow) {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int k = 0; k < 60; ++k) {
    oracle::TinySpec spec;
    spec.max_weights = k % 2 ? 2 : 0;
    spec.max_ops = spec.max_weights ? 3 : 5;
    const oracle::TinyInstance inst = oracle::random_tiny(rng, spec);
    ScheduleModel m;
    try {
      m = build_model(inst.graph, inst.cluster, ModelOptions{inst.memory_capped});
      if (!inst.graph.weights().empty()) m = extend_model(m);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::kInfeasible);
      continue;
    }
    const Solution sol = solve(m);
    if (!sol.has_schedule()) continue;
    const auto values = assignment_from_solution(m, sol);
    const auto bad = evaluate(m, values);
    EXPECT_TRUE(bad.empty()) << "instance " << k << ": first violated " << bad.front().tag;
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(Evaluate, DetectsPerturbedStart) {
  const ComputationGraph g({{"A", 1}, {"B", 1}}, {{"A", "B", 0}});
  const ScheduleModel m = build_model(g, gen_cluster(1, 10));
  const Solution sol = solve(m);
  auto values = assignment_from_solution(m, sol);
  EXPECT_TRUE(evaluate(m, values).empty());
  values[m.at(VarKind::kStart, {"B"})] = 0;
  values[m.at(VarKind::kEnd, {"B"})] = 1;
  const auto bad = evaluate(m, values);
  ASSERT_FALSE(bad.empty());
  std::set<std::string> tags;
  for (const auto& v : bad) tags.insert(v.tag);
  EXPECT_TRUE(tags.count("dependency") || tags.count("machine_overlap") || tags.count("slack"));
}
