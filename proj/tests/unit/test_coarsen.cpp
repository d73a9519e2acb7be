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
#include <set>
#include <sstream>

#include "opplan/coarsen.hpp"
#include "opplan/error.hpp"
#include "opplan/scenarios.hpp"

using namespace opplan;

namespace {

ComputationGraph chain(int n) {
  std::vector<Operation> ops;
  std::vector<DependencyEdge> edges;
  for (int i = 0; i < n; ++i) {
    ops.push_back({std::string(1, static_cast<char>('A' + i)), 1, 1, 0});
    if (i > 0) edges.push_back({ops[i - 1].id, ops[i].id, 0});
  }
  return ComputationGraph(ops, edges);
}

ComputationGraph diamond() {
  return ComputationGraph({{"A", 1}, {"B", 1}, {"C", 1}, {"D", 1}},
                          {{"A", "B", 1}, {"A", "C", 2}, {"B", "D", 3}, {"C", "D", 4}});
}

CoarsenConfig generous() {
  CoarsenConfig cfg;
  cfg.node_budget = 1;
  cfg.edge_merge_max_duration = 100;
  cfg.edge_merge_max_memory = 100;
  cfg.nonedge_merge_max_duration = 100;
  cfg.nonedge_merge_max_memory = 100;
  return cfg;
}

bool reaches(const ComputationGraph& g, std::size_t from, std::size_t to) {
  std::vector<std::size_t> stack = {from};
  std::vector<bool> seen(g.size(), false);
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    for (std::size_t e : g.out_edges(v)) {
      const std::size_t w = g.edge_target(e);
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return false;
}

// Reference rule evaluation: after dropping single-hop bypass edges, a -> b
// qualifies when a has one successor and b one predecessor and the merged
// node is within thresholds; the id-min pair wins.
std::optional<NodePair> reference_edge_candidate(const ComputationGraph& g,
                                                 const CoarsenConfig& cfg) {
  std::set<std::pair<std::size_t, std::size_t>> has;
  for (std::size_t e = 0; e < g.edges().size(); ++e) has.insert({g.edge_source(e), g.edge_target(e)});
  std::set<std::pair<std::size_t, std::size_t>> kept;
  for (auto [a, b] : has) {
    bool bypass = false;
    for (std::size_t c = 0; c < g.size() && !bypass; ++c) {
      bypass = has.count({a, c}) && has.count({c, b});
    }
    if (!bypass) kept.insert({a, b});
  }
  std::vector<int> outdeg(g.size(), 0), indeg(g.size(), 0);
  for (auto [a, b] : kept) {
    ++outdeg[a];
    ++indeg[b];
  }
  std::optional<NodePair> best;
  for (auto [a, b] : kept) {
    if (outdeg[a] != 1 || indeg[b] != 1) continue;
    if (g.op(a).duration + g.op(b).duration > cfg.edge_merge_max_duration) continue;
    if (g.op(a).weight_mem + g.op(b).weight_mem > cfg.edge_merge_max_memory) continue;
    NodePair p{g.op(a).id, g.op(b).id};
    if (!best || p < *best) best = p;
  }
  return best;
}

}  // namespace

TEST(CandidateEdge, ChainPicksFirstPair) {
  const auto c = get_candidate_edge(chain(3), generous());
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, (NodePair{"A", "B"}));
}

TEST(CandidateEdge, DiamondHasNone) {
  EXPECT_FALSE(get_candidate_edge(diamond(), generous()));
}

TEST(CandidateEdge, DurationThresholdExcludesAll) {
  CoarsenConfig cfg = generous();
  cfg.edge_merge_max_duration = 1;
  cfg.nonedge_merge_max_duration = 1;
  EXPECT_FALSE(get_candidate_edge(chain(3), cfg));
}

TEST(CandidateEdge, MatchesReferenceRuleOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomDagSpec spec;
    spec.nodes = 40;
    spec.seed = seed;
    const ComputationGraph g = gen_random_dag(spec);
    CoarsenConfig cfg;
    cfg.edge_merge_max_duration = 12;
    cfg.edge_merge_max_memory = 12;
    cfg.nonedge_merge_max_duration = 8;
    cfg.nonedge_merge_max_memory = 8;
    EXPECT_EQ(get_candidate_edge(g, cfg), reference_edge_candidate(g, cfg)) << "seed " << seed;
  }
}

TEST(CandidateNonEdge, IsolatedPair) {
  const ComputationGraph g({{"A", 1}, {"B", 1}}, {});
  const auto c = get_candidate_nonedge(g, generous());
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, (NodePair{"A", "B"}));
}

TEST(CandidateNonEdge, PathEndpointsRejected) {
  const ComputationGraph g = chain(3);
  const auto c = get_candidate_nonedge(g, generous());
  // Every non-adjacent pair of a chain lies on a path.
  EXPECT_FALSE(c);
  EXPECT_THROW(merge_nodes(g, "A", "C"), Error);
}

TEST(CandidateNonEdge, EdgeThresholdDoesNotApply) {
  const ComputationGraph g({{"A", 2}, {"B", 2}}, {});
  CoarsenConfig cfg = generous();
  cfg.edge_merge_max_duration = 4;
  cfg.nonedge_merge_max_duration = 3;
  EXPECT_FALSE(get_candidate_nonedge(g, cfg));
  cfg.nonedge_merge_max_duration = 4;
  EXPECT_TRUE(get_candidate_nonedge(g, cfg));
}

TEST(MergeNodes, ChainPair) {
  const MergeResult r = merge_nodes(chain(3), "A", "B");
  ASSERT_EQ(r.graph.size(), 2u);
  const auto ab = r.graph.find("A+B");
  ASSERT_TRUE(ab);
  EXPECT_EQ(r.graph.op(*ab).duration, 2);
  EXPECT_EQ(r.graph.op(*ab).weight_mem, 2);
  EXPECT_EQ(r.graph.edges(), (std::vector<DependencyEdge>{{"A+B", "C", 0}}));
  EXPECT_EQ(r.record.absorbed, (std::vector<std::string>{"A", "B"}));
}

TEST(MergeNodes, IsolatedPair) {
  const ComputationGraph g({{"A", 1, 0, 2, {}, {}}, {"B", 3, 1, -1, {}, {}}}, {});
  const MergeResult r = merge_nodes(g, "A", "B");
  ASSERT_EQ(r.graph.size(), 1u);
  EXPECT_TRUE(r.graph.edges().empty());
  EXPECT_EQ(r.graph.op(0).duration, 4);
  EXPECT_EQ(r.graph.op(0).weight_mem, 1);
  EXPECT_EQ(r.graph.op(0).activation_delta, 1);
}

TEST(MergeNodes, DiamondCollapsesParallelEdges) {
  const MergeResult r = merge_nodes(diamond(), "B", "C");
  ASSERT_EQ(r.graph.size(), 3u);
  // A->B (1) and A->C (2) collapse; B->D (3) and C->D (4) collapse.
  EXPECT_EQ(r.graph.edges(),
            (std::vector<DependencyEdge>{{"A", "B+C", 3}, {"B+C", "D", 7}}));
}

TEST(MergeNodes, WeightRefsUnion) {
  const ComputationGraph g({{"A", 1, 0, 0, {"w1"}, {}}, {"B", 1, 0, 0, {"w1", "w2"}, {}}}, {},
                           {{"w1", 1, 0, 0}, {"w2", 1, 0, 0}});
  const MergeResult r = merge_nodes(g, "A", "B");
  EXPECT_EQ(r.graph.op(0).weight_refs, (std::vector<std::string>{"w1", "w2"}));
}

TEST(Coarsen, BudgetAboveSizeIsIdentity) {
  CoarsenConfig cfg = generous();
  cfg.node_budget = 5;
  const CoarsenResult r = coarsen(chain(3), cfg);
  EXPECT_EQ(r.graph, chain(3));
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.merges, 0u);
}

TEST(Coarsen, ChainOfEightToTwo) {
  const ComputationGraph g = chain(8);
  CoarsenConfig cfg = CoarsenConfig::defaults_for(g, 2);
  const CoarsenResult r = coarsen(g, cfg);
  EXPECT_EQ(r.graph.size(), 2u);
  EXPECT_EQ(r.graph.total_duration(), 8);
  EXPECT_EQ(r.merges, 6u);
}

TEST(Coarsen, RandomGraphInvariants) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomDagSpec spec;
    spec.seed = seed;
    const ComputationGraph g = gen_random_dag(spec);
    const CoarsenConfig cfg = CoarsenConfig::defaults_for(g, 40);
    const CoarsenResult r = coarsen(g, cfg);
    EXPECT_EQ(r.graph.size() + r.merges, g.size());
    EXPECT_EQ(r.graph.total_duration(), g.total_duration());
    EXPECT_EQ(r.graph.total_weight_mem(), g.total_weight_mem());
    EXPECT_EQ(r.graph.total_activation_delta(), g.total_activation_delta());
    // Provenance recovers the original id set exactly once each.
    std::vector<std::string> ids = expand_ids(r.graph, r.records);
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> orig;
    for (const auto& op : g.operations()) orig.push_back(op.id);
    EXPECT_EQ(ids, orig) << "seed " << seed;
    // Acyclicity is re-validated by construction of every graph.
    EXPECT_NO_THROW(topo_order(r.graph));
  }
}

TEST(Coarsen, RandomGraphReachesBudgetForDefaultSeed) {
  const ComputationGraph g = gen_random_dag(RandomDagSpec{});
  const CoarsenResult r = coarsen(g, CoarsenConfig::defaults_for(g, 40));
  EXPECT_LE(r.graph.size(), 40u);
}

TEST(Coarsen, EdgeMergesNeverLengthenCriticalPath) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomDagSpec spec;
    spec.nodes = 60;
    spec.seed = seed;
    ComputationGraph g = gen_random_dag(spec);
    CoarsenConfig cfg = generous();
    for (int step = 0; step < 30; ++step) {
      const auto pair = get_candidate_edge(g, cfg);
      if (!pair) break;
      const Time before = critical_path_length(g);
      g = merge_nodes(g, pair->first, pair->second).graph;
      EXPECT_LE(critical_path_length(g), before);
    }
  }
}

TEST(Coarsen, NonEdgeCandidatesAreMergeable) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomDagSpec spec;
    spec.nodes = 30;
    spec.seed = seed;
    const ComputationGraph g = gen_random_dag(spec);
    const auto pair = get_candidate_nonedge(g, generous());
    if (!pair) continue;
    const std::size_t a = g.index(pair->first);
    const std::size_t b = g.index(pair->second);
    EXPECT_FALSE(reaches(g, a, b) || reaches(g, b, a));
  }
}

TEST(Coarsen, ConfigValidation) {
  CoarsenConfig cfg = generous();
  cfg.nonedge_merge_max_duration = 200;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = generous();
  cfg.node_budget = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(MergeRecords, RoundTrip) {
  const ComputationGraph g = gen_random_dag(RandomDagSpec{});
  const CoarsenResult r = coarsen(g, CoarsenConfig::defaults_for(g, 40));
  std::stringstream buf;
  save_merge_records(r.records, buf);
  EXPECT_EQ(load_merge_records(buf), r.records);
}
