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

#include <map>
#include <sstream>

#include "opplan/error.hpp"
#include "opplan/scenarios.hpp"

using namespace opplan;

TEST(DualPipe, BubbleTargets) {
  for (int pp : {2, 4, 8}) {
    DualPipeSpec spec;
    spec.pp = pp;
    // (pp/2 - 1)(t_f + 2 t_b - 3 t_w) with unit times: 2(pp/2 - 1).
    EXPECT_EQ(dualpipe_bubble(spec), 2 * (pp / 2 - 1));
    EXPECT_EQ(dualpipe_busy_time(spec), 2 * pp * 3);
    EXPECT_EQ(dualpipe_primal_bound(spec), 6 * pp + 2 * (pp / 2 - 1));
  }
}

TEST(DualPipe, Structure) {
  DualPipeSpec spec;
  spec.pp = 4;
  const Scenario sc = gen_dualpipe(spec);
  EXPECT_EQ(sc.cluster.size(), 4u);
  EXPECT_EQ(sc.graph.size(), static_cast<std::size_t>(3 * spec.batches() * spec.pp));
  // Every device runs the same amount of work: two stage replicas.
  std::map<std::string, Time> work;
  for (const Operation& op : sc.graph.operations()) {
    ASSERT_EQ(op.allowed_machines.size(), 1u) << op.id;
    work[op.allowed_machines[0]] += op.duration;
  }
  ASSERT_EQ(work.size(), 4u);
  for (const auto& [dev, t] : work) EXPECT_EQ(t, dualpipe_busy_time(spec)) << dev;
  // Activation returns to zero over each micro-batch.
  EXPECT_EQ(sc.graph.total_activation_delta(), 0);
  EXPECT_TRUE(sc.options.memory_capped);
}

TEST(DualPipe, MemoryModes) {
  DualPipeSpec spec;
  spec.pp = 4;
  const Mem tight = gen_dualpipe(spec).cluster.machine(0).memory_capacity;
  spec.memory_mode = MemoryMode::kRelaxed;
  const Mem relaxed = gen_dualpipe(spec).cluster.machine(0).memory_capacity;
  // Parameters fixed at 2 units; the activation share doubles.
  EXPECT_EQ(tight, 2 + (spec.pp + 1));
  EXPECT_EQ(relaxed - 2, 2 * (tight - 2));
  spec.memory_mode = MemoryMode::kUncapped;
  EXPECT_FALSE(gen_dualpipe(spec).options.memory_capped);
  EXPECT_EQ(parse_memory_mode("relaxed"), MemoryMode::kRelaxed);
  EXPECT_THROW(parse_memory_mode("huge"), Error);
}

TEST(DualPipe, Validation) {
  DualPipeSpec spec;
  spec.pp = 3;
  EXPECT_THROW(spec.validate(), Error);
  spec.pp = 4;
  spec.t_f = 0;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(RandomDag, DegreeCaps) {
  const ComputationGraph g = gen_random_dag(RandomDagSpec{});
  EXPECT_EQ(g.size(), 200u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LE(g.in_edges(i).size(), 3u);
    EXPECT_LE(g.out_edges(i).size(), 3u);
    EXPECT_GE(g.op(i).duration, 1);
    EXPECT_LE(g.op(i).duration, 10);
  }
  EXPECT_FALSE(g.edges().empty());
}

TEST(RandomDag, SingleNode) {
  RandomDagSpec spec;
  spec.nodes = 1;
  const ComputationGraph g = gen_random_dag(spec);
  EXPECT_EQ(g.size(), 1u);
  EXPECT_TRUE(g.edges().empty());
}

TEST(RandomDag, DeterministicPerSeed) {
  auto dump = [](std::uint64_t seed) {
    RandomDagSpec spec;
    spec.seed = seed;
    std::ostringstream out;
    save_computation_graph(gen_random_dag(spec), out);
    return out.str();
  };
  EXPECT_EQ(dump(7), dump(7));
  EXPECT_NE(dump(7), dump(8));
}

TEST(RandomDag, Validation) {
  RandomDagSpec spec;
  spec.nodes = 0;
  EXPECT_THROW(spec.validate(), Error);
  spec = RandomDagSpec{};
  spec.duration_range = {5, 1};
  EXPECT_THROW(spec.validate(), Error);
}

TEST(Cluster, FullyConnected) {
  const HardwareCluster h = gen_cluster(3, 7);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_EQ(h.declared_channels().size(), 6u);
  EXPECT_EQ(h.machine(2).memory_capacity, 7);
}
