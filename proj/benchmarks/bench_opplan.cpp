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

#include <benchmark/benchmark.h>

#include <sstream>

#include "opplan/coarsen.hpp"
#include "opplan/model.hpp"
#include "opplan/scenarios.hpp"
#include "opplan/solver.hpp"
#include "opplan/verify.hpp"

namespace {

using namespace opplan;

Scenario dualpipe(int pp) {
  DualPipeSpec spec;
  spec.pp = pp;
  return gen_dualpipe(spec);
}

void BM_BuildModelDualPipe(benchmark::State& state) {
  const Scenario s = dualpipe(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    ScheduleModel m = build_model(s.graph, s.cluster, s.options);
    benchmark::DoNotOptimize(m.constraints().size());
  }
}
BENCHMARK(BM_BuildModelDualPipe)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_SolveDualPipe(benchmark::State& state) {
  const Scenario s = dualpipe(static_cast<int>(state.range(0)));
  const ScheduleModel m = build_model(s.graph, s.cluster, s.options);
  SolveConfig cfg;
  cfg.node_limit = 2000;
  for (auto _ : state) {
    Solution sol = solve(m, cfg);
    benchmark::DoNotOptimize(sol.makespan());
  }
}
BENCHMARK(BM_SolveDualPipe)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveExactRandom(benchmark::State& state) {
  RandomDagSpec spec;
  spec.nodes = static_cast<int>(state.range(0));
  spec.comm_range = {0, 2};
  const ComputationGraph g = gen_random_dag(spec);
  const ScheduleModel m = build_model(g, gen_cluster(2, 1000));
  for (auto _ : state) {
    Solution sol = solve(m);
    benchmark::DoNotOptimize(sol.makespan());
  }
}
BENCHMARK(BM_SolveExactRandom)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_Coarsen(benchmark::State& state) {
  const ComputationGraph g = gen_random_dag(RandomDagSpec{});
  const CoarsenConfig cfg = CoarsenConfig::defaults_for(g, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    CoarsenResult r = coarsen(g, cfg);
    benchmark::DoNotOptimize(r.graph.size());
  }
}
BENCHMARK(BM_Coarsen)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Verify(benchmark::State& state) {
  const Scenario s = dualpipe(8);
  const ScheduleModel m = build_model(s.graph, s.cluster, s.options);
  SolveConfig cfg;
  cfg.node_limit = 2000;
  const Solution sol = solve(m, cfg);
  for (auto _ : state) {
    VerifyReport r = verify(m, sol);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_Verify)->Unit(benchmark::kMicrosecond);

void BM_ExportMps(benchmark::State& state) {
  const Scenario s = dualpipe(4);
  const ScheduleModel m = build_model(s.graph, s.cluster, s.options);
  for (auto _ : state) {
    std::ostringstream out;
    export_mps(m, out);
    benchmark::DoNotOptimize(out.str().size());
  }
}
BENCHMARK(BM_ExportMps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
