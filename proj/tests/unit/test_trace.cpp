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

#include "json.hpp"
#include "opplan/scenarios.hpp"
#include "opplan/solver.hpp"
#include "opplan/trace.hpp"
#include "opplan/verify.hpp"

using namespace opplan;
using nlohmann::json;

namespace {

json trace_json(const Solution& s, const ComputationGraph& g, const HardwareCluster& h) {
  std::ostringstream out;
  export_trace(s, g, h, out);
  return json::parse(out.str());
}

}  // namespace

TEST(Trace, SingleOp) {
  const ComputationGraph g({{"A", 3}}, {});
  const HardwareCluster h({{"m0", 4}}, {});
  Solution s;
  s.ops = {{"A", "m0", 0, 3}};
  const Trace t = build_trace(s, g, h);
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.events[0].name, "A");
  EXPECT_EQ(t.events[0].category, "compute");
  EXPECT_EQ(t.events[0].start_us, 0);
  EXPECT_EQ(t.events[0].duration_us, 3 * kTraceMicrosPerUnit);

  const json doc = trace_json(s, g, h);
  ASSERT_TRUE(doc.is_array());
  int complete = 0;
  for (const json& e : doc) {
    if (e.at("ph") == "X") {
      ++complete;
      EXPECT_EQ(e.at("ts"), 0);
    }
  }
  EXPECT_EQ(complete, 1);
}

TEST(Trace, MachinesAboveChannels) {
  RandomDagSpec spec;
  spec.nodes = 20;
  spec.comm_range = {1, 2};
  const ComputationGraph g = gen_random_dag(spec);
  const HardwareCluster h = gen_cluster(2, 100);
  const Solution s = solve(build_model(g, h, ModelOptions{false}));
  const Trace t = build_trace(s, g, h);
  ASSERT_GE(t.lanes.size(), 4u);
  EXPECT_EQ(t.lanes[0].name, "m0");
  EXPECT_EQ(t.lanes[1].name, "m1");
  for (const TraceEvent& e : t.events) {
    if (e.category == "compute") {
      EXPECT_LT(e.process_id, 2);
    }
    if (e.category == "comm") {
      EXPECT_GE(e.process_id, 2);
    }
  }
}

TEST(Trace, LoadEventsGetTheirOwnCategory) {
  const ComputationGraph g({{"A", 2, 0, 0, {"w"}, {}}}, {}, {{"w", 1, 3, 1}});
  const HardwareCluster h({{"m0", 4}}, {});
  Solution s;
  s.ops = {{"A", "m0", 0, 6}};
  s.load_events = {{"A", "w", LoadKind::kLoad}, {"A", "w", LoadKind::kUnload}};
  const Trace t = build_trace(s, g, h);
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> by_cat;
  for (const TraceEvent& e : t.events) by_cat[e.category] = {e.start_us, e.duration_us};
  const std::int64_t u = kTraceMicrosPerUnit;
  EXPECT_EQ(by_cat.at("load"), (std::pair<std::int64_t, std::int64_t>{0, 3 * u}));
  EXPECT_EQ(by_cat.at("compute"), (std::pair<std::int64_t, std::int64_t>{3 * u, 2 * u}));
  EXPECT_EQ(by_cat.at("unload"), (std::pair<std::int64_t, std::int64_t>{5 * u, 1 * u}));
}

TEST(Trace, DualPipeGapsMatchVerifier) {
  DualPipeSpec spec;
  spec.pp = 4;
  const Scenario sc = gen_dualpipe(spec);
  const ScheduleModel m = build_model(sc.graph, sc.cluster, sc.options);
  const Solution s = solve(m);
  const VerifyReport r = verify(m, s);
  const json doc = trace_json(s, sc.graph, sc.cluster);
  // Interior gaps per machine lane from the raw event stream.
  std::map<int, std::vector<std::pair<std::int64_t, std::int64_t>>> lanes;
  for (const json& e : doc) {
    if (e.at("ph") != "X" || e.at("cat") != "compute") continue;
    lanes[e.at("pid").get<int>()].push_back({e.at("ts"), e.at("ts").get<std::int64_t>() +
                                                             e.at("dur").get<std::int64_t>()});
  }
  std::int64_t gaps = 0;
  for (auto& [pid, iv] : lanes) {
    std::sort(iv.begin(), iv.end());
    for (std::size_t k = 1; k < iv.size(); ++k) gaps += iv[k].first - iv[k - 1].second;
  }
  EXPECT_EQ(gaps, r.interior_bubble_sum * kTraceMicrosPerUnit);
}

TEST(Trace, ByteDeterministic) {
  DualPipeSpec spec;
  spec.pp = 2;
  const Scenario sc = gen_dualpipe(spec);
  const Solution s = solve(build_model(sc.graph, sc.cluster, sc.options));
  std::ostringstream a, b;
  export_trace(s, sc.graph, sc.cluster, a);
  export_trace(s, sc.graph, sc.cluster, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Gantt, TableRows) {
  Solution s;
  s.ops = {{"A", "m0", 0, 2}, {"B", "m1", 1, 4}};
  std::ostringstream out;
  write_gantt(s, out);
  const std::string text = out.str();
  EXPECT_NE(text.find("m0"), std::string::npos);
  EXPECT_LT(text.find("A"), text.find("B"));
  std::istringstream lines(text);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3);  // header plus one row per op
}

TEST(SolutionIo, RoundTrip) {
  Solution s;
  s.status = SolveStatus::kOptimal;
  s.objective = 4;
  s.bound = 4;
  s.ops = {{"A", "m0", 0, 2}, {"B", "m1", 3, 4}};
  s.comms = {{"A", "B", "m0", "m1", 2, 3}};
  s.load_events = {{"A", "w", LoadKind::kUnload}};
  s.preloads = {{"w", "m0"}};
  std::stringstream buf;
  save_solution(s, buf);
  EXPECT_EQ(load_solution(buf), s);
}
