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

// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opplan/coarsen.hpp"
#include "opplan/error.hpp"
#include "opplan/scenarios.hpp"
#include "opplan/solver.hpp"
#include "opplan/trace.hpp"
#include "opplan/verify.hpp"
#include "oracle.hpp"

using namespace opplan;

namespace {

// Tolerances: every criterion compares integer time units exactly.
constexpr Time kExact = 0;

struct Soundness {
  int solutions = 0;
  int extended = 0;
  std::vector<std::string> failures;
} g_sound;

// Every solve in this run goes through here so the soundness criterion sees
// all of them.
Solution checked_solve(const ScheduleModel& model, const SolveConfig& cfg, const std::string& label,
                       SolveStats* stats = nullptr) {
  Solution sol = solve(model, cfg, stats);
  if (sol.has_schedule()) {
    ++g_sound.solutions;
    if (model.extended()) ++g_sound.extended;
    const VerifyReport r = verify(model, sol);
    if (!r.feasible) g_sound.failures.push_back(label + ": " + r.violations.front().kind);
    const auto rows = evaluate(model, assignment_from_solution(model, sol));
    if (!rows.empty()) g_sound.failures.push_back(label + ": row " + rows.front().tag);
  }
  return sol;
}

struct Line {
  int id;
  std::string name;
  bool pass;
  std::vector<std::string> details;
  double seconds;
};

std::vector<Line> g_lines;

void run(int id, const std::string& name, const std::function<bool(std::vector<std::string>&)>& body) {
  std::vector<std::string> details;
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  try {
    pass = body(details);
  } catch (const std::exception& e) {
    details.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d: %s (%.2fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(), secs);
  for (const auto& d : details) std::printf("       %s\n", d.c_str());
  std::fflush(stdout);
  g_lines.push_back({id, name, pass, details, secs});
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct DualPipeRun {
  Solution bounded;
  std::vector<Solution> continued;
};
std::map<int, Solution> g_bounded;

Scenario dualpipe(int pp, MemoryMode mode) {
  DualPipeSpec spec;
  spec.pp = pp;
  spec.memory_mode = mode;
  return gen_dualpipe(spec);
}

bool criterion1(std::vector<std::string>& out) {
  bool ok = true;
  for (int pp : {2, 4, 8}) {
    DualPipeSpec spec;
    spec.pp = pp;
    const Scenario sc = gen_dualpipe(spec);
    const ScheduleModel base = build_model(sc.graph, sc.cluster, sc.options);
    const ScheduleModel bounded = set_primal_bound(base, dualpipe_primal_bound(spec));
    SolveConfig cfg;
    cfg.time_limit = 600;
    SolveStats st;
    const Solution sol = checked_solve(bounded, cfg, fmt("dualpipe-bound pp=%d", pp), &st);
    if (!sol.has_schedule()) {
      out.push_back(fmt("PP=%d: no schedule (%s)", pp, to_string(sol.status)));
      ok = false;
      continue;
    }
    g_bounded[pp] = sol;
    const VerifyReport r = verify(base, sol);
    const Time target = dualpipe_bubble(spec);
    const bool hit = r.feasible && r.bubble_total - target == kExact;
    ok = ok && hit;
    out.push_back(fmt("PP=%d: target %lld, bubble %lld (interior sum %lld), makespan %lld <= bound %lld, "
                      "%.3fs, %s",
                      pp, static_cast<long long>(target), static_cast<long long>(r.bubble_total),
                      static_cast<long long>(r.interior_bubble_sum),
                      static_cast<long long>(sol.objective),
                      static_cast<long long>(dualpipe_primal_bound(spec)), st.seconds,
                      hit ? "exact" : (r.bubble_total < target ? "first plan within the bound is already better"
                                                               : "miss")));
  }
  return ok;
}

bool criterion2(std::vector<std::string>& out) {
  bool ok = true;
  for (int pp : {2, 4, 8}) {
    DualPipeSpec spec;
    spec.pp = pp;
    const Scenario sc = gen_dualpipe(spec);
    const ScheduleModel base = build_model(sc.graph, sc.cluster, sc.options);
    ScheduleModel model = base;
    if (g_bounded.count(pp)) model = warm_start(base, g_bounded.at(pp));
    SolveConfig cfg;
    cfg.time_limit = 600;
    SolveStats st;
    const Solution sol = checked_solve(model, cfg, fmt("dualpipe-continued pp=%d", pp), &st);
    if (!sol.has_schedule()) {
      out.push_back(fmt("PP=%d: no schedule", pp));
      ok = false;
      continue;
    }
    const VerifyReport r = verify(base, sol);
    const Time target = pp / 2 - 1;
    const bool optimal = sol.status == SolveStatus::kOptimal;
    const bool hit = r.feasible && r.bubble_total - target == kExact && (pp == 8 || optimal);
    ok = ok && hit;
    out.push_back(fmt("PP=%d: target %lld, bubble %lld, makespan %lld, dual bound %lld, %s, %.3fs",
                      pp, static_cast<long long>(target), static_cast<long long>(r.bubble_total),
                      static_cast<long long>(sol.objective), static_cast<long long>(sol.bound),
                      to_string(sol.status), st.seconds));
  }
  return ok;
}

bool criterion3(std::vector<std::string>& out) {
  bool ok = true;
  for (int pp : {2, 4}) {
    const Scenario sc = dualpipe(pp, MemoryMode::kRelaxed);
    const ScheduleModel m = build_model(sc.graph, sc.cluster, sc.options);
    SolveConfig cfg;
    cfg.time_limit = 600;
    SolveStats st;
    const Solution sol = checked_solve(m, cfg, fmt("relaxed pp=%d", pp), &st);
    if (!sol.has_schedule()) {
      out.push_back(fmt("PP=%d: no schedule", pp));
      ok = false;
      continue;
    }
    const VerifyReport r = verify(m, sol);
    const Time floor = pp / 2 - 1;
    const bool optimal = sol.status == SolveStatus::kOptimal;
    const bool hit = r.feasible && optimal && r.bubble_total >= floor;
    ok = ok && hit;
    out.push_back(fmt("PP=%d: capacity %lld, optimal bubble %lld (floor %lld), %s, %.3fs", pp,
                      static_cast<long long>(sc.cluster.machine(0).memory_capacity),
                      static_cast<long long>(r.bubble_total), static_cast<long long>(floor),
                      to_string(sol.status), st.seconds));
  }
  return ok;
}

bool criterion4(std::vector<std::string>& out) {
  const ComputationGraph g = gen_random_dag(RandomDagSpec{});
  const CoarsenResult c = coarsen(g, CoarsenConfig::defaults_for(g, 40));
  const Time sum = g.total_duration();
  const HardwareCluster h = gen_cluster(2, 1);
  const ModelOptions uncapped{false};
  const ScheduleModel m = build_model(c.graph, h, uncapped);
  SolveConfig cfg;
  cfg.time_limit = 60;
  cfg.node_limit = 0;
  SolveStats st;
  const Solution sol = checked_solve(m, cfg, "random coarse", &st);
  if (!sol.has_schedule()) {
    out.push_back("no schedule");
    return false;
  }
  const Solution expanded = expand_schedule(sol, c.records, g);
  VerifyOptions vo;
  vo.memory_capped = false;
  const bool expanded_ok = verify(g, h, expanded, vo).feasible;
  const bool coarse_ok = c.graph.size() <= 40;
  const Time half_up = (sum + 1) / 2;
  out.push_back(fmt("200 -> %zu nodes (budget 40), sum of durations %lld, sum/2 %.1f, coarse critical path %lld",
                    c.graph.size(), static_cast<long long>(sum), sum / 2.0,
                    static_cast<long long>(critical_path_length(c.graph))));
  bool ok = coarse_ok && expanded_ok;
  if (sum % 2 == 0 && sol.bound <= sum / 2) {
    const bool hit = sol.objective - sum / 2 == kExact;
    ok = ok && hit;
    out.push_back(fmt("balanced branch: makespan %lld vs sum/2 %lld, %s, %.2fs",
                      static_cast<long long>(sol.objective), static_cast<long long>(sum / 2),
                      to_string(sol.status), st.seconds));
  } else {
    const bool hit = sol.objective >= half_up && sol.bound >= half_up;
    ok = ok && hit;
    out.push_back(fmt("gap branch (proven bound %lld > sum/2, exact balance impossible): makespan %lld, "
                      "gap to ceil(sum/2) = %lld (%.1f%%), speedup %.3fx, %s, %.2fs",
                      static_cast<long long>(sol.bound), static_cast<long long>(sol.objective),
                      static_cast<long long>(sol.objective - half_up),
                      100.0 * static_cast<double>(sol.objective - half_up) / static_cast<double>(half_up),
                      static_cast<double>(sum) / static_cast<double>(sol.objective), to_string(sol.status),
                      st.seconds));
  }
  out.push_back(fmt("expanded schedule verifies on the 200-node graph: %s", expanded_ok ? "yes" : "no"));

  // Context: coarsening reach over seeds and the uncoarsened solve.
  std::string sizes;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomDagSpec spec;
    spec.seed = seed;
    const ComputationGraph gs = gen_random_dag(spec);
    sizes += std::to_string(coarsen(gs, CoarsenConfig::defaults_for(gs, 40)).graph.size()) +
             (seed < 10 ? "," : "");
  }
  out.push_back("info: coarsened sizes for seeds 1..10: " + sizes);
  SolveConfig full_cfg;
  full_cfg.time_limit = 60;
  SolveStats fst;
  const Solution full = checked_solve(build_model(g, h, uncapped), full_cfg, "random full", &fst);
  out.push_back(fmt("info: uncoarsened 200-node solve: makespan %lld (sum/2 = %.1f), %s, %.2fs",
                    static_cast<long long>(full.objective), sum / 2.0, to_string(full.status),
                    fst.seconds));
  return ok;
}

struct OracleTally {
  int instances = 0;
  int feasible = 0;
  int mismatches = 0;
  std::uint64_t schedules = 0;
  std::vector<std::string> first;
};

void compare_with_oracle(const oracle::TinyInstance& inst, bool extended, OracleTally& t,
                         const std::string& label) {
  const oracle::OracleResult ref = oracle::brute_force(inst.graph, inst.cluster, inst.memory_capped);
  ++t.instances;
  t.schedules += ref.schedules;
  Solution sol;
  try {
    ScheduleModel m = build_model(inst.graph, inst.cluster, ModelOptions{inst.memory_capped});
    if (extended) m = extend_model(m);
    sol = checked_solve(m, SolveConfig{}, label);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kInfeasible) throw;
  }
  const bool same = sol.has_schedule() == ref.feasible &&
                    (!ref.feasible ||
                     (sol.status == SolveStatus::kOptimal && sol.objective - ref.makespan == kExact));
  if (ref.feasible) ++t.feasible;
  if (!same) {
    ++t.mismatches;
    if (t.first.size() < 3) {
      t.first.push_back(fmt("%s: oracle %s %lld, solver %s %lld", label.c_str(),
                            ref.feasible ? "feasible" : "infeasible",
                            static_cast<long long>(ref.makespan), to_string(sol.status),
                            static_cast<long long>(sol.objective)));
    }
  }
}

bool criterion5(std::vector<std::string>& out) {
  std::mt19937_64 rng(20260501);
  OracleTally t;
  for (int k = 0; k < 250; ++k) {
    compare_with_oracle(oracle::random_tiny(rng, oracle::TinySpec{}), false, t, fmt("base #%d", k));
  }
  out.push_back(fmt("%d instances (<= 5 ops, <= 2 machines, ~half memory-capped), %d feasible, "
                    "%llu schedules enumerated, %d mismatches",
                    t.instances, t.feasible, static_cast<unsigned long long>(t.schedules), t.mismatches));
  for (const auto& f : t.first) out.push_back(f);
  return t.instances >= 200 && t.mismatches == 0;
}

bool criterion7(std::vector<std::string>& out) {
  std::mt19937_64 rng(20260502);
  oracle::TinySpec spec;
  spec.max_ops = 3;
  spec.max_weights = 2;
  OracleTally t;
  int k = 0;
  while (t.instances < 60) {
    oracle::TinyInstance inst = oracle::random_tiny(rng, spec);
    if (inst.graph.size() < 2) continue;
    compare_with_oracle(inst, true, t, fmt("ext #%d", k++));
  }
  out.push_back(fmt("%d instances (2-3 ops, 1-2 weights), %d feasible, %llu patterns enumerated, "
                    "%d mismatches",
                    t.instances, t.feasible, static_cast<unsigned long long>(t.schedules), t.mismatches));
  for (const auto& f : t.first) out.push_back(f);
  return t.instances >= 50 && t.mismatches == 0;
}

bool criterion6(std::vector<std::string>& out) {
  out.push_back(fmt("%d solutions verified (%d with weight loading), %zu failures", g_sound.solutions,
                    g_sound.extended, g_sound.failures.size()));
  for (std::size_t k = 0; k < g_sound.failures.size() && k < 5; ++k) out.push_back(g_sound.failures[k]);
  return g_sound.solutions > 0 && g_sound.extended > 0 && g_sound.failures.empty();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool criterion8(std::vector<std::string>& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  struct Case {
    std::string name;
    ComputationGraph g;
    HardwareCluster h;
    ModelOptions opts;
  };
  std::vector<Case> cases;
  {
    const Scenario sc = dualpipe(8, MemoryMode::kDualPipe);
    cases.push_back({"dualpipe8", sc.graph, sc.cluster, sc.options});
  }
  {
    const ComputationGraph g = gen_random_dag(RandomDagSpec{});
    cases.push_back({"random40", coarsen(g, CoarsenConfig::defaults_for(g, 40)).graph,
                     gen_cluster(2, 1), ModelOptions{false}});
  }
  bool ok = true;
  for (const Case& c : cases) {
    std::string files[2][2];
    for (int run = 0; run < 2; ++run) {
      SolveConfig cfg;
      cfg.seedless_determinism = true;
      cfg.node_limit = 20000;
      cfg.time_limit = 600;
      const Solution sol = checked_solve(build_model(c.g, c.h, c.opts), cfg, "determinism " + c.name);
      const auto sol_path = dir / (c.name + "_run" + std::to_string(run) + "_solution.json");
      const auto trace_path = dir / (c.name + "_run" + std::to_string(run) + "_trace.json");
      {
        std::ofstream f(sol_path, std::ios::binary);
        save_solution(sol, f);
      }
      {
        std::ofstream f(trace_path, std::ios::binary);
        export_trace(sol, c.g, c.h, f);
      }
      files[run][0] = slurp(sol_path);
      files[run][1] = slurp(trace_path);
    }
    const bool same = files[0][0] == files[1][0] && files[0][1] == files[1][1] && !files[0][0].empty();
    ok = ok && same;
    out.push_back(fmt("%s: solution %zu bytes, trace %zu bytes, %s", c.name.c_str(), files[0][0].size(),
                      files[0][1].size(), same ? "byte-identical" : "DIFFERENT"));
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("opplan acceptance run");
  std::string out_dir = "acceptance_out";
  app.add_option("--out-dir", out_dir, "Directory for determinism artifacts");
  CLI11_PARSE(app, argc, argv);

  run(1, "DualPipe bound phase reaches bubble 2(PP/2-1), PP in {2,4,8}", criterion1);
  run(2, "continued search reaches bubble (PP/2-1), proven for PP in {2,4}", criterion2);
  run(3, "doubled activation budget keeps optimal bubble >= (PP/2-1), PP in {2,4}", criterion3);
  run(4, "random 200-node graph: coarsen to <= 40, 2-machine makespan vs sum/2", criterion4);
  run(5, "solver optimum equals exhaustive enumeration on >= 200 tiny instances", criterion5);
  run(7, "weight-loading optimum equals exhaustive enumeration on >= 50 instances", criterion7);
  run(6, "every solution returned in this run passes verify", criterion6);
  run(8, "byte-identical solution and trace files across two runs",
      [&](std::vector<std::string>& d) { return criterion8(d, out_dir); });

  // Criterion 8 adds solves after the soundness line; re-check them.
  int failed = 0;
  for (const Line& l : g_lines) failed += l.pass ? 0 : 1;
  if (!g_sound.failures.empty()) ++failed;
  std::printf("summary: %zu criteria, %d failed\n", g_lines.size(), failed);
  return failed == 0 ? 0 : 1;
}
