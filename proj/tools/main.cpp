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

// opplan: generate, coarsen, solve, verify and export operation schedules.

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bundle.hpp"
#include "json.hpp"
#include "opplan/coarsen.hpp"
#include "opplan/error.hpp"
#include "opplan/scenarios.hpp"
#include "opplan/solver.hpp"
#include "opplan/trace.hpp"
#include "opplan/verify.hpp"

namespace opplan::cli {
namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kBadInput = 2,
  kInfeasible = 3,
  kNoSchedule = 4,
  kVerifyFailed = 5,
  kRejectedHint = 6,
  kIoFailure = 7,
};

// Raised by subcommands that want a specific exit status with a JSON error.
struct Failure {
  int code;
  nlohmann::json body;
};

int exit_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInfeasible: return kInfeasible;
    case ErrorKind::kRejectedHint: return kRejectedHint;
    case ErrorKind::kIo: return kIoFailure;
    default: return kBadInput;
  }
}

void report_error(const nlohmann::json& body) { std::cerr << body.dump() << '\n'; }

struct GenDualPipe {
  DualPipeSpec spec;
  std::string memory = "dualpipe";
  std::string out = "-";
};

struct GenRandom {
  RandomDagSpec spec;
  int max_degree = 0;
  int machines = 2;
  Mem capacity = 0;
  std::string out = "-";
};

struct CoarsenArgs {
  std::string in = "-";
  std::string out = "-";
  std::size_t to = 0;
  std::optional<Time> edge_duration;
  std::optional<Mem> edge_memory;
  std::optional<Time> nonedge_duration;
  std::optional<Mem> nonedge_memory;
  bool full_reduction = false;
};

struct SolveArgs {
  std::string in = "-";
  std::string out = "-";
  std::string hint;
  std::string solution_out;
  std::string node_selection = "best-bound";
  SolveConfig cfg;
  bool nondeterministic = false;
  bool verbose = false;
};

struct VerifyArgs {
  std::string in = "-";
  std::string out = "-";
  bool expand = false;
};

struct ExportArgs {
  std::string in = "-";
  std::string out = "-";
  std::string format = "trace";
  bool expand = false;
  std::optional<Time> primal_bound;
};

struct ReproArgs {
  DualPipeSpec spec;
  std::string memory = "dualpipe";
  SolveConfig cfg;
  std::string trace_prefix;
  bool verbose = false;
};

std::string dump(const auto& value, auto writer) {
  std::ostringstream out;
  writer(value, out);
  return out.str();
}

ScheduleModel model_for(const Bundle& b) {
  ModelOptions opts;
  opts.memory_capped = b.memory_capped;
  ScheduleModel model = build_model(need_graph(b), need_cluster(b), opts);
  if (!need_graph(b).weights().empty()) model = extend_model(model);
  return model;
}

// The solution as a plan of the graph it should be checked against.
std::pair<Solution, const ComputationGraph*> resolved(const Bundle& b, bool expand) {
  const Solution& sol = need_solution(b);
  if (!expand) return {sol, &need_graph(b)};
  if (!b.original) throw Error(ErrorKind::kSchema, "--expand needs a coarsened input");
  return {expand_schedule(sol, b.records, *b.original), &*b.original};
}

int run_gen_dualpipe(GenDualPipe& a) {
  a.spec.memory_mode = parse_memory_mode(a.memory);
  Scenario sc = gen_dualpipe(a.spec);
  Bundle b;
  b.graph = std::move(sc.graph);
  b.cluster = std::move(sc.cluster);
  b.memory_capped = sc.options.memory_capped;
  write_text_path(a.out, dump(b, [](auto& v, auto& o) { write_bundle(v, o); }));
  return kOk;
}

int run_gen_random(GenRandom& a) {
  if (a.max_degree > 0) a.spec.max_in_degree = a.spec.max_out_degree = a.max_degree;
  Bundle b;
  b.graph = gen_random_dag(a.spec);
  b.memory_capped = a.capacity > 0;
  b.cluster = gen_cluster(a.machines, a.capacity > 0 ? a.capacity : b.graph->total_weight_mem());
  write_text_path(a.out, dump(b, [](auto& v, auto& o) { write_bundle(v, o); }));
  return kOk;
}

int run_coarsen(CoarsenArgs& a) {
  Bundle b = read_bundle_path(a.in);
  if (b.original) throw Error(ErrorKind::kInvalidValue, "input is already coarsened");
  ComputationGraph g = need_graph(b);
  if (a.full_reduction) g = without_edges(g, transitive_redundant_edges(g));
  CoarsenConfig cfg = CoarsenConfig::defaults_for(g, a.to);
  if (a.edge_duration) cfg.edge_merge_max_duration = *a.edge_duration;
  if (a.edge_memory) cfg.edge_merge_max_memory = *a.edge_memory;
  if (a.nonedge_duration) cfg.nonedge_merge_max_duration = *a.nonedge_duration;
  if (a.nonedge_memory) cfg.nonedge_merge_max_memory = *a.nonedge_memory;
  CoarsenResult r = coarsen(g, cfg);
  if (r.graph.size() > a.to) {
    std::cerr << nlohmann::json{{"warning", "node budget not reached"},
                                {"nodes", r.graph.size()},
                                {"budget", a.to}}
                     .dump()
              << '\n';
  }
  b.original = std::move(g);
  b.graph = std::move(r.graph);
  b.records = std::move(r.records);
  b.solution.reset();
  write_text_path(a.out, dump(b, [](auto& v, auto& o) { write_bundle(v, o); }));
  return kOk;
}

NodeSelection parse_selection(const std::string& s) {
  if (s == "best-bound") return NodeSelection::kBestBound;
  if (s == "depth-first") return NodeSelection::kDepthFirst;
  throw Error(ErrorKind::kInvalidValue, "unknown node selection '" + s + "'");
}

int run_solve(SolveArgs& a) {
  Bundle b = read_bundle_path(a.in);
  a.cfg.node_selection = parse_selection(a.node_selection);
  a.cfg.seedless_determinism = !a.nondeterministic;
  a.cfg.validate();
  ScheduleModel model = model_for(b);
  if (!a.hint.empty()) model = warm_start(model, load_solution_file(a.hint));
  SolveStats stats;
  Solution sol = solve(model, a.cfg, &stats);
  if (a.verbose) {
    std::cerr << nlohmann::json{{"status", to_string(sol.status)},
                                {"makespan", sol.objective},
                                {"bound", sol.bound},
                                {"engine", stats.engine},
                                {"nodes", stats.nodes},
                                {"seconds", stats.seconds}}
                     .dump()
              << '\n';
  }
  if (!sol.has_schedule()) {
    const bool infeasible = sol.status == SolveStatus::kInfeasible;
    throw Failure{infeasible ? kInfeasible : kNoSchedule,
                  {{"error", infeasible ? "infeasible" : "time-limit"},
                   {"message", infeasible ? "no feasible schedule exists"
                                          : "no schedule found within the limits"},
                   {"tags", sol.infeasible_tags}}};
  }
  if (!a.solution_out.empty()) {
    write_text_path(a.solution_out, dump(sol, [](auto& v, auto& o) { save_solution(v, o); }));
  }
  b.solution = std::move(sol);
  write_text_path(a.out, dump(b, [](auto& v, auto& o) { write_bundle(v, o); }));
  return kOk;
}

int run_verify(VerifyArgs& a) {
  Bundle b = read_bundle_path(a.in);
  auto [sol, graph] = resolved(b, a.expand);
  VerifyOptions opts;
  opts.memory_capped = b.memory_capped;
  if (!graph->weights().empty()) opts.weights = graph->weights();
  const VerifyReport report = verify(*graph, need_cluster(b), sol, opts);
  write_text_path(a.out, dump(report, [](auto& v, auto& o) { save_report(v, o); }));
  return report.feasible ? kOk : kVerifyFailed;
}

int run_export(ExportArgs& a) {
  Bundle b = read_bundle_path(a.in);
  std::ostringstream out;
  if (a.format == "trace" || a.format == "gantt") {
    auto [sol, graph] = resolved(b, a.expand);
    if (a.format == "trace") {
      export_trace(sol, *graph, need_cluster(b), out);
    } else {
      write_gantt(sol, out);
    }
  } else if (a.format == "mps" || a.format == "lp") {
    ScheduleModel model = model_for(b);
    if (a.primal_bound) model = set_primal_bound(std::move(model), *a.primal_bound);
    if (a.format == "mps") {
      export_mps(model, out);
    } else {
      export_lp(model, out);
    }
  } else {
    throw Error(ErrorKind::kInvalidValue, "unknown export format '" + a.format + "'");
  }
  write_text_path(a.out, out.str());
  return kOk;
}

int run_repro(ReproArgs& a) {
  a.spec.memory_mode = parse_memory_mode(a.memory);
  a.cfg.validate();
  const Scenario sc = gen_dualpipe(a.spec);
  const ScheduleModel model = build_model(sc.graph, sc.cluster, sc.options);
  const Time bound = dualpipe_primal_bound(a.spec);

  SolveStats s1;
  const Solution bounded = solve(set_primal_bound(model, bound), a.cfg, &s1);
  if (!bounded.has_schedule()) {
    const bool infeasible = bounded.status == SolveStatus::kInfeasible;
    throw Failure{infeasible ? kInfeasible : kNoSchedule,
                  {{"error", infeasible ? "infeasible" : "time-limit"},
                   {"message", "primal bound not attained"},
                   {"bound", bound},
                   {"tags", bounded.infeasible_tags}}};
  }
  const VerifyReport r1 = verify(model, bounded);

  SolveStats s2;
  const Solution continued = solve(warm_start(model, bounded), a.cfg, &s2);
  const VerifyReport r2 = verify(model, continued);

  if (a.verbose) {
    auto phase = [](const Solution& s, const VerifyReport& r, const SolveStats& st) {
      return nlohmann::json{{"status", to_string(s.status)}, {"makespan", r.makespan},
                            {"bound", s.bound},             {"bubble", r.bubble_total},
                            {"interior_bubble_sum", r.interior_bubble_sum},
                            {"nodes", st.nodes},            {"seconds", st.seconds}};
    };
    std::cerr << nlohmann::json{{"pp", a.spec.pp},
                                {"primal_bound", bound},
                                {"busy", dualpipe_busy_time(a.spec)},
                                {"bounded", phase(bounded, r1, s1)},
                                {"continued", phase(continued, r2, s2)}}
                     .dump()
              << '\n';
  }
  if (!a.trace_prefix.empty()) {
    for (auto [name, sol] : {std::pair{"bounded", &bounded}, std::pair{"continued", &continued}}) {
      std::ostringstream out;
      export_trace(*sol, sc.graph, sc.cluster, out);
      write_text_path(a.trace_prefix + "-" + name + ".json", out.str());
    }
  }
  std::cout << "bubble(dualpipe-bound)=" << r1.bubble_total
            << ", bubble(continued)=" << r2.bubble_total << '\n';
  return kOk;
}

void add_solve_flags(CLI::App* cmd, SolveConfig& cfg) {
  cmd->add_option("--time-limit", cfg.time_limit, "Wall-clock limit in seconds")
      ->capture_default_str();
  cmd->add_option("--node-limit", cfg.node_limit, "Deterministic search-node cap (0 = none)")
      ->capture_default_str();
  cmd->add_option("--gap", cfg.gap_tolerance, "Relative optimality gap tolerance")
      ->capture_default_str();
  cmd->add_option("--exact-max-ops", cfg.exact_max_ops,
                  "Largest instance handed to the exhaustive engine")
      ->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Operation-level parallelization planner"};
  app.require_subcommand(1);
  const char* env_config = std::getenv("OPPLAN_CONFIG");
  app.set_config("--config", env_config ? env_config : "", "TOML/INI file mirroring the flags");

  std::function<int()> action;

  auto* gen = app.add_subcommand("gen", "Generate a scenario bundle");
  gen->require_subcommand(1);

  GenDualPipe gd;
  auto* dp = gen->add_subcommand("dualpipe", "Bidirectional pipeline instance");
  dp->add_option("--pp", gd.spec.pp, "Pipeline ranks (even)")->capture_default_str();
  dp->add_option("--micro-batches", gd.spec.micro_batches, "Micro-batches (0 = 2*pp)")
      ->capture_default_str();
  dp->add_option("--tf", gd.spec.t_f, "Forward time")->capture_default_str();
  dp->add_option("--ti", gd.spec.t_i, "Input-gradient time")->capture_default_str();
  dp->add_option("--tw", gd.spec.t_w, "Weight-gradient time")->capture_default_str();
  dp->add_option("--memory", gd.memory, "dualpipe, relaxed or uncapped")->capture_default_str();
  dp->add_option("-o,--out", gd.out, "Output path")->capture_default_str();
  dp->callback([&] { action = [&] { return run_gen_dualpipe(gd); }; });

  GenRandom gr;
  auto* rnd = gen->add_subcommand("random", "Random DAG on a fully connected cluster");
  rnd->add_option("--nodes", gr.spec.nodes)->capture_default_str();
  rnd->add_option("--max-degree", gr.max_degree, "Sets both degree caps");
  rnd->add_option("--max-in", gr.spec.max_in_degree)->capture_default_str();
  rnd->add_option("--max-out", gr.spec.max_out_degree)->capture_default_str();
  rnd->add_option("--seed", gr.spec.seed)->capture_default_str();
  rnd->add_option("--duration-min", gr.spec.duration_range.first)->capture_default_str();
  rnd->add_option("--duration-max", gr.spec.duration_range.second)->capture_default_str();
  rnd->add_option("--memory-min", gr.spec.memory_range.first)->capture_default_str();
  rnd->add_option("--memory-max", gr.spec.memory_range.second)->capture_default_str();
  rnd->add_option("--comm-min", gr.spec.comm_range.first)->capture_default_str();
  rnd->add_option("--comm-max", gr.spec.comm_range.second)->capture_default_str();
  rnd->add_option("--machines", gr.machines)->capture_default_str();
  rnd->add_option("--capacity", gr.capacity, "Per-machine memory (0 = no memory limit)")
      ->capture_default_str();
  rnd->add_option("-o,--out", gr.out)->capture_default_str();
  rnd->callback([&] { action = [&] { return run_gen_random(gr); }; });

  CoarsenArgs ca;
  auto* co = app.add_subcommand("coarsen", "Merge operations down to a node budget");
  co->add_option("-i,--in", ca.in)->capture_default_str();
  co->add_option("-o,--out", ca.out)->capture_default_str();
  co->add_option("--to", ca.to, "Node budget")->required();
  co->add_option("--edge-max-duration", ca.edge_duration);
  co->add_option("--edge-max-memory", ca.edge_memory);
  co->add_option("--nonedge-max-duration", ca.nonedge_duration);
  co->add_option("--nonedge-max-memory", ca.nonedge_memory);
  co->add_flag("--full-reduction", ca.full_reduction,
               "Drop every transitively implied edge first");
  co->callback([&] { action = [&] { return run_coarsen(ca); }; });

  SolveArgs sa;
  auto* so = app.add_subcommand("solve", "Minimize the makespan");
  so->add_option("-i,--in", sa.in)->capture_default_str();
  so->add_option("-o,--out", sa.out)->capture_default_str();
  add_solve_flags(so, sa.cfg);
  so->add_option("--primal-bound", sa.cfg.primal_bound, "Stop at the first plan within it");
  so->add_option("--node-selection", sa.node_selection, "best-bound or depth-first")
      ->capture_default_str();
  so->add_option("--workers", sa.cfg.workers, "Portfolio threads (with --nondeterministic)")
      ->capture_default_str();
  so->add_flag("--nondeterministic", sa.nondeterministic, "Allow parallel portfolio search");
  so->add_option("--hint", sa.hint, "Warm-start solution file");
  so->add_option("--solution-out", sa.solution_out, "Also write the bare solution here");
  so->add_flag("-v,--verbose", sa.verbose);
  so->callback([&] { action = [&] { return run_solve(sa); }; });

  VerifyArgs va;
  auto* ve = app.add_subcommand("verify", "Replay a solution and report violations");
  ve->add_option("-i,--in", va.in)->capture_default_str();
  ve->add_option("-o,--out", va.out)->capture_default_str();
  ve->add_flag("--expand", va.expand, "Check the expanded plan against the original graph");
  ve->callback([&] { action = [&] { return run_verify(va); }; });

  ExportArgs ea;
  auto* ex = app.add_subcommand("export", "Write a trace, Gantt table or MPS/LP model");
  ex->add_option("-i,--in", ea.in)->capture_default_str();
  ex->add_option("-o,--out", ea.out)->capture_default_str();
  ex->add_option("--format", ea.format)
      ->check(CLI::IsMember({"trace", "gantt", "mps", "lp"}))
      ->capture_default_str();
  ex->add_flag("--expand", ea.expand, "Render the expanded plan on the original graph");
  ex->add_option("--primal-bound", ea.primal_bound, "Add makespan <= bound to MPS/LP");
  ex->callback([&] { action = [&] { return run_export(ea); }; });

  ReproArgs ra;
  ra.cfg.time_limit = 600.0;
  auto* re = app.add_subcommand("repro-dualpipe", "Bounded solve, then warm-started continuation");
  re->add_option("--pp", ra.spec.pp)->capture_default_str();
  re->add_option("--micro-batches", ra.spec.micro_batches)->capture_default_str();
  re->add_option("--memory", ra.memory)->capture_default_str();
  add_solve_flags(re, ra.cfg);
  re->add_option("--trace-prefix", ra.trace_prefix, "Write <prefix>-bounded/continued.json");
  re->add_flag("-v,--verbose", ra.verbose);
  re->callback([&] { action = [&] { return run_repro(ra); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return action();
  } catch (const Failure& f) {
    report_error(f.body);
    return f.code;
  } catch (const Error& e) {
    report_error({{"error", to_string(e.kind())}, {"message", e.what()}, {"ids", e.ids()}});
    return exit_for(e.kind());
  }
}

}  // namespace
}  // namespace opplan::cli

int main(int argc, char** argv) { return opplan::cli::run(argc, argv); }
