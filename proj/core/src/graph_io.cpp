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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "opplan/coarsen.hpp"
#include "opplan/error.hpp"
#include "opplan/graph.hpp"

namespace opplan {

namespace {

using json = nlohmann::json;

Operation parse_operation(const json& j, Time resolution) {
  detail::expect_keys(j, "operation",
                      {"id", "duration", "weight_mem", "activation_delta"},
                      {"weight_refs", "allowed_machines"});
  Operation op;
  op.id = detail::get_string(j, "id", "operation");
  op.duration = detail::get_time(j, "duration", resolution, op.id);
  op.weight_mem = detail::get_integer(j, "weight_mem", op.id);
  op.activation_delta = detail::get_integer(j, "activation_delta", op.id);
  if (j.contains("weight_refs")) {
    op.weight_refs = detail::get_string_list(j, "weight_refs", op.id);
  }
  if (j.contains("allowed_machines")) {
    op.allowed_machines = detail::get_string_list(j, "allowed_machines", op.id);
  }
  return op;
}

DependencyEdge parse_edge(const json& j, Time resolution) {
  detail::expect_keys(j, "edge", {"from", "to", "comm_duration"}, {});
  DependencyEdge e;
  e.producer = detail::get_string(j, "from", "edge");
  e.consumer = detail::get_string(j, "to", "edge");
  e.comm_duration =
      detail::get_time(j, "comm_duration", resolution, e.producer + "->" + e.consumer);
  return e;
}

WeightAsset parse_weight(const json& j, Time resolution) {
  detail::expect_keys(j, "weight", {"id", "size", "load_cost", "unload_cost"}, {});
  WeightAsset w;
  w.id = detail::get_string(j, "id", "weight");
  w.size = detail::get_integer(j, "size", w.id);
  w.load_cost = detail::get_time(j, "load_cost", resolution, w.id);
  w.unload_cost = detail::get_time(j, "unload_cost", resolution, w.id);
  return w;
}

ComputationGraph graph_from_json(const json& doc) {
  detail::expect_keys(doc, "graph document", {"operations", "edges"},
                      {"weights", "time_resolution"});
  Time resolution = 1;
  if (doc.contains("time_resolution")) {
    resolution = detail::get_integer(doc, "time_resolution", "graph document");
    if (resolution <= 0) {
      throw Error(ErrorKind::kInvalidValue, "time_resolution must be positive");
    }
  }
  std::vector<Operation> ops;
  for (const json& j : detail::get_array(doc, "operations")) {
    ops.push_back(parse_operation(j, resolution));
  }
  std::vector<DependencyEdge> edges;
  for (const json& j : detail::get_array(doc, "edges")) {
    edges.push_back(parse_edge(j, resolution));
  }
  std::vector<WeightAsset> weights;
  if (doc.contains("weights")) {
    for (const json& j : detail::get_array(doc, "weights")) {
      weights.push_back(parse_weight(j, resolution));
    }
  }
  return ComputationGraph(std::move(ops), std::move(edges), std::move(weights));
}

HardwareCluster cluster_from_json(const json& doc) {
  detail::expect_keys(doc, "cluster document", {"machines", "channels"}, {});
  std::vector<Machine> machines;
  for (const json& j : detail::get_array(doc, "machines")) {
    detail::expect_keys(j, "machine", {"id", "memory_capacity"}, {});
    Machine m;
    m.id = detail::get_string(j, "id", "machine");
    m.memory_capacity = detail::get_integer(j, "memory_capacity", m.id);
    machines.push_back(std::move(m));
  }
  std::vector<Channel> channels;
  for (const json& j : detail::get_array(doc, "channels")) {
    detail::expect_keys(j, "channel", {"from", "to"}, {});
    channels.push_back(Channel{detail::get_string(j, "from", "channel"),
                               detail::get_string(j, "to", "channel")});
  }
  return HardwareCluster(std::move(machines), std::move(channels));
}

}  // namespace

ComputationGraph load_computation_graph(std::istream& in) {
  return graph_from_json(detail::parse_document(in));
}

ComputationGraph load_computation_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_computation_graph(in);
}

ComputationGraph load_computation_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return load_computation_graph(in);
}

void save_computation_graph(const ComputationGraph& g, std::ostream& out) {
  json doc;
  doc["operations"] = json::array();
  for (const Operation& op : g.operations()) {
    json j = {{"id", op.id},
              {"duration", op.duration},
              {"weight_mem", op.weight_mem},
              {"activation_delta", op.activation_delta}};
    if (!op.weight_refs.empty()) j["weight_refs"] = op.weight_refs;
    if (!op.allowed_machines.empty()) j["allowed_machines"] = op.allowed_machines;
    doc["operations"].push_back(std::move(j));
  }
  doc["edges"] = json::array();
  for (const DependencyEdge& e : g.edges()) {
    doc["edges"].push_back(
        {{"from", e.producer}, {"to", e.consumer}, {"comm_duration", e.comm_duration}});
  }
  if (!g.weights().empty()) {
    doc["weights"] = json::array();
    for (const WeightAsset& w : g.weights()) {
      doc["weights"].push_back({{"id", w.id},
                                {"size", w.size},
                                {"load_cost", w.load_cost},
                                {"unload_cost", w.unload_cost}});
    }
  }
  detail::write_document(doc, out);
}

HardwareCluster load_cluster(std::istream& in) {
  return cluster_from_json(detail::parse_document(in));
}

HardwareCluster load_cluster(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_cluster(in);
}

HardwareCluster load_cluster_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return load_cluster(in);
}

void save_cluster(const HardwareCluster& h, std::ostream& out) {
  json doc;
  doc["machines"] = json::array();
  for (const Machine& m : h.machines()) {
    doc["machines"].push_back({{"id", m.id}, {"memory_capacity", m.memory_capacity}});
  }
  doc["channels"] = json::array();
  for (const Channel& c : h.declared_channels()) {
    doc["channels"].push_back({{"from", c.from}, {"to", c.to}});
  }
  detail::write_document(doc, out);
}

void save_merge_records(const std::vector<MergeRecord>& records, std::ostream& out) {
  json doc;
  doc["records"] = json::array();
  for (const MergeRecord& r : records) {
    doc["records"].push_back({{"id", r.new_id}, {"absorbed", r.absorbed}});
  }
  detail::write_document(doc, out);
}

std::vector<MergeRecord> load_merge_records(std::istream& in) {
  const json doc = detail::parse_document(in);
  detail::expect_keys(doc, "merge records", {"records"}, {});
  std::vector<MergeRecord> out;
  for (const json& j : detail::get_array(doc, "records")) {
    detail::expect_keys(j, "merge record", {"id", "absorbed"}, {});
    MergeRecord r;
    r.new_id = detail::get_string(j, "id", "merge record");
    r.absorbed = detail::get_string_list(j, "absorbed", r.new_id);
    if (r.absorbed.size() < 2) {
      throw Error(ErrorKind::kSchema, "merge record '" + r.new_id + "' absorbs fewer than two ops",
                  {r.new_id});
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace opplan
