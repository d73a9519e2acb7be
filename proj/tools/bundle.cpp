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

#include "bundle.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "opplan/error.hpp"

namespace opplan::cli {

namespace {

using json = nlohmann::json;

template <class T, class Save>
json to_json(const T& value, Save save) {
  std::ostringstream out;
  save(value, out);
  return json::parse(out.str());
}

std::istringstream as_stream(const json& j) { return std::istringstream(j.dump()); }

}  // namespace

Bundle read_bundle(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed document: ") + e.what());
  }
  Bundle b;
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "input must be a JSON object");
  if (doc.contains("operations")) {
    auto s = as_stream(doc);
    b.graph = load_computation_graph(s);
    return b;
  }
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    auto s = as_stream(item.value());
    if (key == "graph") {
      b.graph = load_computation_graph(s);
    } else if (key == "cluster") {
      b.cluster = load_cluster(s);
    } else if (key == "original") {
      b.original = load_computation_graph(s);
    } else if (key == "records") {
      auto wrapped = as_stream(json{{"records", item.value()}});
      b.records = load_merge_records(wrapped);
    } else if (key == "solution") {
      b.solution = load_solution(s);
    } else if (key == "memory_capped") {
      if (!item.value().is_boolean()) {
        throw Error(ErrorKind::kSchema, "memory_capped must be a boolean");
      }
      b.memory_capped = item.value().get<bool>();
    } else {
      throw Error(ErrorKind::kSchema, "bundle has unknown field '" + key + "'");
    }
  }
  return b;
}

void write_bundle(const Bundle& b, std::ostream& out) {
  json doc = json::object();
  if (b.graph) doc["graph"] = to_json(*b.graph, [](auto& g, auto& o) { save_computation_graph(g, o); });
  if (b.cluster) doc["cluster"] = to_json(*b.cluster, [](auto& h, auto& o) { save_cluster(h, o); });
  doc["memory_capped"] = b.memory_capped;
  if (b.original) {
    doc["original"] = to_json(*b.original, [](auto& g, auto& o) { save_computation_graph(g, o); });
    doc["records"] =
        to_json(b.records, [](auto& r, auto& o) { save_merge_records(r, o); }).at("records");
  }
  if (b.solution) doc["solution"] = to_json(*b.solution, [](auto& s, auto& o) { save_solution(s, o); });
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

Bundle read_bundle_path(const std::string& path) {
  if (path == "-") return read_bundle(std::cin);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return read_bundle(in);
}

void write_text_path(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorKind::kIo, "write failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path + "' failed");
}

const ComputationGraph& need_graph(const Bundle& b) {
  if (!b.graph) throw Error(ErrorKind::kSchema, "input carries no graph");
  return *b.graph;
}

const HardwareCluster& need_cluster(const Bundle& b) {
  if (!b.cluster) throw Error(ErrorKind::kSchema, "input carries no cluster");
  return *b.cluster;
}

const Solution& need_solution(const Bundle& b) {
  if (!b.solution) throw Error(ErrorKind::kSchema, "input carries no solution");
  return *b.solution;
}

}  // namespace opplan::cli
