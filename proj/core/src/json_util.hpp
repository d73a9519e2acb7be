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

#pragma once

// Strict-schema helpers shared by every document reader.

#include <cmath>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "opplan/error.hpp"
#include "opplan/graph.hpp"

namespace opplan::detail {

inline nlohmann::json parse_document(std::istream& in) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed document: ") + e.what());
  }
}

inline void write_document(const nlohmann::json& doc, std::ostream& out) {
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed");
}

inline void expect_keys(const nlohmann::json& j, const std::string& what,
                        std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional) {
  if (!j.is_object()) throw Error(ErrorKind::kSchema, what + " must be an object");
  for (const char* key : required) {
    if (!j.contains(key)) {
      throw Error(ErrorKind::kSchema, what + " is missing field '" + key + "'");
    }
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : required) known = known || item.key() == key;
    for (const char* key : optional) known = known || item.key() == key;
    if (!known) {
      throw Error(ErrorKind::kSchema, what + " has unknown field '" + item.key() + "'");
    }
  }
}

inline const nlohmann::json& get_array(const nlohmann::json& j, const char* key) {
  const nlohmann::json& v = j.at(key);
  if (!v.is_array()) throw Error(ErrorKind::kSchema, std::string(key) + " must be a list");
  return v;
}

inline std::string get_string(const nlohmann::json& j, const char* key,
                              const std::string& owner) {
  const nlohmann::json& v = j.at(key);
  if (!v.is_string()) {
    throw Error(ErrorKind::kSchema, owner + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

inline std::int64_t get_integer(const nlohmann::json& j, const char* key,
                                const std::string& owner) {
  const nlohmann::json& v = j.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  throw Error(ErrorKind::kSchema, owner + ": field '" + key + "' must be an integer",
              {owner});
}

// Reads a time value and scales it to integral ticks.
inline Time get_time(const nlohmann::json& j, const char* key, Time resolution,
                     const std::string& owner) {
  const nlohmann::json& v = j.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>() * resolution;
  if (v.is_number_float()) {
    const double scaled = v.get<double>() * static_cast<double>(resolution);
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) < 1e-9) return static_cast<Time>(rounded);
    throw Error(ErrorKind::kInvalidValue,
                owner + ": field '" + key + "' is not a whole number of ticks", {owner});
  }
  throw Error(ErrorKind::kSchema, owner + ": field '" + key + "' must be a number",
              {owner});
}

inline std::vector<std::string> get_string_list(const nlohmann::json& j, const char* key,
                                                const std::string& owner) {
  const nlohmann::json& v = j.at(key);
  if (!v.is_array()) {
    throw Error(ErrorKind::kSchema, owner + ": field '" + key + "' must be a list");
  }
  std::vector<std::string> out;
  for (const nlohmann::json& item : v) {
    if (!item.is_string()) {
      throw Error(ErrorKind::kSchema, owner + ": '" + key + "' entries must be strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace opplan::detail
