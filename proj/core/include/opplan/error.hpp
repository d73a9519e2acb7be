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

#include <stdexcept>
#include <string>
#include <vector>

namespace opplan {

// Machine-readable category carried by every library error. The CLI prints
// the category name on stderr and maps it to an exit status.
enum class ErrorKind {
  kSchema,          // document does not match the file schema
  kDuplicateId,     // two elements share an id
  kDanglingRef,     // reference to an id that does not exist
  kCycle,           // dependency graph is not acyclic
  kInvalidValue,    // out-of-range numeric value
  kMergeCycle,      // merging two operations would create a cycle
  kInfeasible,      // infeasible by construction or proven infeasible
  kRejectedHint,    // warm-start hint fails verification
  kInconsistent,    // merge records do not match a graph
  kIo,              // stream failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::vector<std::string> ids = {})
      : std::runtime_error(message), kind_(kind), ids_(std::move(ids)) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Offending element ids, in the order they were detected.
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> ids_;
};

}  // namespace opplan
