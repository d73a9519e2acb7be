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

// Combinatorial makespan lower bounds shared by both search engines.

#include <string>
#include <vector>

#include "problem.hpp"

namespace opplan::detail {

struct Job {
  Time release;
  Time body;
  Time tail;
};

// Preemptive one-machine relaxation (largest remaining tail first).
Time jackson_bound(std::vector<Job> jobs, Time available = 0);

struct RootBound {
  Time value = 0;
  // Constraint groups behind the binding bound.
  std::vector<std::string> tags;
};

RootBound root_bound(const Problem& p);

}  // namespace opplan::detail
