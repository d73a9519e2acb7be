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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "opplan/graph.hpp"
#include "opplan/solution.hpp"

namespace opplan {

enum class VarKind {
  kAssign,        // x(op, machine)
  kOrder,         // y(op, op)
  kStart,         // s(op)
  kEnd,           // e(op)
  kSlack,         // t(producer, consumer)
  kChannelUse,    // z(producer, consumer, from, to)
  kCommOrder,     // w(producer, consumer, producer, consumer)
  kCommStart,     // c(producer, consumer)
  kCommEnd,       // d(producer, consumer)
  kImmediate,     // u(op, op)
  kFirst,         // first(op, machine)
  kMemBefore,     // m_minus(op)
  kMemAfter,      // m_plus(op)
  kMakespan,      // makespan
  kLoad,          // ext_l(op, weight)
  kUnload,        // ext_ul(op, weight)
  kPreload,       // ext_l0(weight, machine)
  kActiveBefore,  // ext_act_minus(op, weight)
  kActiveAfter,   // ext_act_plus(op, weight)
};

const char* to_string(VarKind kind);

enum class Domain { kBinary, kContinuous };

struct Variable {
  VarKind kind;
  std::vector<std::string> indices;
  Domain domain;

  std::string name() const;  // e.g. "x(F0,m1)"
};

enum class Sense { kLe, kGe, kEq };

struct Term {
  std::int64_t coef;
  std::size_t var;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Sense sense;
  std::int64_t rhs;
  std::string tag;
};

struct ModelOptions {
  bool memory_capped = true;
};

// Weight assets and the op -> weight use relation of the loading extension.
struct LoadingData {
  std::vector<WeightAsset> weights;               // id order
  std::vector<std::vector<std::size_t>> uses;     // per op index, weight indices
};

// The assembled mixed-integer program. Built once, then immutable apart from
// the copy-and-extend helpers below.
class ScheduleModel {
 public:
  const ComputationGraph& graph() const { return graph_; }
  const HardwareCluster& cluster() const { return cluster_; }
  const ModelOptions& options() const { return options_; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<LinearConstraint>& constraints() const { return rows_; }
  std::size_t objective() const { return objective_; }
  std::int64_t big_m() const { return big_m_; }
  std::optional<Time> primal_bound() const { return primal_bound_; }

  // Machines an operation may run on (indices into cluster().machines()).
  const std::vector<std::size_t>& eligible(std::size_t op) const { return eligible_[op]; }
  Mem capacity(std::size_t machine) const;

  bool extended() const { return loading_.has_value(); }
  const LoadingData* loading() const { return loading_ ? &*loading_ : nullptr; }

  // Incumbent attached by warm_start(), already verified.
  const Solution* hint() const { return hint_ ? &*hint_ : nullptr; }

  std::optional<std::size_t> find(VarKind kind, const std::vector<std::string>& indices) const;
  std::size_t at(VarKind kind, const std::vector<std::string>& indices) const;

  // Row count per tag, in tag order.
  std::map<std::string, std::size_t> tag_counts() const;

 private:
  friend ScheduleModel build_model(const ComputationGraph&, const HardwareCluster&,
                                   const ModelOptions&);
  friend ScheduleModel set_primal_bound(ScheduleModel, Time);
  friend ScheduleModel extend_model(const ScheduleModel&, const std::vector<WeightAsset>&,
                                    const std::map<std::string, std::vector<std::string>>&);
  friend ScheduleModel warm_start(const ScheduleModel&, const Solution&);
  friend class ModelBuilder;

  std::size_t add_variable(VarKind kind, std::vector<std::string> indices, Domain domain);

  ComputationGraph graph_;
  HardwareCluster cluster_;
  ModelOptions options_;
  std::vector<Variable> vars_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::vector<LinearConstraint> rows_;
  std::size_t objective_ = 0;
  std::int64_t big_m_ = 1;
  std::optional<Time> primal_bound_;
  std::vector<std::vector<std::size_t>> eligible_;
  std::optional<LoadingData> loading_;
  std::optional<Solution> hint_;
};

// Builds the base program. Throws kInfeasible when the instance cannot have
// a feasible schedule for structural reasons (ids of the culprits attached),
// and kDanglingRef for unknown machines in allowed_machines.
ScheduleModel build_model(const ComputationGraph& g, const HardwareCluster& h,
                          const ModelOptions& opts = {});

// Adds makespan <= bound. Throws kInvalidValue for bound <= 0.
ScheduleModel set_primal_bound(ScheduleModel model, Time bound);

// Layers the dynamic weight loading variables and rows onto a base model.
// `use` maps op id -> weight ids; throws kDanglingRef for unknown ids.
ScheduleModel extend_model(const ScheduleModel& model, const std::vector<WeightAsset>& weights,
                           const std::map<std::string, std::vector<std::string>>& use);

// Uses the graph's own weight section and weight_refs.
ScheduleModel extend_model(const ScheduleModel& model);

struct RowViolation {
  std::size_t row;
  std::string tag;
  std::int64_t lhs;
};

// Checks a full variable assignment against every row and variable domain.
// Domain problems are reported with row == constraints().size() and the
// variable's name as tag.
std::vector<RowViolation> evaluate(const ScheduleModel& model,
                                   const std::vector<std::int64_t>& values);

// Maps a solved plan onto the model's variables (s, e, x, y, u, first, m,
// z, w, c, d, t, makespan and, when extended, the loading variables).
// Throws kInconsistent when the plan does not fit the model's index sets.
std::vector<std::int64_t> assignment_from_solution(const ScheduleModel& model,
                                                   const Solution& sol);

}  // namespace opplan
