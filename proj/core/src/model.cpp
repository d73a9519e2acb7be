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

#include "opplan/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "opplan/error.hpp"

namespace opplan {

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::kAssign: return "x";
    case VarKind::kOrder: return "y";
    case VarKind::kStart: return "s";
    case VarKind::kEnd: return "e";
    case VarKind::kSlack: return "t";
    case VarKind::kChannelUse: return "z";
    case VarKind::kCommOrder: return "w";
    case VarKind::kCommStart: return "c";
    case VarKind::kCommEnd: return "d";
    case VarKind::kImmediate: return "u";
    case VarKind::kFirst: return "first";
    case VarKind::kMemBefore: return "m_minus";
    case VarKind::kMemAfter: return "m_plus";
    case VarKind::kMakespan: return "makespan";
    case VarKind::kLoad: return "ext_l";
    case VarKind::kUnload: return "ext_ul";
    case VarKind::kPreload: return "ext_l0";
    case VarKind::kActiveBefore: return "ext_act_minus";
    case VarKind::kActiveAfter: return "ext_act_plus";
  }
  return "?";
}

std::string Variable::name() const {
  std::string out = to_string(kind);
  if (indices.empty()) return out;
  out += '(';
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k) out += ',';
    out += indices[k];
  }
  out += ')';
  return out;
}

namespace {

std::string key_of(VarKind kind, const std::vector<std::string>& indices) {
  return Variable{kind, indices, Domain::kBinary}.name();
}

}  // namespace

Mem ScheduleModel::capacity(std::size_t machine) const {
  return cluster_.machine(machine).memory_capacity;
}

std::optional<std::size_t> ScheduleModel::find(VarKind kind,
                                               const std::vector<std::string>& indices) const {
  auto it = var_index_.find(key_of(kind, indices));
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ScheduleModel::at(VarKind kind, const std::vector<std::string>& indices) const {
  auto v = find(kind, indices);
  if (!v) throw Error(ErrorKind::kDanglingRef, "no variable " + key_of(kind, indices));
  return *v;
}

std::map<std::string, std::size_t> ScheduleModel::tag_counts() const {
  std::map<std::string, std::size_t> out;
  for (const LinearConstraint& row : rows_) ++out[row.tag];
  return out;
}

std::size_t ScheduleModel::add_variable(VarKind kind, std::vector<std::string> indices,
                                        Domain domain) {
  Variable v{kind, std::move(indices), domain};
  const std::size_t id = vars_.size();
  var_index_.emplace(v.name(), id);
  vars_.push_back(std::move(v));
  return id;
}

class ModelBuilder {
 public:
  ModelBuilder(const ComputationGraph& g, const HardwareCluster& h, const ModelOptions& opts,
               std::optional<LoadingData> loading)
      : g_(g), h_(h) {
    m_.graph_ = g;
    m_.cluster_ = h;
    m_.options_ = opts;
    m_.loading_ = std::move(loading);
  }

  ScheduleModel build() {
    resolve_eligibility();
    check_structure();
    compute_big_m();
    declare_variables();
    add_time_rows();
    add_assignment_rows();
    add_machine_rows();
    add_channel_rows();
    add_memory_rows();
    if (m_.loading_) add_loading_rows();
    return std::move(m_);
  }

 private:
  using Row = LinearConstraint;

  const std::string& op_id(std::size_t i) const { return g_.op(i).id; }
  const std::string& mach_id(std::size_t j) const { return h_.machine(j).id; }
  std::vector<std::string> edge_ix(std::size_t k) const {
    return {op_id(g_.edge_source(k)), op_id(g_.edge_target(k))};
  }

  std::size_t var(VarKind kind, std::vector<std::string> ix) const {
    return m_.at(kind, ix);
  }
  std::optional<std::size_t> maybe(VarKind kind, std::vector<std::string> ix) const {
    return m_.find(kind, ix);
  }
  bool eligible(std::size_t i, std::size_t j) const {
    return std::binary_search(m_.eligible_[i].begin(), m_.eligible_[i].end(), j);
  }
  bool share_machine(std::size_t a, std::size_t b) const {
    for (std::size_t j : m_.eligible_[a]) {
      if (eligible(b, j)) return true;
    }
    return false;
  }

  void row(std::vector<Term> terms, Sense sense, std::int64_t rhs, const char* tag) {
    m_.rows_.push_back(Row{std::move(terms), sense, rhs, tag});
  }

  void resolve_eligibility() {
    m_.eligible_.assign(g_.size(), {});
    for (std::size_t i = 0; i < g_.size(); ++i) {
      const Operation& op = g_.op(i);
      std::vector<std::size_t>& el = m_.eligible_[i];
      if (op.allowed_machines.empty()) {
        for (std::size_t j = 0; j < h_.size(); ++j) el.push_back(j);
      } else {
        for (const std::string& id : op.allowed_machines) {
          auto j = h_.find(id);
          if (!j) {
            throw Error(ErrorKind::kDanglingRef,
                        "operation '" + op.id + "' names unknown machine '" + id + "'",
                        {op.id, id});
          }
          el.push_back(*j);
        }
        std::sort(el.begin(), el.end());
        el.erase(std::unique(el.begin(), el.end()), el.end());
      }
    }
  }

  void check_structure() const {
    for (std::size_t k = 0; k < g_.edges().size(); ++k) {
      const std::size_t a = g_.edge_source(k);
      const std::size_t b = g_.edge_target(k);
      bool linked = false;
      for (std::size_t j1 : m_.eligible_[a]) {
        for (std::size_t j2 : m_.eligible_[b]) linked = linked || h_.connected(j1, j2);
      }
      if (!linked) {
        throw Error(ErrorKind::kInfeasible,
                    "dependent operations '" + op_id(a) + "' and '" + op_id(b) +
                        "' can only run on machines without a connecting channel",
                    {op_id(a), op_id(b)});
      }
    }
    if (!m_.options_.memory_capped) return;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      Mem need = g_.op(i).weight_mem + std::max<Mem>(0, g_.op(i).activation_delta);
      if (m_.loading_) {
        for (std::size_t w : m_.loading_->uses[i]) need += m_.loading_->weights[w].size;
      }
      bool fits = false;
      for (std::size_t j : m_.eligible_[i]) fits = fits || need <= m_.capacity(j);
      if (!fits) {
        throw Error(ErrorKind::kInfeasible,
                    "operation '" + op_id(i) + "' exceeds the memory capacity of every machine",
                    {op_id(i)});
      }
    }
  }

  void compute_big_m() {
    std::int64_t time = g_.total_duration();
    for (const DependencyEdge& e : g_.edges()) time += e.comm_duration;
    std::int64_t mem = g_.total_weight_mem();
    for (const Operation& op : g_.operations()) mem += 2 * std::llabs(op.activation_delta);
    if (m_.loading_) {
      for (const WeightAsset& w : m_.loading_->weights) {
        time += static_cast<std::int64_t>(g_.size()) * (w.load_cost + w.unload_cost);
        mem += w.size;
      }
    }
    m_.big_m_ = std::max<std::int64_t>({time, mem, 1});
  }

  void declare_variables() {
    const auto bin = Domain::kBinary;
    const auto cont = Domain::kContinuous;
    m_.objective_ = m_.add_variable(VarKind::kMakespan, {}, cont);
    for (std::size_t i = 0; i < g_.size(); ++i) {
      m_.add_variable(VarKind::kStart, {op_id(i)}, cont);
      m_.add_variable(VarKind::kEnd, {op_id(i)}, cont);
      m_.add_variable(VarKind::kMemBefore, {op_id(i)}, cont);
      m_.add_variable(VarKind::kMemAfter, {op_id(i)}, cont);
      for (std::size_t j : m_.eligible_[i]) {
        m_.add_variable(VarKind::kAssign, {op_id(i), mach_id(j)}, bin);
        m_.add_variable(VarKind::kFirst, {op_id(i), mach_id(j)}, bin);
      }
    }
    for (std::size_t a = 0; a < g_.size(); ++a) {
      for (std::size_t b = 0; b < g_.size(); ++b) {
        if (a == b || !share_machine(a, b)) continue;
        m_.add_variable(VarKind::kOrder, {op_id(a), op_id(b)}, bin);
        m_.add_variable(VarKind::kImmediate, {op_id(a), op_id(b)}, bin);
      }
    }
    for (std::size_t k = 0; k < g_.edges().size(); ++k) {
      const auto ix = edge_ix(k);
      m_.add_variable(VarKind::kSlack, ix, cont);
      m_.add_variable(VarKind::kCommStart, ix, cont);
      m_.add_variable(VarKind::kCommEnd, ix, cont);
      for (std::size_t ch : edge_channels(k)) {
        auto zix = ix;
        zix.push_back(mach_id(h_.channel_from(ch)));
        zix.push_back(mach_id(h_.channel_to(ch)));
        m_.add_variable(VarKind::kChannelUse, zix, bin);
      }
    }
    for (std::size_t k1 = 0; k1 < g_.edges().size(); ++k1) {
      for (std::size_t k2 = 0; k2 < g_.edges().size(); ++k2) {
        if (k1 == k2 || shared_real_channels(k1, k2).empty()) continue;
        auto ix = edge_ix(k1);
        const auto ix2 = edge_ix(k2);
        ix.insert(ix.end(), ix2.begin(), ix2.end());
        m_.add_variable(VarKind::kCommOrder, ix, bin);
      }
    }
    if (!m_.loading_) return;
    const LoadingData& ld = *m_.loading_;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      for (const WeightAsset& w : ld.weights) {
        m_.add_variable(VarKind::kLoad, {op_id(i), w.id}, bin);
        m_.add_variable(VarKind::kUnload, {op_id(i), w.id}, bin);
        m_.add_variable(VarKind::kActiveBefore, {op_id(i), w.id}, bin);
        m_.add_variable(VarKind::kActiveAfter, {op_id(i), w.id}, bin);
      }
    }
    for (const WeightAsset& w : ld.weights) {
      for (std::size_t j = 0; j < h_.size(); ++j) {
        m_.add_variable(VarKind::kPreload, {w.id, mach_id(j)}, bin);
      }
    }
  }

  // Channels (self channels included) an edge's transfer could use.
  std::vector<std::size_t> edge_channels(std::size_t k) const {
    std::vector<std::size_t> out;
    const std::size_t a = g_.edge_source(k);
    const std::size_t b = g_.edge_target(k);
    for (std::size_t ch = 0; ch < h_.channels().size(); ++ch) {
      if (eligible(a, h_.channel_from(ch)) && eligible(b, h_.channel_to(ch))) out.push_back(ch);
    }
    return out;
  }

  // Zero-length transfers occupy no channel time and are never sequenced.
  std::vector<std::size_t> shared_real_channels(std::size_t k1, std::size_t k2) const {
    std::vector<std::size_t> out;
    if (g_.edges()[k1].comm_duration == 0 || g_.edges()[k2].comm_duration == 0) return out;
    const auto c1 = edge_channels(k1);
    const auto c2 = edge_channels(k2);
    for (std::size_t ch : c1) {
      if (h_.channels()[ch].is_self()) continue;
      if (std::find(c2.begin(), c2.end(), ch) != c2.end()) out.push_back(ch);
    }
    return out;
  }

  std::size_t z_var(std::size_t k, std::size_t ch) const {
    auto ix = edge_ix(k);
    ix.push_back(mach_id(h_.channel_from(ch)));
    ix.push_back(mach_id(h_.channel_to(ch)));
    return var(VarKind::kChannelUse, ix);
  }

  void add_time_rows() {
    const std::size_t z = m_.objective_;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      row({{1, z}, {-1, var(VarKind::kEnd, {op_id(i)})}}, Sense::kGe, 0, "makespan");
    }
    for (std::size_t i = 0; i < g_.size(); ++i) {
      std::vector<Term> terms = {{1, var(VarKind::kEnd, {op_id(i)})},
                                 {-1, var(VarKind::kStart, {op_id(i)})}};
      if (m_.loading_) {
        for (std::size_t w = 0; w < m_.loading_->weights.size(); ++w) {
          const WeightAsset& asset = m_.loading_->weights[w];
          if (asset.load_cost) {
            terms.push_back({-asset.load_cost, var(VarKind::kLoad, {op_id(i), asset.id})});
          }
          if (asset.unload_cost) {
            terms.push_back({-asset.unload_cost, var(VarKind::kUnload, {op_id(i), asset.id})});
          }
        }
      }
      row(std::move(terms), Sense::kEq, g_.op(i).duration, "duration");
    }
    for (std::size_t k = 0; k < g_.edges().size(); ++k) {
      const auto ix = edge_ix(k);
      row({{1, var(VarKind::kStart, {ix[1]})},
           {-1, var(VarKind::kStart, {ix[0]})},
           {-1, var(VarKind::kSlack, ix)}},
          Sense::kEq, 0, "slack");
      row({{1, var(VarKind::kSlack, ix)}}, Sense::kGe, 0, "dependency");
    }
  }

  void add_assignment_rows() {
    for (std::size_t i = 0; i < g_.size(); ++i) {
      std::vector<Term> terms;
      for (std::size_t j : m_.eligible_[i]) {
        terms.push_back({1, var(VarKind::kAssign, {op_id(i), mach_id(j)})});
      }
      row(std::move(terms), Sense::kEq, 1, "assignment");
    }
  }

  void add_machine_rows() {
    const std::int64_t big = m_.big_m_;
    for (std::size_t a = 0; a < g_.size(); ++a) {
      for (std::size_t b = 0; b < g_.size(); ++b) {
        if (a == b || !share_machine(a, b)) continue;
        const std::size_t y = var(VarKind::kOrder, {op_id(a), op_id(b)});
        for (std::size_t j : m_.eligible_[a]) {
          if (!eligible(b, j)) continue;
          row({{1, var(VarKind::kEnd, {op_id(a)})},
               {-1, var(VarKind::kStart, {op_id(b)})},
               {big, y},
               {big, var(VarKind::kAssign, {op_id(a), mach_id(j)})},
               {big, var(VarKind::kAssign, {op_id(b), mach_id(j)})}},
              Sense::kLe, 3 * big, "machine_overlap");
        }
      }
    }
    for (std::size_t a = 0; a < g_.size(); ++a) {
      for (std::size_t b = a + 1; b < g_.size(); ++b) {
        if (!share_machine(a, b)) continue;
        row({{1, var(VarKind::kOrder, {op_id(a), op_id(b)})},
             {1, var(VarKind::kOrder, {op_id(b), op_id(a)})}},
            Sense::kEq, 1, "machine_order");
      }
    }
  }

  void add_channel_rows() {
    const std::int64_t big = m_.big_m_;
    for (std::size_t k = 0; k < g_.edges().size(); ++k) {
      const std::size_t a = g_.edge_source(k);
      const std::size_t b = g_.edge_target(k);
      const auto ix = edge_ix(k);
      const auto channels = edge_channels(k);
      for (std::size_t ch : channels) {
        const std::size_t z = z_var(k, ch);
        const std::size_t xa = var(VarKind::kAssign, {op_id(a), mach_id(h_.channel_from(ch))});
        const std::size_t xb = var(VarKind::kAssign, {op_id(b), mach_id(h_.channel_to(ch))});
        row({{1, z}, {-1, xa}}, Sense::kLe, 0, "channel_product");
        row({{1, z}, {-1, xb}}, Sense::kLe, 0, "channel_product");
        row({{1, z}, {-1, xa}, {-1, xb}}, Sense::kGe, -1, "channel_product");
      }
      for (std::size_t j1 : m_.eligible_[a]) {
        for (std::size_t j2 : m_.eligible_[b]) {
          if (h_.connected(j1, j2)) continue;
          row({{1, var(VarKind::kAssign, {op_id(a), mach_id(j1)})},
               {1, var(VarKind::kAssign, {op_id(b), mach_id(j2)})}},
              Sense::kLe, 1, "channel_restrict");
        }
      }
      const Time dc = g_.edges()[k].comm_duration;
      const std::size_t c = var(VarKind::kCommStart, ix);
      const std::size_t d = var(VarKind::kCommEnd, ix);
      std::vector<Term> terms = {{1, d}, {-1, c}};
      if (dc > 0) {
        for (std::size_t ch : channels) {
          if (h_.channels()[ch].is_self()) terms.push_back({dc, z_var(k, ch)});
        }
      }
      row(std::move(terms), Sense::kGe, dc, "comm_duration");
      row({{1, var(VarKind::kStart, {ix[1]})}, {-1, d}}, Sense::kGe, 0, "comm_arrival");
      row({{1, var(VarKind::kEnd, {ix[0]})}, {-1, c}}, Sense::kLe, 0, "comm_release");
    }
    for (std::size_t k1 = 0; k1 < g_.edges().size(); ++k1) {
      for (std::size_t k2 = 0; k2 < g_.edges().size(); ++k2) {
        if (k1 == k2) continue;
        const auto shared = shared_real_channels(k1, k2);
        if (shared.empty()) continue;
        auto wix = edge_ix(k1);
        const auto ix2 = edge_ix(k2);
        wix.insert(wix.end(), ix2.begin(), ix2.end());
        const std::size_t w = var(VarKind::kCommOrder, wix);
        for (std::size_t ch : shared) {
          row({{1, var(VarKind::kCommStart, ix2)},
               {-1, var(VarKind::kCommEnd, edge_ix(k1))},
               {-big, w},
               {-big, z_var(k1, ch)},
               {-big, z_var(k2, ch)}},
              Sense::kGe, -3 * big, "channel_overlap");
        }
      }
    }
    for (std::size_t k1 = 0; k1 < g_.edges().size(); ++k1) {
      for (std::size_t k2 = k1 + 1; k2 < g_.edges().size(); ++k2) {
        if (shared_real_channels(k1, k2).empty()) continue;
        auto ab = edge_ix(k1);
        auto ba = edge_ix(k2);
        const auto i1 = ab;
        ab.insert(ab.end(), ba.begin(), ba.end());
        ba.insert(ba.end(), i1.begin(), i1.end());
        row({{1, var(VarKind::kCommOrder, ab)}, {1, var(VarKind::kCommOrder, ba)}}, Sense::kEq,
            1, "channel_order");
      }
    }
  }

  void add_memory_rows() {
    const std::int64_t big = m_.big_m_;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      for (std::size_t j : m_.eligible_[i]) {
        std::vector<Term> terms = {{1, var(VarKind::kMemBefore, {op_id(i)})},
                                   {-big, var(VarKind::kAssign, {op_id(i), mach_id(j)})}};
        for (std::size_t o = 0; o < g_.size(); ++o) {
          if (g_.op(o).weight_mem == 0 || !eligible(o, j)) continue;
          auto x = var(VarKind::kAssign, {op_id(o), mach_id(j)});
          if (o == i) {
            terms[1].coef -= g_.op(o).weight_mem;
          } else {
            terms.push_back({-g_.op(o).weight_mem, x});
          }
        }
        // m_minus(i) >= sum_o W_o x(o,j) whenever x(i,j) = 1.
        row(std::move(terms), Sense::kGe, -big, "memory_init");
      }
    }
    for (std::size_t a = 0; a < g_.size(); ++a) {
      for (std::size_t b = 0; b < g_.size(); ++b) {
        if (a == b || !share_machine(a, b)) continue;
        const std::size_t u = var(VarKind::kImmediate, {op_id(a), op_id(b)});
        const std::size_t before = var(VarKind::kMemBefore, {op_id(b)});
        const std::size_t after = var(VarKind::kMemAfter, {op_id(a)});
        row({{1, before}, {-1, after}, {-big, u}}, Sense::kGe, -big, "memory_link_lo");
        row({{1, before}, {-1, after}, {big, u}}, Sense::kLe, big, "memory_link_hi");
      }
    }
    for (std::size_t i = 0; i < g_.size(); ++i) {
      row({{1, var(VarKind::kMemAfter, {op_id(i)})}, {-1, var(VarKind::kMemBefore, {op_id(i)})}},
          Sense::kEq, g_.op(i).activation_delta, "memory_delta");
    }

    for (std::size_t a = 0; a < g_.size(); ++a) {
      for (std::size_t b = 0; b < g_.size(); ++b) {
        if (a == b || !share_machine(a, b)) continue;
        const std::size_t u = var(VarKind::kImmediate, {op_id(a), op_id(b)});
        row({{1, u}, {-1, var(VarKind::kOrder, {op_id(a), op_id(b)})}}, Sense::kLe, 0, "u_link");
        std::set<std::size_t> machines(m_.eligible_[a].begin(), m_.eligible_[a].end());
        machines.insert(m_.eligible_[b].begin(), m_.eligible_[b].end());
        for (std::size_t j : machines) {
          auto xa = maybe(VarKind::kAssign, {op_id(a), mach_id(j)});
          auto xb = maybe(VarKind::kAssign, {op_id(b), mach_id(j)});
          std::vector<Term> fwd = {{1, u}};
          std::vector<Term> bwd = {{1, u}};
          if (xa) {
            fwd.push_back({1, *xa});
            bwd.push_back({-1, *xa});
          }
          if (xb) {
            fwd.push_back({-1, *xb});
            bwd.push_back({1, *xb});
          }
          if (xa) row(std::move(fwd), Sense::kLe, 1, "u_link");
          if (xb) row(std::move(bwd), Sense::kLe, 1, "u_link");
        }
      }
    }
    for (std::size_t i = 0; i < g_.size(); ++i) {
      std::vector<Term> succ;
      std::vector<Term> pred;
      for (std::size_t o = 0; o < g_.size(); ++o) {
        if (o == i || !share_machine(i, o)) continue;
        succ.push_back({1, var(VarKind::kImmediate, {op_id(i), op_id(o)})});
        pred.push_back({1, var(VarKind::kImmediate, {op_id(o), op_id(i)})});
      }
      if (!succ.empty()) row(std::move(succ), Sense::kLe, 1, "u_link");
      std::vector<Term> chain = pred;
      if (!pred.empty()) row(std::move(pred), Sense::kLe, 1, "u_link");
      for (std::size_t j : m_.eligible_[i]) {
        const std::size_t first = var(VarKind::kFirst, {op_id(i), mach_id(j)});
        row({{1, first}, {-1, var(VarKind::kAssign, {op_id(i), mach_id(j)})}}, Sense::kLe, 0,
            "first_link");
        chain.push_back({1, first});
      }
      row(std::move(chain), Sense::kEq, 1, "first_link");
    }
    for (std::size_t j = 0; j < h_.size(); ++j) {
      std::vector<Term> firsts;
      for (std::size_t i = 0; i < g_.size(); ++i) {
        if (eligible(i, j)) firsts.push_back({1, var(VarKind::kFirst, {op_id(i), mach_id(j)})});
      }
      if (!firsts.empty()) row(std::move(firsts), Sense::kLe, 1, "first_link");
    }

    if (!m_.options_.memory_capped || m_.loading_) return;
    for (std::size_t i = 0; i < g_.size(); ++i) {
      for (std::size_t j : m_.eligible_[i]) {
        const std::size_t x = var(VarKind::kAssign, {op_id(i), mach_id(j)});
        for (VarKind level : {VarKind::kMemBefore, VarKind::kMemAfter}) {
          row({{1, var(level, {op_id(i)})}, {big, x}}, Sense::kLe, m_.capacity(j) + big,
              "memory_cap");
        }
      }
    }
  }

  void add_loading_rows() {
    const std::int64_t big = m_.big_m_;
    const LoadingData& ld = *m_.loading_;
    auto v = [&](VarKind kind, std::size_t i, std::size_t w) {
      return var(kind, {op_id(i), ld.weights[w].id});
    };
    for (std::size_t i = 0; i < g_.size(); ++i) {
      for (std::size_t j : m_.eligible_[i]) {
        const std::size_t first = var(VarKind::kFirst, {op_id(i), mach_id(j)});
        for (std::size_t w = 0; w < ld.weights.size(); ++w) {
          const std::size_t pre = var(VarKind::kPreload, {ld.weights[w].id, mach_id(j)});
          const std::size_t act = v(VarKind::kActiveBefore, i, w);
          row({{1, act}, {-1, pre}, {1, first}}, Sense::kLe, 1, "ext_init_hi");
          row({{1, pre}, {-1, act}, {1, first}}, Sense::kLe, 1, "ext_init_lo");
        }
      }
    }
    for (std::size_t i = 0; i < g_.size(); ++i) {
      for (std::size_t w : ld.uses[i]) {
        row({{1, v(VarKind::kLoad, i, w)}, {1, v(VarKind::kActiveBefore, i, w)}}, Sense::kGe, 1,
            "ext_presence");
      }
    }
    for (std::size_t i = 0; i < g_.size(); ++i) {
      for (std::size_t w = 0; w < ld.weights.size(); ++w) {
        row({{1, v(VarKind::kActiveAfter, i, w)},
             {-1, v(VarKind::kActiveBefore, i, w)},
             {-1, v(VarKind::kLoad, i, w)},
             {1, v(VarKind::kUnload, i, w)}},
            Sense::kEq, 0, "ext_activation");
        row({{1, v(VarKind::kUnload, i, w)},
             {-1, v(VarKind::kActiveBefore, i, w)},
             {-1, v(VarKind::kLoad, i, w)}},
            Sense::kLe, 0, "ext_unload_guard");
        row({{1, v(VarKind::kLoad, i, w)}, {1, v(VarKind::kActiveBefore, i, w)}}, Sense::kLe, 1,
            "ext_load_guard");
      }
    }
    for (std::size_t a = 0; a < g_.size(); ++a) {
      for (std::size_t b = 0; b < g_.size(); ++b) {
        if (a == b || !share_machine(a, b)) continue;
        const std::size_t u = var(VarKind::kImmediate, {op_id(a), op_id(b)});
        for (std::size_t w = 0; w < ld.weights.size(); ++w) {
          const std::size_t after = v(VarKind::kActiveAfter, a, w);
          const std::size_t before = v(VarKind::kActiveBefore, b, w);
          row({{1, before}, {-1, after}, {1, u}}, Sense::kLe, 1, "ext_propagate_hi");
          row({{1, after}, {-1, before}, {1, u}}, Sense::kLe, 1, "ext_propagate_lo");
        }
      }
    }
    if (!m_.options_.memory_capped) return;
    // Activation level plus every asset resident while the op runs.
    for (std::size_t i = 0; i < g_.size(); ++i) {
      for (std::size_t j : m_.eligible_[i]) {
        const std::size_t x = var(VarKind::kAssign, {op_id(i), mach_id(j)});
        for (VarKind level : {VarKind::kMemBefore, VarKind::kMemAfter}) {
          std::vector<Term> terms = {{1, var(level, {op_id(i)})}, {big, x}};
          for (std::size_t w = 0; w < ld.weights.size(); ++w) {
            const Mem size = ld.weights[w].size;
            if (size == 0) continue;
            terms.push_back({size, v(VarKind::kActiveBefore, i, w)});
            terms.push_back({size, v(VarKind::kLoad, i, w)});
          }
          row(std::move(terms), Sense::kLe, m_.capacity(j) + big, "ext_memory_cap");
        }
      }
    }
  }

  const ComputationGraph& g_;
  const HardwareCluster& h_;
  ScheduleModel m_;
};

ScheduleModel build_model(const ComputationGraph& g, const HardwareCluster& h,
                          const ModelOptions& opts) {
  return ModelBuilder(g, h, opts, std::nullopt).build();
}

ScheduleModel set_primal_bound(ScheduleModel model, Time bound) {
  if (bound <= 0) throw Error(ErrorKind::kInvalidValue, "primal bound must be positive");
  if (model.primal_bound_ && *model.primal_bound_ <= bound) return model;
  model.primal_bound_ = bound;
  model.rows_.push_back(
      LinearConstraint{{{1, model.objective_}}, Sense::kLe, bound, "primal_bound"});
  return model;
}

ScheduleModel extend_model(const ScheduleModel& model, const std::vector<WeightAsset>& weights,
                           const std::map<std::string, std::vector<std::string>>& use) {
  const ComputationGraph& g = model.graph();
  LoadingData ld;
  ld.weights = weights;
  std::sort(ld.weights.begin(), ld.weights.end(),
            [](const WeightAsset& a, const WeightAsset& b) { return a.id < b.id; });
  for (std::size_t w = 0; w < ld.weights.size(); ++w) {
    const WeightAsset& asset = ld.weights[w];
    if (w > 0 && ld.weights[w - 1].id == asset.id) {
      throw Error(ErrorKind::kDuplicateId, "duplicate weight id '" + asset.id + "'", {asset.id});
    }
    if (asset.size < 0 || asset.load_cost < 0 || asset.unload_cost < 0) {
      throw Error(ErrorKind::kInvalidValue, "weight '" + asset.id + "' has a negative value",
                  {asset.id});
    }
  }
  ld.uses.assign(g.size(), {});
  for (const auto& [op, refs] : use) {
    auto i = g.find(op);
    if (!i) throw Error(ErrorKind::kDanglingRef, "use relation names unknown op '" + op + "'", {op});
    for (const std::string& ref : refs) {
      auto it = std::lower_bound(ld.weights.begin(), ld.weights.end(), ref,
                                 [](const WeightAsset& a, const std::string& id) { return a.id < id; });
      if (it == ld.weights.end() || it->id != ref) {
        throw Error(ErrorKind::kDanglingRef,
                    "operation '" + op + "' references unknown weight '" + ref + "'", {op, ref});
      }
      ld.uses[*i].push_back(static_cast<std::size_t>(it - ld.weights.begin()));
    }
    std::sort(ld.uses[*i].begin(), ld.uses[*i].end());
    ld.uses[*i].erase(std::unique(ld.uses[*i].begin(), ld.uses[*i].end()), ld.uses[*i].end());
  }
  ScheduleModel out = ModelBuilder(g, model.cluster(), model.options(), std::move(ld)).build();
  if (model.primal_bound()) out = set_primal_bound(std::move(out), *model.primal_bound());
  return out;
}

ScheduleModel extend_model(const ScheduleModel& model) {
  std::map<std::string, std::vector<std::string>> use;
  for (const Operation& op : model.graph().operations()) {
    if (!op.weight_refs.empty()) use[op.id] = op.weight_refs;
  }
  return extend_model(model, model.graph().weights(), use);
}

}  // namespace opplan
