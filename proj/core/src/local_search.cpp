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

// Tabu search over machine sequences, seeded with an incumbent.
//
// Each iteration times the current sequences semi-actively, extracts one
// critical path and tries the classic block moves on it: swapping the two
// operations at either end of a critical block, shifting an operation to the
// front or back of its block, and moving a critical operation to another
// eligible machine. Infeasible neighbours (cycles or memory overflow) are
// discarded. Plateaus are broken by total completion time; stagnation
// triggers a seeded perturbation of the best sequences.

#include <algorithm>
#include <map>
#include <random>
#include <tuple>

#include "replay.hpp"
#include "search.hpp"

namespace opplan::detail {

namespace {

struct Score {
  Time makespan = kInfinity;
  Time total = kInfinity;

  friend bool operator<(const Score& a, const Score& b) {
    return std::tie(a.makespan, a.total) < std::tie(b.makespan, b.total);
  }
};

struct Move {
  std::size_t op;
  std::size_t to_machine;
  std::size_t to_pos;  // position in the target sequence after removal
};

class LocalSearch {
 public:
  LocalSearch(const Problem& p, SearchControl& ctl, Incumbent& inc, const Plan& seed)
      : p_(p), ctl_(ctl), inc_(inc), cur_(seed), rng_(0x5eed5eedULL) {
    channel_order_from(cur_);
    evaluate(cur_);
  }

  SearchOutcome run() {
    Plan best = cur_;
    Score best_score = score(cur_);
    std::size_t stagnant = 0;
    std::uint64_t iter = 0;
    const std::size_t patience = 200 + 4 * p_.n;
    while (true) {
      if (!ctl_.tick(inc_)) break;
      ++iter;
      const std::vector<Move> moves = neighbourhood(cur_);
      Plan chosen;
      Score chosen_score;
      bool found = false;
      Move chosen_back{};
      for (const Move& mv : moves) {
        Plan trial = cur_;
        if (!apply(trial, mv)) continue;
        const Score s = score(trial);
        const bool tabu = is_tabu(mv, iter);
        if (tabu && !(s.makespan < best_score.makespan)) continue;
        if (!found || s < chosen_score) {
          chosen = std::move(trial);
          chosen_score = s;
          chosen_back = reverse(cur_, mv);
          found = true;
        }
      }
      if (!found) {
        perturb(best, iter);
        stagnant = 0;
        continue;
      }
      make_tabu(chosen_back, iter);
      cur_ = std::move(chosen);
      if (chosen_score < best_score) {
        if (chosen_score.makespan < best_score.makespan) stagnant = 0;
        best = cur_;
        best_score = chosen_score;
        inc_.offer(best);
        channel_order_from(cur_);
      } else if (++stagnant > patience) {
        perturb(best, iter);
        stagnant = 0;
      }
    }
    return ctl_.done(inc_) ? SearchOutcome::kStopped : SearchOutcome::kBudget;
  }

 private:
  Score score(const Plan& plan) const {
    Score s;
    s.makespan = plan.makespan;
    s.total = 0;
    for (std::size_t i = 0; i < p_.n; ++i) s.total += plan.end[i];
    return s;
  }

  void channel_order_from(const Plan& plan) {
    chan_.assign(p_.nch, {});
    for (std::size_t e = 0; e < p_.ne; ++e) {
      const std::size_t a = plan.machine[p_.esrc[e]];
      const std::size_t b = plan.machine[p_.edst[e]];
      if (p_.comm_time(e, a, b) > 0) chan_[static_cast<std::size_t>(p_.channel[a][b])].push_back(e);
    }
    for (auto& order : chan_) {
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::tie(plan.comm_start[x], x) < std::tie(plan.comm_start[y], y);
      });
    }
  }

  // Channel sequences adjusted to the plan's current machine choice.
  std::vector<std::vector<std::size_t>> channels_for(const Plan& plan) const {
    std::vector<std::vector<std::size_t>> out(p_.nch);
    std::vector<char> listed(p_.ne, 0);
    for (std::size_t c = 0; c < p_.nch; ++c) {
      for (std::size_t e : chan_[c]) {
        const std::size_t a = plan.machine[p_.esrc[e]];
        const std::size_t b = plan.machine[p_.edst[e]];
        if (p_.comm_time(e, a, b) > 0 && static_cast<std::size_t>(p_.channel[a][b]) == c) {
          out[c].push_back(e);
          listed[e] = 1;
        }
      }
    }
    for (std::size_t e = 0; e < p_.ne; ++e) {
      const std::size_t a = plan.machine[p_.esrc[e]];
      const std::size_t b = plan.machine[p_.edst[e]];
      if (!listed[e] && p_.comm_time(e, a, b) > 0) {
        out[static_cast<std::size_t>(p_.channel[a][b])].push_back(e);
      }
    }
    return out;
  }

  bool evaluate(Plan& plan) const {
    if (!time_plan(p_, plan, channels_for(plan))) return false;
    for (std::size_t e = 0; e < p_.ne; ++e) {
      const std::size_t a = plan.machine[p_.esrc[e]];
      const std::size_t b = plan.machine[p_.edst[e]];
      if (p_.comm_time(e, a, b) == 0) plan.comm_start[e] = plan.comm_end[e] = plan.end[p_.esrc[e]];
    }
    return true;
  }

  bool apply(Plan& plan, const Move& mv) const {
    const std::size_t i = mv.op;
    const std::size_t from = plan.machine[i];
    auto& src = plan.seq[from];
    src.erase(std::find(src.begin(), src.end(), i));
    auto& dst = plan.seq[mv.to_machine];
    if (mv.to_pos > dst.size()) return false;
    dst.insert(dst.begin() + static_cast<std::ptrdiff_t>(mv.to_pos), i);
    plan.machine[i] = mv.to_machine;
    for (std::size_t e : p_.in_edges[i]) {
      if (p_.channel[plan.machine[p_.esrc[e]]][mv.to_machine] < 0) return false;
    }
    for (std::size_t e : p_.out_edges[i]) {
      if (p_.channel[mv.to_machine][plan.machine[p_.edst[e]]] < 0) return false;
    }
    if (!memory_ok_machine(p_, plan, mv.to_machine)) return false;
    if (from != mv.to_machine && !memory_ok_machine(p_, plan, from)) return false;
    return evaluate(plan);
  }

  // One critical path, ops in execution order.
  std::vector<std::size_t> critical_path(const Plan& plan) const {
    std::size_t cur = kNone;
    for (std::size_t i = 0; i < p_.n; ++i) {
      if (plan.end[i] == plan.makespan && (cur == kNone || i < cur)) cur = i;
    }
    std::vector<std::size_t> pos(p_.n, 0);
    for (std::size_t j = 0; j < p_.m; ++j) {
      for (std::size_t k = 0; k < plan.seq[j].size(); ++k) pos[plan.seq[j][k]] = k;
    }
    std::vector<std::size_t> path;
    while (cur != kNone) {
      path.push_back(cur);
      const Time s = plan.start[cur];
      std::size_t next = kNone;
      const auto& seq = plan.seq[plan.machine[cur]];
      if (pos[cur] > 0 && plan.end[seq[pos[cur] - 1]] == s) next = seq[pos[cur] - 1];
      if (next == kNone) {
        for (std::size_t e : p_.in_edges[cur]) {
          if (plan.comm_end[e] == s) {
            next = p_.esrc[e];
            break;
          }
        }
      }
      if (s == 0) break;
      cur = next;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  std::vector<Move> neighbourhood(const Plan& plan) const {
    const std::vector<std::size_t> path = critical_path(plan);
    std::vector<std::size_t> pos(p_.n, 0);
    for (std::size_t j = 0; j < p_.m; ++j) {
      for (std::size_t k = 0; k < plan.seq[j].size(); ++k) pos[plan.seq[j][k]] = k;
    }
    std::vector<Move> moves;
    auto add = [&](std::size_t op, std::size_t j, std::size_t to) {
      for (const Move& m : moves) {
        if (m.op == op && m.to_machine == j && m.to_pos == to) return;
      }
      moves.push_back(Move{op, j, to});
    };
    std::size_t b = 0;
    while (b < path.size()) {
      std::size_t e = b;
      while (e + 1 < path.size() && plan.machine[path[e + 1]] == plan.machine[path[b]] &&
             pos[path[e + 1]] == pos[path[e]] + 1) {
        ++e;
      }
      const std::size_t j = plan.machine[path[b]];
      if (e > b) {
        const std::size_t first = pos[path[b]];
        const std::size_t last = pos[path[e]];
        add(path[b], j, first + 1);      // swap the front pair
        add(path[e], j, last - 1);       // swap the back pair
        for (std::size_t k = b + 1; k < e; ++k) {
          add(path[k], j, first);        // to the block front
          add(path[k], j, last);         // to the block back
        }
        add(path[b], j, last);
        add(path[e], j, first);
      }
      for (std::size_t k = b; k <= e; ++k) {
        const std::size_t op = path[k];
        if (p_.eligible[op].size() < 2) continue;
        for (std::size_t j2 : p_.eligible[op]) {
          if (j2 == j) continue;
          const auto& seq = plan.seq[j2];
          std::size_t at = 0;
          while (at < seq.size() && plan.start[seq[at]] <= plan.start[op]) ++at;
          add(op, j2, at);
          if (at > 0) add(op, j2, at - 1);
        }
      }
      b = e + 1;
    }
    return moves;
  }

  // The move that would put mv.op back where it is now.
  Move reverse(const Plan& plan, const Move& mv) const {
    const std::size_t j = plan.machine[mv.op];
    const auto& seq = plan.seq[j];
    const auto at = static_cast<std::size_t>(std::find(seq.begin(), seq.end(), mv.op) - seq.begin());
    return Move{mv.op, j, at};
  }

  // A move is tabu when it would restore an order undone recently.
  bool is_tabu(const Move& mv, std::uint64_t iter) const {
    auto it = tabu_.find(key(mv));
    return it != tabu_.end() && it->second > iter;
  }

  void make_tabu(const Move& mv, std::uint64_t iter) {
    const std::uint64_t tenure = 8 + (iter * 7 + mv.op) % 8;
    tabu_[key(mv)] = iter + tenure;
  }

  std::uint64_t key(const Move& mv) const {
    return static_cast<std::uint64_t>(mv.op) * (p_.m + 1) * (p_.n + 2) +
           static_cast<std::uint64_t>(mv.to_machine) * (p_.n + 2) + mv.to_pos;
  }

  // Random feasible adjacent swaps applied to the best sequences.
  void perturb(const Plan& best, std::uint64_t iter) {
    cur_ = best;
    channel_order_from(cur_);
    const std::size_t swaps = 2 + (iter / 7) % 6;
    std::size_t done = 0;
    for (std::size_t attempt = 0; attempt < 50 * swaps && done < swaps; ++attempt) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(0, p_.m - 1)(rng_);
      if (cur_.seq[j].size() < 2) continue;
      const std::size_t k =
          std::uniform_int_distribution<std::size_t>(0, cur_.seq[j].size() - 2)(rng_);
      Plan trial = cur_;
      if (apply(trial, Move{cur_.seq[j][k], j, k + 1})) {
        cur_ = std::move(trial);
        ++done;
      }
    }
    tabu_.clear();
  }

  const Problem& p_;
  SearchControl& ctl_;
  Incumbent& inc_;
  Plan cur_;
  std::vector<std::vector<std::size_t>> chan_;
  std::map<std::uint64_t, std::uint64_t> tabu_;
  std::mt19937_64 rng_;
};

}  // namespace

SearchOutcome local_search(const Problem& p, SearchControl& ctl, Incumbent& inc) {
  const std::optional<Plan> seed = inc.plan();
  if (!seed || p.ext || p.n < 2) return SearchOutcome::kBudget;
  return LocalSearch(p, ctl, inc, *seed).run();
}

}  // namespace opplan::detail
