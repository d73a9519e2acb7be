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

// Chronological depth-first search for instances too large to enumerate.
//
// Machines take decisions in time order. At its decision time a machine
// either starts one of the operations whose inputs have arrived, or waits
// for the next event (an operation finishing or a transfer arriving). Every
// semi-active schedule is reachable this way. Branches are pruned against a
// target makespan with head/tail and one-machine bounds, and the tree is
// explored with a discrepancy budget that grows until a plan is found. Each
// success lowers the target by one tick. Several dispatch rules order the
// candidates; each probe depth is tried under every rule.

#include <algorithm>
#include <set>

#include "bounds.hpp"
#include "replay.hpp"
#include "search.hpp"

namespace opplan::detail {

namespace {

struct MachineState {
  Time free = 0;
  bool waiting = false;
  Time wait_since = 0;
  std::vector<std::size_t> seq;
  Mem stat = 0;      // static weight of ops placed or pinned here
  Mem prefix = 0;    // activation change so far
  Mem min_pre = 0;   // min prefix before an op
  Mem min_post = 0;  // min prefix after an op
  Mem max_pa = 0;    // max over positions of level offset plus resident assets
  std::vector<char> resident;
  std::vector<char> preload;
  std::vector<char> ever_unloaded;
  Mem assets = 0;

  Mem base() const { return std::max({stat, stat - min_pre, -min_post}); }
};

struct Interval {
  Time start;
  Time end;
  std::size_t edge;
};

struct Placement {
  Time start = 0;
  Time end = 0;
  std::vector<std::size_t> loads;
  std::vector<std::size_t> preloads;
  std::vector<std::size_t> evictions;
  Time eviction_cost = 0;
  Mem assets_during = 0;
};

class ListSearch {
 public:
  ListSearch(const Problem& p, SearchControl& ctl, Incumbent& inc, const ListSearchOptions& opts)
      : p_(p), ctl_(ctl), inc_(inc), opts_(opts) {
    key_.resize(p.n);
    for (std::size_t i = 0; i < p.n; ++i) key_[i] = p.tail[i] + p.dur[i];
    pinned_.assign(p.n, kNone);
    for (std::size_t i = 0; i < p.n; ++i) {
      if (p.eligible[i].size() == 1) pinned_[i] = p.eligible[i][0];
    }
    exact_space_ = !p.ext;
    for (std::size_t e = 0; e < p.ne; ++e) {
      for (std::size_t a : p.eligible[p.esrc[e]]) {
        for (std::size_t b : p.eligible[p.edst[e]]) {
          if (a != b && p.ecomm[e] > 0) exact_space_ = false;
        }
      }
    }
  }

  SearchOutcome run() {
    for (int k = 0; k < kRules; ++k) rules_[k] = (opts_.variant + k) % kRules;
    // One greedy dive per rule; the best seeds the improvement loop.
    for (int r : rules_) {
      if (ctl_.done(inc_) || ctl_.out_of_budget) break;
      rule_ = r;
      probe(kInfinity, 0, probe_budget(0));
    }
    Time best = inc_.value();
    if (best >= kInfinity) {
      for (int d = 1;; ++d) {
        bool limited = false;
        for (int r : rules_) {
          rule_ = r;
          const Probe res = probe(kInfinity, d, probe_budget(d));
          if (res.found) break;
          limited = limited || res.limited;
          if (ctl_.out_of_budget) return SearchOutcome::kBudget;
          if (!res.limited) return exact_space_ ? SearchOutcome::kExhausted : SearchOutcome::kBudget;
        }
        if (inc_.value() < kInfinity) break;
        if (!limited) return SearchOutcome::kBudget;
      }
      best = inc_.value();
    }
    for (;;) {
      if (ctl_.done(inc_)) return SearchOutcome::kStopped;
      if (ctl_.out_of_budget) return SearchOutcome::kBudget;
      const Time target = best - 1;
      bool improved = false;
      for (int d = 0; d <= kMaxDiscrepancy && !improved; ++d) {
        for (int r : rules_) {
          rule_ = r;
          const Probe res = probe(target, d, probe_budget(d));
          if (res.found) {
            improved = true;
            break;
          }
          if (ctl_.out_of_budget) return SearchOutcome::kBudget;
          if (!res.limited) {
            return exact_space_ ? SearchOutcome::kExhausted : SearchOutcome::kBudget;
          }
        }
      }
      if (!improved) return SearchOutcome::kBudget;
      best = inc_.value();
    }
  }

 private:
  static constexpr int kMaxDiscrepancy = 6;
  static constexpr int kRules = 3;

  struct Probe {
    bool found = false;
    bool limited = false;
  };

  std::uint64_t probe_budget(int d) const { return 4000 * static_cast<std::uint64_t>(d + 1) + 40 * p_.n; }

  void reset() {
    machines_.assign(p_.m, MachineState{});
    for (MachineState& ms : machines_) {
      ms.resident.assign(p_.nw, 0);
      ms.preload.assign(p_.nw, 0);
      ms.ever_unloaded.assign(p_.nw, 0);
    }
    for (std::size_t i = 0; i < p_.n; ++i) {
      if (pinned_[i] != kNone) machines_[pinned_[i]].stat += p_.weight[i];
    }
    plan_.reset(p_);
    scheduled_.assign(p_.n, 0);
    origin_.assign(p_.n, kInfinity);
    missing_preds_.assign(p_.n, 0);
    for (std::size_t i = 0; i < p_.n; ++i) missing_preds_[i] = p_.in_edges[i].size();
    left_ = p_.n;
    now_ = 0;
    ends_.clear();
    channels_.assign(p_.nch, {});
  }

  Probe probe(Time target, int discrepancies, std::uint64_t budget) {
    reset();
    target_ = target;
    if (inc_.value() < kInfinity) target_ = std::min(target_, inc_.value() - 1);
    probe_nodes_ = 0;
    probe_budget_ = budget;
    limited_ = false;
    const bool found = dfs(discrepancies);
    return Probe{found, limited_};
  }

  // --- time and events -----------------------------------------------------

  Time next_event_after(Time t) const {
    auto it = ends_.upper_bound(t);
    return it == ends_.end() ? kInfinity : *it;
  }

  // Earliest time machine j could next act.
  Time decision_time(std::size_t j) const {
    const MachineState& ms = machines_[j];
    if (!ms.waiting) return std::max(ms.free, now_);
    Time t = next_event_after(ms.wait_since);
    for (std::size_t i = 0; i < p_.n; ++i) {
      if (scheduled_[i] || missing_preds_[i] || !p_.can_run[i][j]) continue;
      const Time a = arrival(i, j, false);
      if (a > ms.wait_since) t = std::min(t, a);
    }
    return t >= kInfinity ? kInfinity : std::max(t, now_);
  }

  // First-fit slot of length len at or after t on channel c.
  Time first_fit(std::size_t c, Time t, Time len) const {
    for (const Interval& iv : channels_[c]) {
      if (iv.end <= t) continue;
      if (iv.start >= t + len) break;
      t = iv.end;
    }
    return t;
  }

  void insert_interval(std::size_t c, Interval iv) {
    auto& v = channels_[c];
    auto it = std::upper_bound(v.begin(), v.end(), iv.start,
                               [](Time s, const Interval& x) { return s < x.start; });
    v.insert(it, iv);
  }

  void erase_interval(std::size_t c, std::size_t edge) {
    auto& v = channels_[c];
    v.erase(std::find_if(v.begin(), v.end(), [&](const Interval& x) { return x.edge == edge; }));
  }

  // Data arrival of every input of op i on machine j. With reserve, the
  // transfers are booked on their channels. kInfinity if j is unreachable.
  Time arrival(std::size_t i, std::size_t j, bool reserve) const {
    auto* self = const_cast<ListSearch*>(this);
    Time t = 0;
    std::vector<std::pair<std::size_t, std::size_t>> booked;
    for (std::size_t e : p_.in_edges[i]) {
      const std::size_t a = p_.esrc[e];
      const std::size_t ja = plan_.machine[a];
      const std::ptrdiff_t c = p_.channel[ja][j];
      if (c < 0) {
        t = kInfinity;
        break;
      }
      const Time len = p_.comm_time(e, ja, j);
      Time s = plan_.end[a];
      if (len > 0) {
        s = first_fit(static_cast<std::size_t>(c), s, len);
        self->insert_interval(static_cast<std::size_t>(c), Interval{s, s + len, e});
        booked.emplace_back(static_cast<std::size_t>(c), e);
      }
      if (reserve) {
        self->plan_.comm_start[e] = s;
        self->plan_.comm_end[e] = s + len;
      }
      t = std::max(t, s + len);
    }
    if (!reserve || t >= kInfinity) {
      for (auto [c, e] : booked) self->erase_interval(c, e);
    }
    return t;
  }

  // --- memory --------------------------------------------------------------

  Mem size_of(const std::vector<std::size_t>& ws) const {
    Mem s = 0;
    for (std::size_t w : ws) s += p_.wsize[w];
    return s;
  }

  // Works out loads, retroactive preloads and evictions for op i on j.
  bool place_memory(std::size_t i, std::size_t j, Placement& pl) const {
    const MachineState& ms = machines_[j];
    Mem stat = ms.stat + (pinned_[i] == kNone ? p_.weight[i] : 0);
    const Mem min_pre = std::min(ms.min_pre, ms.prefix);
    const Mem min_post = std::min(ms.min_post, ms.prefix + p_.delta[i]);
    const Mem base = std::max({stat, stat - min_pre, -min_post});
    const Mem offset = std::max(ms.prefix, ms.prefix + p_.delta[i]);
    Mem max_pa = ms.max_pa;
    Mem assets = ms.assets;
    if (p_.ext) {
      std::vector<char> resident = ms.resident;
      for (std::size_t w : p_.uses[i]) {
        if (resident[w]) continue;
        if (!ms.ever_unloaded[w] && base + max_pa + p_.wsize[w] <= p_.cap[j]) {
          pl.preloads.push_back(w);
          max_pa += p_.wsize[w];
          assets += p_.wsize[w];
        } else {
          pl.loads.push_back(w);
        }
        resident[w] = 1;
      }
      Mem during = assets + size_of(pl.loads);
      if (base + std::max(max_pa, offset + during) > p_.cap[j]) {
        // Evict weights this op does not need, unused-soon and large first.
        std::vector<std::size_t> spare;
        for (std::size_t w = 0; w < p_.nw; ++w) {
          if (resident[w] && !std::binary_search(p_.uses[i].begin(), p_.uses[i].end(), w)) {
            spare.push_back(w);
          }
        }
        std::sort(spare.begin(), spare.end(), [&](std::size_t a, std::size_t b) {
          return std::make_pair(p_.wsize[a], b) > std::make_pair(p_.wsize[b], a);
        });
        for (std::size_t w : spare) {
          if (base + std::max(max_pa, offset + during) <= p_.cap[j]) break;
          if (std::find(pl.preloads.begin(), pl.preloads.end(), w) != pl.preloads.end()) continue;
          pl.evictions.push_back(w);
          pl.eviction_cost += p_.wunload[w];
          during -= p_.wsize[w];
        }
        if (!pl.evictions.empty() && ms.seq.empty()) return false;
        if (!pl.evictions.empty()) {
          // The previous op absorbs the unloads; its outputs must not have
          // been consumed yet.
          const std::size_t prev = ms.seq.back();
          for (std::size_t e : p_.out_edges[prev]) {
            if (scheduled_[p_.edst[e]]) return false;
          }
        }
      }
      pl.assets_during = during;
      return base + std::max(max_pa, offset + during) <= p_.cap[j];
    }
    return base + std::max(max_pa, offset) <= p_.cap[j];
  }

  // --- bounds --------------------------------------------------------------

  bool within_target() {
    if (target_ >= kInfinity) return true;
    std::vector<Time> avail(p_.m);
    Time min_avail = kInfinity;
    for (std::size_t j = 0; j < p_.m; ++j) {
      avail[j] = std::max(machines_[j].free, now_);
      min_avail = std::min(min_avail, avail[j]);
    }
    est_.assign(p_.n, 0);
    Time remaining = 0;
    Time capacity = 0;
    for (std::size_t j = 0; j < p_.m; ++j) capacity += std::max<Time>(0, target_ - avail[j]);
    for (std::size_t i : p_.topo) {
      if (scheduled_[i]) continue;
      Time e = min_avail;
      if (pinned_[i] != kNone) e = avail[pinned_[i]];
      for (std::size_t k : p_.in_edges[i]) {
        const std::size_t a = p_.esrc[k];
        if (scheduled_[a]) {
          const std::size_t ja = plan_.machine[a];
          Time comm = p_.can_run[i][ja] ? 0 : p_.min_comm[k];
          e = std::max(e, plan_.end[a] + comm);
        } else {
          e = std::max(e, est_[a] + p_.dur[a] + p_.min_comm[k]);
        }
      }
      est_[i] = e;
      if (e + p_.dur[i] + p_.tail[i] > target_) return false;
      remaining += p_.dur[i];
    }
    if (remaining > capacity) return false;
    jobs_.assign(p_.m, {});
    for (std::size_t i = 0; i < p_.n; ++i) {
      if (!scheduled_[i] && pinned_[i] != kNone) {
        jobs_[pinned_[i]].push_back(Job{est_[i], p_.dur[i], p_.tail[i]});
      }
    }
    for (std::size_t j = 0; j < p_.m; ++j) {
      if (jobs_[j].size() < 2) continue;
      if (jackson_bound(jobs_[j], avail[j]) > target_) return false;
    }
    return true;
  }

  // --- search --------------------------------------------------------------

  struct Undo {
    std::size_t machine;
    MachineState saved;
    Time now;
    std::size_t op = kNone;
    std::size_t prev = kNone;
    Time prev_end = 0;
    std::vector<std::size_t> prev_unloads;
  };

  bool start_op(std::size_t i, std::size_t j, Undo& u) {
    Placement pl;
    if (!place_memory(i, j, pl)) return false;
    MachineState& ms = machines_[j];
    u.op = i;
    if (!pl.evictions.empty()) {
      const std::size_t prev = ms.seq.back();
      u.prev = prev;
      u.prev_end = plan_.end[prev];
      ends_.erase(ends_.find(plan_.end[prev]));
      plan_.end[prev] += pl.eviction_cost;
      ends_.insert(plan_.end[prev]);
      for (std::size_t w : pl.evictions) {
        plan_.unload[prev][w] = 1;
        u.prev_unloads.push_back(w);
        ms.resident[w] = 0;
        ms.ever_unloaded[w] = 1;
        ms.assets -= p_.wsize[w];
      }
      ms.free = plan_.end[prev];
    }
    const Time ready = arrival(i, j, true);
    Time start = std::max({now_, ms.free, ready});
    Time len = p_.dur[i];
    for (std::size_t w : pl.loads) {
      plan_.load[i][w] = 1;
      len += p_.wload[w];
    }
    for (std::size_t w : pl.preloads) {
      ms.preload[w] = 1;
      ms.resident[w] = 1;
      ms.assets += p_.wsize[w];
      ms.max_pa += p_.wsize[w];
    }
    for (std::size_t w : pl.loads) {
      ms.resident[w] = 1;
      ms.assets += p_.wsize[w];
    }
    if (pinned_[i] == kNone) ms.stat += p_.weight[i];
    const Mem offset = std::max(ms.prefix, ms.prefix + p_.delta[i]);
    ms.max_pa = std::max(ms.max_pa, offset + (p_.ext ? pl.assets_during : 0));
    ms.min_pre = std::min(ms.min_pre, ms.prefix);
    ms.prefix += p_.delta[i];
    ms.min_post = std::min(ms.min_post, ms.prefix);
    ms.seq.push_back(i);
    ms.free = start + len;
    ms.waiting = false;

    plan_.machine[i] = j;
    plan_.start[i] = start;
    plan_.end[i] = start + len;
    origin_[i] = std::min(start, age(i));
    scheduled_[i] = 1;
    --left_;
    for (std::size_t e : p_.out_edges[i]) --missing_preds_[p_.edst[e]];
    ends_.insert(plan_.end[i]);
    return true;
  }

  void undo_op(Undo& u) {
    const std::size_t i = u.op;
    const std::size_t j = u.machine;
    ends_.erase(ends_.find(plan_.end[i]));
    for (std::size_t e : p_.out_edges[i]) ++missing_preds_[p_.edst[e]];
    ++left_;
    scheduled_[i] = 0;
    for (std::size_t e : p_.in_edges[i]) {
      const std::size_t ja = plan_.machine[p_.esrc[e]];
      const std::ptrdiff_t c = p_.channel[ja][j];
      if (p_.comm_time(e, ja, j) > 0) erase_interval(static_cast<std::size_t>(c), e);
    }
    for (std::size_t w = 0; w < p_.nw; ++w) plan_.load[i][w] = 0;
    plan_.machine[i] = kNone;
    if (u.prev != kNone) {
      ends_.erase(ends_.find(plan_.end[u.prev]));
      plan_.end[u.prev] = u.prev_end;
      ends_.insert(u.prev_end);
      for (std::size_t w : u.prev_unloads) plan_.unload[u.prev][w] = 0;
    }
    machines_[j] = std::move(u.saved);
    now_ = u.now;
  }

  void finish_plan() {
    for (std::size_t j = 0; j < p_.m; ++j) {
      plan_.seq[j] = machines_[j].seq;
      plan_.preload[j] = machines_[j].preload;
    }
    for (std::size_t e = 0; e < p_.ne; ++e) {
      const std::size_t ja = plan_.machine[p_.esrc[e]];
      const std::size_t jb = plan_.machine[p_.edst[e]];
      if (p_.comm_time(e, ja, jb) == 0) {
        plan_.comm_start[e] = plan_.comm_end[e] = plan_.end[p_.esrc[e]];
      }
    }
    plan_.makespan = 0;
    for (std::size_t i = 0; i < p_.n; ++i) plan_.makespan = std::max(plan_.makespan, plan_.end[i]);
  }

  // Returns true when a plan within the target was found.
  bool dfs(int disc) {
    if (!ctl_.tick(inc_)) {
      limited_ = true;
      return false;
    }
    if (++probe_nodes_ > probe_budget_) {
      limited_ = true;
      return false;
    }
    if (left_ == 0) {
      finish_plan();
      if (plan_.makespan > target_ && target_ < kInfinity) return false;
      return inc_.offer(plan_) || plan_.makespan <= target_;
    }
    if (!within_target()) return false;

    std::size_t j = kNone;
    Time t = kInfinity;
    for (std::size_t k = 0; k < p_.m; ++k) {
      const Time d = decision_time(k);
      if (d < t) {
        t = d;
        j = k;
      }
    }
    if (j == kNone) return false;  // every machine is stuck

    const Time saved_now = now_;
    now_ = t;
    std::vector<std::size_t> cands;
    for (std::size_t i = 0; i < p_.n; ++i) {
      if (scheduled_[i] || missing_preds_[i] || !p_.can_run[i][j]) continue;
      if (arrival(i, j, false) <= t) cands.push_back(i);
    }
    order(cands, j);

    // Waiting is always allowed; a machine with nothing left to wait for
    // simply drops out of the decision order.
    int rank = 0;
    for (std::size_t i : cands) {
      const int cost = rank;
      if (cost > disc) {
        limited_ = true;
        break;
      }
      Undo u{j, machines_[j], t, kNone, kNone, 0, {}};
      if (start_op(i, j, u)) {
        ++rank;
        if (dfs(disc - cost)) return true;
        undo_op(u);
        if (ctl_.out_of_budget || probe_nodes_ > probe_budget_) {
          now_ = saved_now;
          return false;
        }
      }
    }
    {
      const int cost = cands.empty() ? 0 : 1;
      if (cost > disc) {
        limited_ = true;
      } else {
        MachineState saved = machines_[j];
        machines_[j].waiting = true;
        machines_[j].wait_since = t;
        if (dfs(disc - cost)) return true;
        machines_[j] = std::move(saved);
      }
    }
    now_ = saved_now;
    return false;
  }

  // Earliest start among the ancestors of i (all of them are scheduled).
  Time age(std::size_t i) const {
    Time a = kInfinity;
    for (std::size_t e : p_.in_edges[i]) a = std::min(a, origin_[p_.esrc[e]]);
    return a;
  }

  void order(std::vector<std::size_t>& cands, std::size_t j) const {
    const MachineState& ms = machines_[j];
    auto rank = [&](std::size_t i) {
      switch (rule_) {
        case 1: {
          // Oldest chain first; sinks and memory growth yield to the rest.
          const Time sink = p_.out_edges[i].empty() ? 1 : 0;
          const Time grows = p_.delta[i] > 0 ? 1 : 0;
          return std::make_tuple(sink, grows, age(i), -key_[i], i);
        }
        case 2: {
          // Release memory first when the machine is filling up.
          Time primary = -key_[i];
          Time secondary = p_.delta[i];
          if (ms.prefix > 0) std::swap(primary, secondary);
          return std::make_tuple(primary, secondary, Time{0}, Time{0}, i);
        }
        default:
          return std::make_tuple(-key_[i], Time{0}, Time{0}, Time{0}, i);
      }
    };
    std::sort(cands.begin(), cands.end(),
              [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
  }

  const Problem& p_;
  SearchControl& ctl_;
  Incumbent& inc_;
  ListSearchOptions opts_;
  std::vector<Time> key_;
  std::vector<std::size_t> pinned_;
  bool exact_space_ = true;

  std::vector<MachineState> machines_;
  Plan plan_;
  std::vector<char> scheduled_;
  std::vector<Time> origin_;
  int rule_ = 0;
  int rules_[kRules] = {0, 1, 2};
  std::vector<std::size_t> missing_preds_;
  std::size_t left_ = 0;
  Time now_ = 0;
  std::multiset<Time> ends_;
  std::vector<std::vector<Interval>> channels_;
  Time target_ = kInfinity;
  std::uint64_t probe_nodes_ = 0;
  std::uint64_t probe_budget_ = 0;
  bool limited_ = false;
  std::vector<Time> est_;
  std::vector<std::vector<Job>> jobs_;
};

}  // namespace

SearchOutcome list_search(const Problem& p, SearchControl& ctl, Incumbent& inc,
                          const ListSearchOptions& opts) {
  return ListSearch(p, ctl, inc, opts).run();
}

}  // namespace opplan::detail
