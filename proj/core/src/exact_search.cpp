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

// Exhaustive branch-and-bound over the disjunctive decisions: machine
// assignment in topological order, then each machine's sequence, then each
// channel's transfer order, then (with weight loading) each machine's
// load/unload pattern. Leaves are timed semi-actively, which is dominant for
// a regular objective once all orders are fixed.

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "bounds.hpp"
#include "replay.hpp"
#include "search.hpp"

namespace opplan::detail {

namespace {

struct Pattern {
  std::vector<char> preload;
  std::vector<std::uint32_t> load;  // per sequence position
  std::vector<std::uint32_t> unload;
  std::vector<Time> extra;
};

bool dominates(const Pattern& a, const Pattern& b) {
  for (std::size_t k = 0; k < a.extra.size(); ++k) {
    if (a.extra[k] > b.extra[k]) return false;
  }
  return true;
}

class PatternEnumerator {
 public:
  PatternEnumerator(const Problem& p, const std::vector<std::size_t>& seq, std::size_t j,
                    std::size_t limit)
      : p_(p), seq_(seq), j_(j), limit_(limit) {
    Mem stat = 0;
    std::vector<Mem> deltas;
    for (std::size_t i : seq) {
      stat += p.weight[i];
      deltas.push_back(p.delta[i]);
    }
    Mem level = base_level(stat, deltas);
    for (std::size_t i : seq) {
      peak_.push_back(std::max(level, level + p.delta[i]));
      level += p.delta[i];
      std::uint32_t need = 0;
      for (std::size_t w : p.uses[i]) need |= 1U << w;
      need_.push_back(need);
    }
    full_ = p.nw >= 32 ? ~0U : ((1U << p.nw) - 1);
  }

  std::vector<Pattern> run(bool& truncated) {
    for (std::uint32_t pre = 0;; pre = (pre - full_) & full_) {
      current_.preload.assign(p_.nw, 0);
      for (std::size_t w = 0; w < p_.nw; ++w) current_.preload[w] = (pre >> w) & 1U;
      current_.load.assign(seq_.size(), 0);
      current_.unload.assign(seq_.size(), 0);
      current_.extra.assign(seq_.size(), 0);
      if (fits_at_start(pre)) rec(0, pre);
      if (pre == full_) break;
    }
    truncated = truncated_;
    return std::move(front_);
  }

 private:
  Mem size_of(std::uint32_t mask) const {
    Mem s = 0;
    for (std::size_t w = 0; w < p_.nw; ++w) {
      if ((mask >> w) & 1U) s += p_.wsize[w];
    }
    return s;
  }
  Time cost_of(std::uint32_t mask, const std::vector<Time>& cost) const {
    Time t = 0;
    for (std::size_t w = 0; w < p_.nw; ++w) {
      if ((mask >> w) & 1U) t += cost[w];
    }
    return t;
  }
  bool fits_at_start(std::uint32_t pre) const {
    return seq_.empty() ? size_of(pre) <= p_.cap[j_] : true;
  }

  void rec(std::size_t k, std::uint32_t resident) {
    if (truncated_) return;
    if (k == seq_.size()) {
      add(current_);
      return;
    }
    const std::uint32_t absent = full_ & ~resident;
    const std::uint32_t must = need_[k] & absent;
    const std::uint32_t optional = absent & ~must;
    for (std::uint32_t extra = 0;; extra = (extra - optional) & optional) {
      const std::uint32_t load = must | extra;
      const std::uint32_t present = resident | load;
      if (peak_[k] + size_of(present) <= p_.cap[j_]) {
        for (std::uint32_t un = 0;; un = (un - present) & present) {
          current_.load[k] = load;
          current_.unload[k] = un;
          current_.extra[k] = cost_of(load, p_.wload) + cost_of(un, p_.wunload);
          rec(k + 1, present & ~un);
          if (un == present) break;
        }
      }
      if (extra == optional) break;
    }
  }

  void add(const Pattern& pat) {
    for (const Pattern& f : front_) {
      if (dominates(f, pat)) return;
    }
    std::erase_if(front_, [&](const Pattern& f) { return dominates(pat, f); });
    front_.push_back(pat);
    if (front_.size() > limit_) truncated_ = true;
  }

  const Problem& p_;
  const std::vector<std::size_t>& seq_;
  std::size_t j_;
  std::size_t limit_;
  std::vector<Mem> peak_;
  std::vector<std::uint32_t> need_;
  std::uint32_t full_ = 0;
  Pattern current_;
  std::vector<Pattern> front_;
  bool truncated_ = false;
};

class ExactSearch {
 public:
  ExactSearch(const Problem& p, SearchControl& ctl, Incumbent& inc)
      : p_(p), ctl_(ctl), inc_(inc) {
    machine_.assign(p.n, kNone);
    seq_.assign(p.m, {});
    in_seq_.assign(p.n, 0);
    count_.assign(p.m, 0);
    static_.assign(p.m, 0);
    chan_seq_.assign(p.nch, {});
    in_chan_.assign(p.ne, 0);
    pattern_.assign(p.m, nullptr);
    extra_.assign(p.n, 0);
  }

  SearchOutcome run() {
    const bool finished = dfs();
    if (ctl_.done(inc_)) return SearchOutcome::kStopped;
    if (!finished || incomplete_) return SearchOutcome::kBudget;
    return SearchOutcome::kExhausted;
  }

 private:
  using Action = std::size_t;
  enum class Phase { kAssign, kSequence, kChannel, kPattern, kLeaf };

  Phase phase(std::size_t& which) const {
    if (assigned_ < p_.n) {
      which = p_.topo[assigned_];
      return Phase::kAssign;
    }
    for (std::size_t j = 0; j < p_.m; ++j) {
      if (seq_[j].size() < count_[j]) {
        which = j;
        return Phase::kSequence;
      }
    }
    for (std::size_t c = 0; c < p_.nch; ++c) {
      if (p_.channel_self[c]) continue;
      if (chan_seq_[c].size() < channel_edges(c).size()) {
        which = c;
        return Phase::kChannel;
      }
    }
    if (p_.ext) {
      for (std::size_t j = 0; j < p_.m; ++j) {
        if (!pattern_[j]) {
          which = j;
          return Phase::kPattern;
        }
      }
    }
    return Phase::kLeaf;
  }

  // Transfers with positive duration routed over channel c.
  std::vector<std::size_t> channel_edges(std::size_t c) const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < p_.ne; ++e) {
      const std::size_t a = machine_[p_.esrc[e]];
      const std::size_t b = machine_[p_.edst[e]];
      if (a == kNone || b == kNone || a == b) continue;
      if (static_cast<std::size_t>(p_.channel[a][b]) == c && p_.ecomm[e] > 0) out.push_back(e);
    }
    return out;
  }

  Time occ(std::size_t i) const { return p_.dur[i] + extra_[i]; }

  // Lower bound for the current partial decisions; kInfinity when the
  // decisions already contradict each other.
  Time bound() const {
    const std::size_t total = p_.n + p_.ne;
    std::vector<std::vector<std::size_t>> succ(total);
    std::vector<std::size_t> indeg(total, 0);
    auto arc = [&](std::size_t a, std::size_t b) {
      succ[a].push_back(b);
      ++indeg[b];
    };
    std::vector<Time> len(total, 0);
    for (std::size_t i = 0; i < p_.n; ++i) len[i] = occ(i);
    for (std::size_t e = 0; e < p_.ne; ++e) {
      const std::size_t a = machine_[p_.esrc[e]];
      const std::size_t b = machine_[p_.edst[e]];
      len[p_.n + e] = (a != kNone && b != kNone) ? p_.comm_time(e, a, b) : p_.min_comm[e];
      arc(p_.esrc[e], p_.n + e);
      arc(p_.n + e, p_.edst[e]);
    }
    for (std::size_t j = 0; j < p_.m; ++j) {
      const auto& s = seq_[j];
      for (std::size_t k = 1; k < s.size(); ++k) arc(s[k - 1], s[k]);
      if (!s.empty() && s.size() < count_[j]) {
        for (std::size_t i = 0; i < p_.n; ++i) {
          if (machine_[i] == j && !in_seq_[i]) arc(s.back(), i);
        }
      }
    }
    for (std::size_t c = 0; c < p_.nch; ++c) {
      const auto& s = chan_seq_[c];
      for (std::size_t k = 1; k < s.size(); ++k) arc(p_.n + s[k - 1], p_.n + s[k]);
      if (!s.empty()) {
        for (std::size_t e : channel_edges(c)) {
          if (!in_chan_[e]) arc(p_.n + s.back(), p_.n + e);
        }
      }
    }
    std::vector<Time> head(total, 0);
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < total; ++v) {
      if (indeg[v] == 0) stack.push_back(v);
    }
    std::size_t seen = 0;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      ++seen;
      for (std::size_t w : succ[v]) {
        head[w] = std::max(head[w], head[v] + len[v]);
        if (--indeg[w] == 0) stack.push_back(w);
      }
    }
    if (seen != total) return kInfinity;

    Time lb = 0;
    for (std::size_t i = 0; i < p_.n; ++i) lb = std::max(lb, head[i] + occ(i) + p_.tail[i]);
    for (std::size_t j = 0; j < p_.m; ++j) {
      if (seq_[j].size() == count_[j]) continue;
      std::vector<Job> jobs;
      for (std::size_t i = 0; i < p_.n; ++i) {
        if (machine_[i] == j && !in_seq_[i]) jobs.push_back(Job{head[i], occ(i), p_.tail[i]});
      }
      const Time avail = seq_[j].empty() ? 0 : head[seq_[j].back()] + occ(seq_[j].back());
      lb = std::max(lb, jackson_bound(std::move(jobs), avail));
    }
    return lb;
  }

  bool prefix_memory_ok(std::size_t j) const {
    std::vector<Mem> deltas;
    for (std::size_t i : seq_[j]) deltas.push_back(p_.delta[i]);
    Mem level = base_level(static_[j], deltas);
    for (std::size_t i : seq_[j]) {
      if (std::max(level, level + p_.delta[i]) > p_.cap[j]) return false;
      level += p_.delta[i];
    }
    return true;
  }

  // Applies action `a` of the given phase; returns false if it is invalid.
  bool apply(Phase ph, std::size_t which, Action a) {
    switch (ph) {
      case Phase::kAssign: {
        const std::size_t i = which;
        const std::size_t j = a;
        for (std::size_t e : p_.in_edges[i]) {
          if (p_.channel[machine_[p_.esrc[e]]][j] < 0) return false;
        }
        if (static_[j] + p_.weight[i] > p_.cap[j]) return false;
        machine_[i] = j;
        ++count_[j];
        static_[j] += p_.weight[i];
        ++assigned_;
        return true;
      }
      case Phase::kSequence: {
        const std::size_t j = which;
        const std::size_t i = a;
        for (std::size_t e : p_.in_edges[i]) {
          const std::size_t pred = p_.esrc[e];
          if (machine_[pred] == j && !in_seq_[pred]) return false;
        }
        seq_[j].push_back(i);
        in_seq_[i] = 1;
        if (!prefix_memory_ok(j)) {
          undo(ph, which, a);
          return false;
        }
        return true;
      }
      case Phase::kChannel:
        chan_seq_[which].push_back(a);
        in_chan_[a] = 1;
        return true;
      case Phase::kPattern: {
        const Pattern& pat = patterns_[which][a];
        pattern_[which] = &pat;
        for (std::size_t k = 0; k < seq_[which].size(); ++k) extra_[seq_[which][k]] = pat.extra[k];
        return true;
      }
      case Phase::kLeaf:
        break;
    }
    return false;
  }

  void undo(Phase ph, std::size_t which, Action a) {
    switch (ph) {
      case Phase::kAssign: {
        const std::size_t i = which;
        machine_[i] = kNone;
        --count_[a];
        static_[a] -= p_.weight[i];
        --assigned_;
        break;
      }
      case Phase::kSequence:
        seq_[which].pop_back();
        in_seq_[a] = 0;
        break;
      case Phase::kChannel:
        chan_seq_[which].pop_back();
        in_chan_[a] = 0;
        break;
      case Phase::kPattern:
        pattern_[which] = nullptr;
        for (std::size_t i : seq_[which]) extra_[i] = 0;
        break;
      case Phase::kLeaf:
        break;
    }
  }

  std::vector<Action> actions(Phase ph, std::size_t which) {
    std::vector<Action> out;
    switch (ph) {
      case Phase::kAssign:
        out = p_.eligible[which];
        break;
      case Phase::kSequence:
        for (std::size_t i = 0; i < p_.n; ++i) {
          if (machine_[i] == which && !in_seq_[i]) out.push_back(i);
        }
        break;
      case Phase::kChannel:
        for (std::size_t e : channel_edges(which)) {
          if (!in_chan_[e]) out.push_back(e);
        }
        break;
      case Phase::kPattern: {
        bool truncated = false;
        patterns_[which] = PatternEnumerator(p_, seq_[which], which, 4096).run(truncated);
        incomplete_ = incomplete_ || truncated;
        out.resize(patterns_[which].size());
        std::iota(out.begin(), out.end(), 0);
        break;
      }
      case Phase::kLeaf:
        break;
    }
    return out;
  }

  void leaf() {
    Plan plan;
    plan.reset(p_);
    plan.machine = machine_;
    plan.seq = seq_;
    if (p_.ext) {
      for (std::size_t j = 0; j < p_.m; ++j) {
        const Pattern& pat = *pattern_[j];
        plan.preload[j] = pat.preload;
        for (std::size_t k = 0; k < seq_[j].size(); ++k) {
          const std::size_t i = seq_[j][k];
          for (std::size_t w = 0; w < p_.nw; ++w) {
            plan.load[i][w] = static_cast<char>((pat.load[k] >> w) & 1U);
            plan.unload[i][w] = static_cast<char>((pat.unload[k] >> w) & 1U);
          }
        }
      }
    }
    if (!time_plan(p_, plan, chan_seq_)) return;
    if (!memory_ok(p_, plan)) return;
    inc_.offer(plan);
  }

  bool dfs() {
    if (!ctl_.tick(inc_)) return false;
    if (bound() >= inc_.value()) return true;
    std::size_t which = 0;
    const Phase ph = phase(which);
    if (ph == Phase::kLeaf) {
      leaf();
      return true;
    }
    std::vector<Action> acts = actions(ph, which);
    if (ctl_.selection == NodeSelection::kBestBound && acts.size() > 1) {
      std::vector<std::pair<Time, Action>> scored;
      for (Action a : acts) {
        if (!apply(ph, which, a)) continue;
        scored.emplace_back(bound(), a);
        undo(ph, which, a);
      }
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      acts.clear();
      for (const auto& [lb, a] : scored) {
        if (lb < inc_.value()) acts.push_back(a);
      }
    }
    // Deeper levels only touch other machines' pattern lists, so the
    // pointers into patterns_[which] stay valid for the whole loop.
    for (Action a : acts) {
      if (!apply(ph, which, a)) continue;
      const bool keep_going = dfs();
      undo(ph, which, a);
      if (!keep_going) return false;
    }
    return true;
  }

  const Problem& p_;
  SearchControl& ctl_;
  Incumbent& inc_;
  std::vector<std::size_t> machine_;
  std::vector<std::vector<std::size_t>> seq_;
  std::vector<char> in_seq_;
  std::vector<std::size_t> count_;
  std::vector<Mem> static_;
  std::size_t assigned_ = 0;
  std::vector<std::vector<std::size_t>> chan_seq_;
  std::vector<char> in_chan_;
  std::vector<const Pattern*> pattern_;
  std::vector<std::vector<Pattern>> patterns_ = std::vector<std::vector<Pattern>>(p_.m);
  std::vector<Time> extra_;
  bool incomplete_ = false;
};

}  // namespace

SearchOutcome exact_search(const Problem& p, SearchControl& ctl, Incumbent& inc) {
  return ExactSearch(p, ctl, inc).run();
}

}  // namespace opplan::detail
