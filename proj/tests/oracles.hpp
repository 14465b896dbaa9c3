#pragma once

// Brute-force reference implementations used only by the tests. They share no code
// with the library beyond its plain data types.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

#include "david/spda.hpp"

namespace oracle {

using david::kUnmatched;
using david::SpdaInstance;

// Position of slot s in i's list, or the list length if absent (worse than all listed).
inline std::size_t rank_of(const SpdaInstance& inst, int i, int s) {
  const auto& e = inst.rols[static_cast<std::size_t>(i)].entries;
  return static_cast<std::size_t>(std::find(e.begin(), e.end(), s) - e.begin());
}

inline bool strictly_better(double a, int ia, double b, int ib) { return a > b || (a == b && ia < ib); }

// Every individually rational, capacity-feasible assignment.
inline std::vector<std::vector<int>> feasible_matchings(const SpdaInstance& inst) {
  const int n = inst.num_students();
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(n), kUnmatched);
  std::vector<int> load(static_cast<std::size_t>(inst.num_slots()), 0);
  std::function<void(int)> go = [&](int i) {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    cur[static_cast<std::size_t>(i)] = kUnmatched;
    go(i + 1);
    for (int s : inst.rols[static_cast<std::size_t>(i)].entries) {
      if (load[static_cast<std::size_t>(s)] >= inst.capacities[static_cast<std::size_t>(s)]) continue;
      ++load[static_cast<std::size_t>(s)];
      cur[static_cast<std::size_t>(i)] = s;
      go(i + 1);
      --load[static_cast<std::size_t>(s)];
    }
    cur[static_cast<std::size_t>(i)] = kUnmatched;
  };
  go(0);
  return out;
}

// Pairwise definition: i prefers s to her match and s has a free seat or holds
// someone i outranks.
inline bool is_stable(const SpdaInstance& inst, const std::vector<int>& m) {
  const int n = inst.num_students();
  for (int i = 0; i < n; ++i) {
    const std::size_t mine = m[static_cast<std::size_t>(i)] == kUnmatched
                                 ? inst.rols[static_cast<std::size_t>(i)].entries.size()
                                 : rank_of(inst, i, m[static_cast<std::size_t>(i)]);
    for (int s : inst.rols[static_cast<std::size_t>(i)].entries) {
      if (rank_of(inst, i, s) >= mine) break;
      int load = 0;
      bool outranks = false;
      for (int j = 0; j < n; ++j) {
        if (m[static_cast<std::size_t>(j)] != s) continue;
        ++load;
        if (strictly_better(inst.priorities.at(s, i), i, inst.priorities.at(s, j), j)) outranks = true;
      }
      if (load < inst.capacities[static_cast<std::size_t>(s)] || outranks) return false;
    }
  }
  return true;
}

inline std::vector<std::vector<int>> stable_matchings(const SpdaInstance& inst) {
  std::vector<std::vector<int>> out;
  for (auto& m : feasible_matchings(inst)) {
    if (is_stable(inst, m)) out.push_back(std::move(m));
  }
  return out;
}

// The stable matching every student weakly prefers to all other stable matchings.
inline std::vector<int> student_optimal(const SpdaInstance& inst) {
  const auto all = stable_matchings(inst);
  for (const auto& m : all) {
    bool best = true;
    for (const auto& o : all) {
      for (int i = 0; i < inst.num_students() && best; ++i) {
        auto r = [&](const std::vector<int>& x) {
          const int s = x[static_cast<std::size_t>(i)];
          return s == kUnmatched ? inst.rols[static_cast<std::size_t>(i)].entries.size() : rank_of(inst, i, s);
        };
        if (r(o) < r(m)) best = false;
      }
    }
    if (best) return m;
  }
  return {};
}

// Best positive-utility option among the reachable ones; regular entry costs nothing,
// disclosure costs gamma. Returns {college, via_disclosure}, college -1 for none.
struct Choice {
  int college = -1;
  bool via_disclosure = false;
};

inline Choice best_option(const std::vector<double>& v, const std::vector<bool>& regular,
                          const std::vector<bool>& disclosure, double gamma) {
  Choice best;
  double net = 0.0;
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (regular[c] && v[c] > net) {
      best = {static_cast<int>(c), false};
      net = v[c];
    } else if (!regular[c] && disclosure[c] && v[c] - gamma > net) {
      best = {static_cast<int>(c), true};
      net = v[c] - gamma;
    }
  }
  return best;
}

}  // namespace oracle
