#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "david/econ_model.hpp"
#include "david/error.hpp"

namespace david {

using SlotId = int;

inline constexpr int kUnmatched = -1;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A student's submitted list; slots not listed are never proposed to.
struct RankOrderedList {
  StudentId owner = 0;
  std::vector<SlotId> entries;
};

// Real-valued priority per (slot, student), higher is better. Equal scores are
// resolved in favour of the lower student id.
class PriorityProfile {
 public:
  PriorityProfile() = default;
  PriorityProfile(int num_slots, int num_students)
      : slots_(num_slots),
        students_(num_students),
        score_(static_cast<std::size_t>(num_slots) * static_cast<std::size_t>(num_students), 0.0) {}

  int num_slots() const { return slots_; }
  int num_students() const { return students_; }

  double at(SlotId s, StudentId i) const { return score_[index(s, i)]; }
  void set(SlotId s, StudentId i, double value) { score_[index(s, i)] = value; }

  // True if student a is ranked strictly above student b at slot s.
  bool prefers(SlotId s, StudentId a, StudentId b) const {
    const double x = at(s, a);
    const double y = at(s, b);
    return x > y || (x == y && a < b);
  }

 private:
  std::size_t index(SlotId s, StudentId i) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(students_) +
           static_cast<std::size_t>(i);
  }

  int slots_ = 0;
  int students_ = 0;
  std::vector<double> score_;
};

// assignment[i] is a slot id or kUnmatched.
struct Matching {
  std::vector<SlotId> assignment;

  std::vector<std::vector<StudentId>> assigned_by_slot(int num_slots) const {
    std::vector<std::vector<StudentId>> out(static_cast<std::size_t>(num_slots));
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] != kUnmatched) {
        out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<StudentId>(i));
      }
    }
    return out;
  }

  bool operator==(const Matching&) const = default;
};

// Per-slot admission threshold. value is -inf for an undersubscribed slot and +inf
// for a zero-capacity slot. holder is the student sitting at the threshold (-1 when
// none), which lets callers reproduce the engine's id tie-break; a threshold built
// from bare reals has no holder and equality is then reported as a tie.
struct Cutoffs {
  std::vector<double> value;
  std::vector<StudentId> holder;

  Cutoffs() = default;
  explicit Cutoffs(std::vector<double> values)
      : value(std::move(values)), holder(value.size(), kUnmatched) {}

  std::size_t size() const { return value.size(); }
};

enum class Access : unsigned char { no, yes, tie };

// Would a student with this score at this slot clear the threshold?
inline Access clears(double score, StudentId who, double cutoff, StudentId holder) {
  if (score > cutoff) return Access::yes;
  if (score < cutoff) return Access::no;
  if (holder == kUnmatched || who == kUnmatched) return Access::tie;
  return who <= holder ? Access::yes : Access::no;
}

struct SpdaInstance {
  std::vector<RankOrderedList> rols;  // rols[i].owner == i
  PriorityProfile priorities;
  std::vector<int> capacities;

  int num_slots() const { return static_cast<int>(capacities.size()); }
  int num_students() const { return static_cast<int>(rols.size()); }
};

struct SpdaResult {
  Matching matching;
  // Every student who proposed to each slot at some round, in proposal order.
  std::vector<std::vector<StudentId>> proposers;
  int rounds = 0;
  bool ties_broken = false;
};

enum class TiePolicy { by_student_id, reject };

inline void validate(const SpdaInstance& inst) {
  const int slots = inst.num_slots();
  if (inst.priorities.num_slots() != slots || inst.priorities.num_students() != inst.num_students()) {
    throw InvalidInstance("priority profile shape does not match lists and capacities");
  }
  for (int cap : inst.capacities) {
    if (cap < 0) throw InvalidInstance("capacities must be non-negative");
  }
  std::vector<char> seen(static_cast<std::size_t>(slots), 0);
  for (std::size_t i = 0; i < inst.rols.size(); ++i) {
    const auto& rol = inst.rols[i];
    if (rol.owner != static_cast<StudentId>(i)) {
      throw InvalidInstance("list " + std::to_string(i) + " has owner " + std::to_string(rol.owner));
    }
    std::fill(seen.begin(), seen.end(), 0);
    for (SlotId s : rol.entries) {
      if (s < 0 || s >= slots) {
        throw InvalidInstance("student " + std::to_string(i) + " lists unknown slot " + std::to_string(s));
      }
      if (seen[static_cast<std::size_t>(s)]) {
        throw InvalidInstance("student " + std::to_string(i) + " lists slot " + std::to_string(s) + " twice");
      }
      seen[static_cast<std::size_t>(s)] = 1;
    }
  }
}

// Returns true if two students listing the same slot share a score there.
inline bool has_priority_ties(const SpdaInstance& inst, int* tied_slot = nullptr) {
  std::vector<std::vector<double>> scores(static_cast<std::size_t>(inst.num_slots()));
  for (const auto& rol : inst.rols) {
    for (SlotId s : rol.entries) {
      scores[static_cast<std::size_t>(s)].push_back(inst.priorities.at(s, rol.owner));
    }
  }
  for (std::size_t s = 0; s < scores.size(); ++s) {
    auto& v = scores[s];
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
      if (tied_slot) *tied_slot = static_cast<int>(s);
      return true;
    }
  }
  return false;
}

// Student-proposing deferred acceptance, one batch of proposals per round: every
// unheld student applies to her next listed slot, then each slot keeps the best
// `capacity` students among those it held and the new applicants.
inline SpdaResult run_spda(const SpdaInstance& inst, TiePolicy ties = TiePolicy::by_student_id) {
  validate(inst);
  SpdaResult out;
  int tied_slot = -1;
  out.ties_broken = has_priority_ties(inst, &tied_slot);
  if (out.ties_broken && ties == TiePolicy::reject) {
    throw NonStrictPriorities("two students share a priority score at slot " + std::to_string(tied_slot));
  }

  const auto n = static_cast<std::size_t>(inst.num_students());
  const auto m = static_cast<std::size_t>(inst.num_slots());
  out.matching.assignment.assign(n, kUnmatched);
  out.proposers.assign(m, {});
  std::vector<std::size_t> next(n, 0);
  std::vector<std::vector<StudentId>> held(m);
  std::vector<std::vector<StudentId>> incoming(m);
  std::vector<SlotId> touched;

  while (true) {
    touched.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& list = inst.rols[i].entries;
      if (out.matching.assignment[i] != kUnmatched || next[i] >= list.size()) continue;
      const SlotId s = list[next[i]++];
      if (incoming[static_cast<std::size_t>(s)].empty()) touched.push_back(s);
      incoming[static_cast<std::size_t>(s)].push_back(static_cast<StudentId>(i));
      out.proposers[static_cast<std::size_t>(s)].push_back(static_cast<StudentId>(i));
    }
    if (touched.empty()) break;
    ++out.rounds;

    for (SlotId s : touched) {
      auto& pool = held[static_cast<std::size_t>(s)];
      auto& fresh = incoming[static_cast<std::size_t>(s)];
      pool.insert(pool.end(), fresh.begin(), fresh.end());
      fresh.clear();
      std::sort(pool.begin(), pool.end(),
                [&](StudentId a, StudentId b) { return inst.priorities.prefers(s, a, b); });
      const auto cap = static_cast<std::size_t>(inst.capacities[static_cast<std::size_t>(s)]);
      for (std::size_t k = 0; k < pool.size(); ++k) {
        out.matching.assignment[static_cast<std::size_t>(pool[k])] = k < cap ? s : kUnmatched;
      }
      if (pool.size() > cap) pool.resize(cap);
    }
  }
  return out;
}

inline SpdaResult run_spda(const std::vector<RankOrderedList>& rols, const PriorityProfile& priorities,
                           const std::vector<int>& capacities,
                           TiePolicy ties = TiePolicy::by_student_id) {
  return run_spda(SpdaInstance{rols, priorities, capacities}, ties);
}

// Minimum admitted priority per slot; -inf when a seat is vacant, +inf when the slot
// has no seats at all.
inline Cutoffs extract_cutoffs(const Matching& matching, const PriorityProfile& priorities,
                               const std::vector<int>& capacities) {
  const int m = static_cast<int>(capacities.size());
  Cutoffs out(std::vector<double>(static_cast<std::size_t>(m), -kInf));
  const auto by_slot = matching.assigned_by_slot(m);
  for (int s = 0; s < m; ++s) {
    const auto& admitted = by_slot[static_cast<std::size_t>(s)];
    const int cap = capacities[static_cast<std::size_t>(s)];
    if (cap == 0) {
      out.value[static_cast<std::size_t>(s)] = kInf;
      continue;
    }
    if (static_cast<int>(admitted.size()) < cap) continue;
    StudentId worst = admitted.front();
    for (StudentId i : admitted) {
      if (priorities.prefers(s, worst, i)) worst = i;
    }
    out.value[static_cast<std::size_t>(s)] = priorities.at(s, worst);
    out.holder[static_cast<std::size_t>(s)] = worst;
  }
  return out;
}

// Thresholds a single student faces holding everyone else's reports fixed: the
// capacity-th best priority among the *other* students who proposed to each slot.
// This equals extract_cutoffs everywhere except at the student's own slot, where it
// is the best rejected applicant (or -inf if nobody else was waiting).
inline Cutoffs personal_cutoffs(const SpdaInstance& inst, const SpdaResult& run, StudentId who) {
  const int m = inst.num_slots();
  Cutoffs out(std::vector<double>(static_cast<std::size_t>(m), -kInf));
  std::vector<StudentId> others;
  for (int s = 0; s < m; ++s) {
    const auto cap = static_cast<std::size_t>(inst.capacities[static_cast<std::size_t>(s)]);
    if (cap == 0) {
      out.value[static_cast<std::size_t>(s)] = kInf;
      continue;
    }
    others.clear();
    for (StudentId i : run.proposers[static_cast<std::size_t>(s)]) {
      if (i != who) others.push_back(i);
    }
    if (others.size() < cap) continue;
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(cap - 1), others.end(),
                     [&](StudentId a, StudentId b) { return inst.priorities.prefers(s, a, b); });
    const StudentId marginal = others[cap - 1];
    out.value[static_cast<std::size_t>(s)] = inst.priorities.at(s, marginal);
    out.holder[static_cast<std::size_t>(s)] = marginal;
  }
  return out;
}

struct BlockingPair {
  StudentId student = 0;
  SlotId slot = 0;
  bool operator==(const BlockingPair&) const = default;
};

// Every (student, slot) where the student lists the slot above her assignment (or is
// unmatched) and the slot either has a vacant seat or admits someone she outranks.
inline std::vector<BlockingPair> find_blocking_pairs(const Matching& matching,
                                                     const std::vector<RankOrderedList>& rols,
                                                     const PriorityProfile& priorities,
                                                     const std::vector<int>& capacities) {
  const int m = static_cast<int>(capacities.size());
  const auto by_slot = matching.assigned_by_slot(m);
  const Cutoffs cut = extract_cutoffs(matching, priorities, capacities);
  std::vector<BlockingPair> out;
  for (const auto& rol : rols) {
    const SlotId mine = matching.assignment[static_cast<std::size_t>(rol.owner)];
    for (SlotId s : rol.entries) {
      if (s == mine) break;
      const auto si = static_cast<std::size_t>(s);
      const int cap = capacities[si];
      if (cap == 0) continue;
      const bool vacant = static_cast<int>(by_slot[si].size()) < cap;
      if (vacant || priorities.prefers(s, rol.owner, cut.holder[si])) {
        out.push_back({rol.owner, s});
      }
    }
  }
  return out;
}

inline std::vector<BlockingPair> find_blocking_pairs(const SpdaInstance& inst, const Matching& matching) {
  return find_blocking_pairs(matching, inst.rols, inst.priorities, inst.capacities);
}

}  // namespace david
