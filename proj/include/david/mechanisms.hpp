#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "david/econ_model.hpp"
#include "david/error.hpp"
#include "david/spda.hpp"

namespace david {

enum class Mechanism { da, david_q, david_u };

inline const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::da: return "da";
    case Mechanism::david_q: return "david-q";
    case Mechanism::david_u: return "david-u";
  }
  return "?";
}

enum class Track : unsigned char { regular, disclosure };

struct SubCollege {
  CollegeId college = 0;
  Track track = Track::regular;
  bool operator==(const SubCollege&) const = default;
};

// DAVID-Q list over sub-colleges. Canonical form: c^vid never appears without c^r,
// and always somewhere after it.
struct SubRol {
  StudentId owner = 0;
  std::vector<SubCollege> entries;
};

// DAVID-U disclosure messages.
struct TargetSet {
  StudentId owner = 0;
  std::vector<CollegeId> targets;

  bool contains(CollegeId c) const { return std::find(targets.begin(), targets.end(), c) != targets.end(); }
};

// Sub-college slot layout: regular seat of college c is slot c, disclosure seat is
// slot C + c.
struct SubCollegeSlots {
  int num_colleges = 0;
  std::vector<int> regular;
  std::vector<int> disclosure;

  SlotId slot(SubCollege sc) const {
    return sc.track == Track::regular ? sc.college : num_colleges + sc.college;
  }
  CollegeId college_of(SlotId s) const { return s < num_colleges ? s : s - num_colleges; }
  bool is_disclosure(SlotId s) const { return s >= num_colleges; }

  std::vector<int> capacities() const {
    std::vector<int> out = regular;
    out.insert(out.end(), disclosure.begin(), disclosure.end());
    return out;
  }
};

// round-half-to-even of delta * seats. Products within 1e-9 of a half-integer are
// snapped to it first so that e.g. 0.35 * 10 is treated as 3.5.
inline int disclosure_seats(double delta, int seats) {
  double x = delta * static_cast<double>(seats);
  const double twice = std::round(2.0 * x);
  if (std::abs(2.0 * x - twice) < 1e-9) x = twice / 2.0;
  const double lower = std::floor(x);
  const double frac = x - lower;
  double r = lower;
  if (frac > 0.5) {
    r = lower + 1.0;
  } else if (frac == 0.5) {
    r = std::fmod(lower, 2.0) == 0.0 ? lower : lower + 1.0;
  }
  return std::clamp(static_cast<int>(r), 0, seats);
}

inline SubCollegeSlots expand_subcolleges(const Economy& econ) {
  SubCollegeSlots out;
  out.num_colleges = econ.num_colleges;
  for (int c = 0; c < econ.num_colleges; ++c) {
    const int seats = econ.capacities[static_cast<std::size_t>(c)];
    const double d = econ.delta.empty() ? 0.0 : econ.delta[static_cast<std::size_t>(c)];
    if (!(d >= 0.0 && d <= 1.0)) throw BadParam("delta entries must lie in [0, 1]");
    const int vid = disclosure_seats(d, seats);
    out.disclosure.push_back(vid);
    out.regular.push_back(seats - vid);
  }
  return out;
}

// Returns every way the list departs from canonical form; empty means valid.
inline std::vector<std::string> validate_sub_rol(const SubRol& rol, int num_colleges = -1) {
  std::vector<std::string> problems;
  auto name = [](SubCollege sc) {
    return std::to_string(sc.college) + (sc.track == Track::regular ? "^r" : "^vid");
  };
  for (std::size_t k = 0; k < rol.entries.size(); ++k) {
    const SubCollege sc = rol.entries[k];
    if (num_colleges >= 0 && (sc.college < 0 || sc.college >= num_colleges)) {
      problems.push_back("unknown college in " + name(sc));
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (rol.entries[j] == sc) problems.push_back("duplicate entry " + name(sc));
    }
    if (sc.track != Track::disclosure) continue;
    const auto reg = std::find(rol.entries.begin(), rol.entries.end(), SubCollege{sc.college, Track::regular});
    if (reg == rol.entries.end()) {
      problems.push_back(name(sc) + " listed without its regular sub-college");
    } else if (static_cast<std::size_t>(reg - rol.entries.begin()) > k) {
      problems.push_back(name(sc) + " precedes its regular sub-college");
    }
  }
  return problems;
}

// Outcome of one mechanism run together with the SPDA instance that produced it,
// so audits can replay priorities and capacities.
struct MatchResult {
  Mechanism mechanism = Mechanism::da;
  SpdaInstance instance;
  SpdaResult run;
  Cutoffs cutoffs;  // slot level: C entries for DA/DAVID-U, 2C for DAVID-Q

  std::vector<CollegeId> college_of;        // per student, kUnmatched if none
  std::vector<char> via_disclosure;         // per student
  std::vector<std::vector<CollegeId>> disclosed_to;  // per student
  std::vector<int> applications_sent;       // per student
  std::vector<int> messages_screened;       // per college
  std::vector<double> net_utility;          // per student
  std::vector<double> net_payoff;           // per college

  double total_net_utility() const { return std::accumulate(net_utility.begin(), net_utility.end(), 0.0); }
  double total_net_payoff() const { return std::accumulate(net_payoff.begin(), net_payoff.end(), 0.0); }
  int num_admitted() const {
    return static_cast<int>(std::count_if(college_of.begin(), college_of.end(),
                                          [](CollegeId c) { return c != kUnmatched; }));
  }
  int total_applications() const { return std::accumulate(applications_sent.begin(), applications_sent.end(), 0); }
  int total_screenings() const { return std::accumulate(messages_screened.begin(), messages_screened.end(), 0); }
};

namespace detail {

inline void check_rols(const Economy& econ, const std::vector<RankOrderedList>& rols) {
  if (static_cast<int>(rols.size()) != econ.num_students()) {
    throw InvalidInstance("need one list per student");
  }
}

// Fills the cost ledger and net figures from college_of / disclosed_to.
inline void settle(const Economy& econ, MatchResult& r) {
  const auto n = econ.students.size();
  const auto c_count = static_cast<std::size_t>(econ.num_colleges);
  r.applications_sent.assign(n, 0);
  r.messages_screened.assign(c_count, 0);
  r.net_utility.assign(n, 0.0);
  r.net_payoff.assign(c_count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.applications_sent[i] = static_cast<int>(r.disclosed_to[i].size());
    for (CollegeId c : r.disclosed_to[i]) ++r.messages_screened[static_cast<std::size_t>(c)];
    const CollegeId c = r.college_of[i];
    const double matched = c == kUnmatched ? 0.0 : econ.students[i].v[static_cast<std::size_t>(c)];
    r.net_utility[i] = matched - econ.gamma_i * r.applications_sent[i];
    if (c != kUnmatched) r.net_payoff[static_cast<std::size_t>(c)] += econ.students[i].w[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < c_count; ++c) {
    r.net_payoff[c] -= econ.gamma_c * r.messages_screened[c];
  }
}

inline void check_targets(const Economy& econ, const std::vector<TargetSet>& targets) {
  if (static_cast<int>(targets.size()) != econ.num_students()) {
    throw InvalidInstance("need one target set per student");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i].targets;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] < 0 || t[k] >= econ.num_colleges) {
        throw InvalidInstance("student " + std::to_string(i) + " targets unknown college");
      }
      if (std::find(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k), t[k]) !=
          t.begin() + static_cast<std::ptrdiff_t>(k)) {
        throw InvalidInstance("student " + std::to_string(i) + " targets a college twice");
      }
    }
  }
}

}  // namespace detail

// Truthful ordinal list: every college with positive utility, best first.
inline RankOrderedList truthful_rol(const StudentType& s) {
  RankOrderedList rol{s.id, {}};
  for (std::size_t c = 0; c < s.v.size(); ++c) {
    if (s.v[c] > 0.0) rol.entries.push_back(static_cast<SlotId>(c));
  }
  std::stable_sort(rol.entries.begin(), rol.entries.end(), [&](SlotId a, SlotId b) {
    return s.v[static_cast<std::size_t>(a)] > s.v[static_cast<std::size_t>(b)];
  });
  return rol;
}

inline std::vector<RankOrderedList> truthful_rols(const Economy& econ) {
  std::vector<RankOrderedList> out;
  out.reserve(econ.students.size());
  for (const auto& s : econ.students) out.push_back(truthful_rol(s));
  return out;
}

// College list -> canonical sub-college list, with c^vid right after c^r for every
// listed college in `disclose`.
inline SubRol canonical_sub_rol(const RankOrderedList& rol, const std::vector<CollegeId>& disclose) {
  SubRol out{rol.owner, {}};
  for (SlotId c : rol.entries) {
    out.entries.push_back({c, Track::regular});
    if (std::find(disclose.begin(), disclose.end(), c) != disclose.end()) {
      out.entries.push_back({c, Track::disclosure});
    }
  }
  return out;
}

// SPDA with priority = eligibility score; no disclosure, no costs.
inline MatchResult run_da(const Economy& econ, const std::vector<RankOrderedList>& rols,
                          TiePolicy ties = TiePolicy::by_student_id) {
  validate(econ);
  detail::check_rols(econ, rols);
  MatchResult r;
  r.mechanism = Mechanism::da;
  r.instance.rols = rols;
  r.instance.capacities = econ.capacities;
  r.instance.priorities = PriorityProfile(econ.num_colleges, econ.num_students());
  for (const auto& s : econ.students) {
    for (int c = 0; c < econ.num_colleges; ++c) r.instance.priorities.set(c, s.id, s.e[static_cast<std::size_t>(c)]);
  }
  r.run = run_spda(r.instance, ties);
  r.cutoffs = extract_cutoffs(r.run.matching, r.instance.priorities, r.instance.capacities);
  r.college_of = r.run.matching.assignment;
  r.via_disclosure.assign(econ.students.size(), 0);
  r.disclosed_to.assign(econ.students.size(), {});
  detail::settle(econ, r);
  return r;
}

// SPDA over 2C sub-colleges: c^r ranked by e, c^vid ranked by the screened payoff w.
// A student pays gamma_i once per college whose c^vid she lists; that college pays
// gamma_c for her, whether or not she is admitted.
inline MatchResult run_david_q(const Economy& econ, const std::vector<SubRol>& sub_rols,
                               TiePolicy ties = TiePolicy::by_student_id) {
  validate(econ);
  if (static_cast<int>(sub_rols.size()) != econ.num_students()) {
    throw InvalidInstance("need one sub-college list per student");
  }
  for (std::size_t i = 0; i < sub_rols.size(); ++i) {
    const auto problems = validate_sub_rol(sub_rols[i], econ.num_colleges);
    if (!problems.empty()) {
      std::string msg = "student " + std::to_string(i) + ":";
      for (const auto& p : problems) msg += " " + p + ";";
      throw InvalidSubRol(msg);
    }
  }
  const SubCollegeSlots slots = expand_subcolleges(econ);
  const int c_count = econ.num_colleges;

  MatchResult r;
  r.mechanism = Mechanism::david_q;
  r.instance.capacities = slots.capacities();
  r.instance.priorities = PriorityProfile(2 * c_count, econ.num_students());
  for (const auto& s : econ.students) {
    for (int c = 0; c < c_count; ++c) {
      r.instance.priorities.set(c, s.id, s.e[static_cast<std::size_t>(c)]);
      r.instance.priorities.set(c_count + c, s.id, s.w[static_cast<std::size_t>(c)]);
    }
  }
  r.disclosed_to.assign(econ.students.size(), {});
  for (std::size_t i = 0; i < sub_rols.size(); ++i) {
    RankOrderedList rol{static_cast<StudentId>(i), {}};
    for (SubCollege sc : sub_rols[i].entries) {
      rol.entries.push_back(slots.slot(sc));
      if (sc.track == Track::disclosure) r.disclosed_to[i].push_back(sc.college);
    }
    r.instance.rols.push_back(std::move(rol));
  }
  r.run = run_spda(r.instance, ties);
  r.cutoffs = extract_cutoffs(r.run.matching, r.instance.priorities, r.instance.capacities);
  r.college_of.assign(econ.students.size(), kUnmatched);
  r.via_disclosure.assign(econ.students.size(), 0);
  for (std::size_t i = 0; i < econ.students.size(); ++i) {
    const SlotId s = r.run.matching.assignment[i];
    if (s == kUnmatched) continue;
    r.college_of[i] = slots.college_of(s);
    r.via_disclosure[i] = slots.is_disclosure(s) ? 1 : 0;
  }
  detail::settle(econ, r);
  return r;
}

// DAVID-U with a precomputed E[w|e] table. Priority at c is w if the student targets
// c, otherwise E[w|e]. Every message costs gamma_i to the sender and gamma_c to the
// receiver regardless of the outcome, including targets the student does not list.
inline MatchResult run_david_u(const Economy& econ, const std::vector<RankOrderedList>& rols,
                               const std::vector<TargetSet>& targets, const Table& expected,
                               TiePolicy ties = TiePolicy::by_student_id) {
  validate(econ);
  detail::check_rols(econ, rols);
  detail::check_targets(econ, targets);
  MatchResult r;
  r.mechanism = Mechanism::david_u;
  r.instance.rols = rols;
  r.instance.capacities = econ.capacities;
  r.instance.priorities = PriorityProfile(econ.num_colleges, econ.num_students());
  r.disclosed_to.assign(econ.students.size(), {});
  for (const auto& s : econ.students) {
    const auto& t = targets[static_cast<std::size_t>(s.id)];
    for (int c = 0; c < econ.num_colleges; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      const double p = t.contains(c) ? s.w[cc] : expected[static_cast<std::size_t>(s.id)][cc];
      r.instance.priorities.set(c, s.id, p);
    }
    r.disclosed_to[static_cast<std::size_t>(s.id)] = t.targets;
  }
  r.run = run_spda(r.instance, ties);
  r.cutoffs = extract_cutoffs(r.run.matching, r.instance.priorities, r.instance.capacities);
  r.college_of = r.run.matching.assignment;
  r.via_disclosure.assign(econ.students.size(), 0);
  for (std::size_t i = 0; i < econ.students.size(); ++i) {
    const CollegeId c = r.college_of[i];
    r.via_disclosure[i] = (c != kUnmatched && targets[i].contains(c)) ? 1 : 0;
  }
  detail::settle(econ, r);
  return r;
}

inline MatchResult run_david_u(const Economy& econ, const std::vector<RankOrderedList>& rols,
                               const std::vector<TargetSet>& targets,
                               TiePolicy ties = TiePolicy::by_student_id) {
  validate(econ);
  return run_david_u(econ, rols, targets, expected_payoff_table(econ), ties);
}

inline std::vector<TargetSet> empty_targets(int n) {
  std::vector<TargetSet> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)].owner = i;
  return out;
}

}  // namespace david
