#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "david/demand.hpp"
#include "david/econ_model.hpp"
#include "david/error.hpp"
#include "david/mechanisms.hpp"
#include "david/spda.hpp"

namespace david {

struct Violation {
  std::uint64_t seed = 0;
  StudentId student = kUnmatched;
  std::string description;
  double before = 0.0;
  double after = 0.0;
};

struct PropertyReport {
  std::string property;
  int instances = 0;
  std::vector<Violation> violations;
  std::vector<Violation> permitted;  // findings the property allows, listed for the record
  int skipped = 0;                   // evaluations dropped on an exact tie

  bool pass() const { return violations.empty(); }

  void merge(const PropertyReport& other) {
    instances += other.instances;
    skipped += other.skipped;
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
    permitted.insert(permitted.end(), other.permitted.begin(), other.permitted.end());
  }
};

inline constexpr int kMaxExhaustiveStudents = 4;
inline constexpr int kMaxExhaustiveColleges = 3;

// ---------------------------------------------------------------------------
// Random finite instances

struct RandomEconomySpec {
  int min_students = 1;
  int max_students = 20;
  int min_colleges = 1;
  int max_colleges = 5;
  int max_capacity = 3;
  double negative_v_share = 0.15;  // chance that a given v entry is negative
};

// Uniform scores on (0, 1) keep priorities generically strict. The expected-payoff
// table is drawn independently of e so DAVID-U priorities are not a relabelled DA.
inline Economy random_economy(std::uint64_t seed, const RandomEconomySpec& spec = {}) {
  std::mt19937_64 rng(derive_seed(seed, 0xEC0));
  std::uniform_int_distribution<int> n_dist(spec.min_students, spec.max_students);
  std::uniform_int_distribution<int> c_dist(spec.min_colleges, spec.max_colleges);
  std::uniform_int_distribution<int> cap_dist(0, spec.max_capacity);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution negative(spec.negative_v_share);
  static constexpr double kDeltaLevels[] = {0.0, 0.25, 0.5, 0.75, 1.0};

  Economy econ;
  const int n = n_dist(rng);
  econ.num_colleges = c_dist(rng);
  const auto cc = static_cast<std::size_t>(econ.num_colleges);
  for (std::size_t c = 0; c < cc; ++c) {
    econ.capacities.push_back(cap_dist(rng));
    econ.delta.push_back(kDeltaLevels[std::uniform_int_distribution<int>(0, 4)(rng)]);
  }
  econ.gamma_i = 0.1 * unit(rng);
  econ.gamma_c = 0.1 * unit(rng);
  Table expected;
  for (int i = 0; i < n; ++i) {
    StudentType s;
    s.id = i;
    std::vector<double> row;
    for (std::size_t c = 0; c < cc; ++c) {
      const double v = 0.1 + unit(rng);
      s.v.push_back(negative(rng) ? -v : v);
      s.w.push_back(unit(rng));
      s.e.push_back(unit(rng));
      row.push_back(unit(rng));
    }
    econ.students.push_back(std::move(s));
    expected.push_back(std::move(row));
  }
  econ.expected_payoff = std::move(expected);
  return econ;
}

// Random subset of colleges in random order.
inline RankOrderedList random_rol(StudentId owner, int num_colleges, std::mt19937_64& rng) {
  RankOrderedList rol{owner, {}};
  for (int c = 0; c < num_colleges; ++c) {
    if (std::bernoulli_distribution(0.75)(rng)) rol.entries.push_back(c);
  }
  std::shuffle(rol.entries.begin(), rol.entries.end(), rng);
  return rol;
}

// Valid sub-college list: each disclosure entry lands somewhere after its regular one.
inline SubRol random_sub_rol(StudentId owner, int num_colleges, std::mt19937_64& rng) {
  const RankOrderedList base = random_rol(owner, num_colleges, rng);
  SubRol out{owner, {}};
  for (SlotId c : base.entries) out.entries.push_back({c, Track::regular});
  for (SlotId c : base.entries) {
    if (!std::bernoulli_distribution(0.4)(rng)) continue;
    const auto reg = std::find(out.entries.begin(), out.entries.end(), SubCollege{c, Track::regular});
    const auto lo = static_cast<int>(reg - out.entries.begin()) + 1;
    const int pos = std::uniform_int_distribution<int>(lo, static_cast<int>(out.entries.size()))(rng);
    out.entries.insert(out.entries.begin() + pos, SubCollege{c, Track::disclosure});
  }
  return out;
}

inline std::vector<TargetSet> random_targets(int n, int num_colleges, std::mt19937_64& rng, double p = 0.3) {
  auto out = empty_targets(n);
  for (auto& t : out) {
    for (int c = 0; c < num_colleges; ++c) {
      if (std::bernoulli_distribution(p)(rng)) t.targets.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Negative control: immediate acceptance (Boston). Round k processes every
// unassigned student's k-th choice and seats are filled permanently by priority e.

inline std::vector<CollegeId> run_immediate_acceptance(const Economy& econ, const std::vector<RankOrderedList>& rols) {
  validate(econ);
  const auto n = econ.students.size();
  std::vector<CollegeId> out(n, kUnmatched);
  std::vector<int> left = econ.capacities;
  std::size_t longest = 0;
  for (const auto& r : rols) longest = std::max(longest, r.entries.size());
  for (std::size_t k = 0; k < longest; ++k) {
    std::vector<std::vector<StudentId>> apply(static_cast<std::size_t>(econ.num_colleges));
    for (std::size_t i = 0; i < n; ++i) {
      if (out[i] == kUnmatched && k < rols[i].entries.size()) {
        apply[static_cast<std::size_t>(rols[i].entries[k])].push_back(static_cast<StudentId>(i));
      }
    }
    for (std::size_t c = 0; c < apply.size(); ++c) {
      auto& pool = apply[c];
      std::sort(pool.begin(), pool.end(), [&](StudentId a, StudentId b) {
        const double x = econ.students[static_cast<std::size_t>(a)].e[c];
        const double y = econ.students[static_cast<std::size_t>(b)].e[c];
        return x > y || (x == y && a < b);
      });
      for (StudentId i : pool) {
        if (left[c] == 0) break;
        out[static_cast<std::size_t>(i)] = static_cast<CollegeId>(c);
        --left[c];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ordinal strategy-proofness

enum class Rule { da, david_q, david_u, immediate_acceptance };

inline const char* to_string(Rule r) {
  switch (r) {
    case Rule::da: return "da";
    case Rule::david_q: return "david-q";
    case Rule::david_u: return "david-u";
    case Rule::immediate_acceptance: return "immediate-acceptance";
  }
  return "?";
}

// The non-ordinal half of each student's report, held fixed during the search:
// DAVID-U targets and DAVID-Q disclosure colleges.
struct AuxiliaryActions {
  std::vector<TargetSet> targets;
  std::vector<std::vector<CollegeId>> vid;
};

inline double matched_utility(const Economy& econ, StudentId i, CollegeId c) {
  return c == kUnmatched ? 0.0 : econ.students[static_cast<std::size_t>(i)].v[static_cast<std::size_t>(c)];
}

// All injective ordered lists over num_colleges colleges, including the empty one.
inline std::vector<std::vector<CollegeId>> all_ordered_lists(int num_colleges) {
  std::vector<std::vector<CollegeId>> out{{}};
  std::vector<CollegeId> cur;
  std::vector<char> used(static_cast<std::size_t>(num_colleges), 0);
  std::function<void()> rec = [&] {
    for (int c = 0; c < num_colleges; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      used[static_cast<std::size_t>(c)] = 1;
      cur.push_back(c);
      out.push_back(cur);
      rec();
      cur.pop_back();
      used[static_cast<std::size_t>(c)] = 0;
    }
  };
  rec();
  return out;
}

// Every valid sub-college list whose regular part is `colleges` (in that order) and
// whose disclosure entries are exactly the listed members of `vid`.
inline std::vector<SubRol> sub_rol_variants(StudentId owner, const std::vector<CollegeId>& colleges,
                                            const std::vector<CollegeId>& vid) {
  SubRol base{owner, {}};
  std::vector<CollegeId> pending;
  for (CollegeId c : colleges) {
    base.entries.push_back({c, Track::regular});
    if (std::find(vid.begin(), vid.end(), c) != vid.end()) pending.push_back(c);
  }
  std::vector<SubRol> out{base};
  for (CollegeId c : pending) {
    std::vector<SubRol> next;
    for (const auto& rol : out) {
      const auto reg = std::find(rol.entries.begin(), rol.entries.end(), SubCollege{c, Track::regular});
      const auto from = static_cast<std::size_t>(reg - rol.entries.begin()) + 1;
      for (std::size_t pos = from; pos <= rol.entries.size(); ++pos) {
        SubRol r = rol;
        r.entries.insert(r.entries.begin() + static_cast<std::ptrdiff_t>(pos), SubCollege{c, Track::disclosure});
        next.push_back(std::move(r));
      }
    }
    out = std::move(next);
  }
  return out;
}

namespace detail {

inline void check_exhaustive_bounds(const Economy& econ) {
  if (econ.num_students() > kMaxExhaustiveStudents || econ.num_colleges > kMaxExhaustiveColleges) {
    throw TooLarge("exhaustive search is limited to " + std::to_string(kMaxExhaustiveStudents) + " students and " +
                   std::to_string(kMaxExhaustiveColleges) + " colleges");
  }
}

inline std::string describe(const std::vector<CollegeId>& list) {
  std::string s = "[";
  for (std::size_t k = 0; k < list.size(); ++k) s += (k ? "," : "") + std::to_string(list[k]);
  return s + "]";
}

inline std::string describe(const SubRol& rol) {
  std::string s = "[";
  for (std::size_t k = 0; k < rol.entries.size(); ++k) {
    s += (k ? "," : "") + std::to_string(rol.entries[k].college) +
         (rol.entries[k].track == Track::regular ? "r" : "vid");
  }
  return s + "]";
}

}  // namespace detail

// For every student, tries every permutation and truncation of her college list while
// everyone else reports truthfully and her own auxiliary action stays fixed. Flags
// any list that strictly raises v at the matched college.
inline PropertyReport check_strategyproofness(const Economy& econ, Rule rule, const AuxiliaryActions& aux = {},
                                              std::uint64_t seed = 0) {
  validate(econ);
  detail::check_exhaustive_bounds(econ);
  const int n = econ.num_students();
  const std::vector<TargetSet> targets = aux.targets.empty() ? empty_targets(n) : aux.targets;
  std::vector<std::vector<CollegeId>> vid = aux.vid;
  vid.resize(static_cast<std::size_t>(n));
  const auto truthful = truthful_rols(econ);

  std::vector<SubRol> truthful_sub;
  for (int i = 0; i < n; ++i) {
    truthful_sub.push_back(canonical_sub_rol(truthful[static_cast<std::size_t>(i)], vid[static_cast<std::size_t>(i)]));
  }
  auto outcome = [&](const std::vector<RankOrderedList>& rols) -> std::vector<CollegeId> {
    switch (rule) {
      case Rule::da: return run_da(econ, rols).college_of;
      case Rule::david_u: return run_david_u(econ, rols, targets).college_of;
      case Rule::immediate_acceptance: return run_immediate_acceptance(econ, rols);
      case Rule::david_q: break;
    }
    throw InvalidInstance("sub-college rule needs sub-college lists");
  };

  PropertyReport report;
  report.property = std::string("strategyproofness/") + to_string(rule);
  report.instances = 1;
  const auto lists = all_ordered_lists(econ.num_colleges);
  for (StudentId i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    double honest = 0.0;
    if (rule == Rule::david_q) {
      honest = matched_utility(econ, i, run_david_q(econ, truthful_sub).college_of[ii]);
    } else {
      honest = matched_utility(econ, i, outcome(truthful)[ii]);
    }
    for (const auto& list : lists) {
      if (rule == Rule::david_q) {
        for (const auto& variant : sub_rol_variants(i, list, vid[ii])) {
          auto reports = truthful_sub;
          reports[ii] = variant;
          const double got = matched_utility(econ, i, run_david_q(econ, reports).college_of[ii]);
          if (got > honest) {
            report.violations.push_back({seed, i, "reports " + detail::describe(variant), honest, got});
          }
        }
        continue;
      }
      auto reports = truthful;
      reports[ii].entries = list;
      const double got = matched_utility(econ, i, outcome(reports)[ii]);
      if (got > honest) report.violations.push_back({seed, i, "reports " + detail::describe(list), honest, got});
    }
  }
  return report;
}

// Student ids 0, 1, 2 stand for students 1, 2, 3 of the textbook instance: two
// single-seat colleges A (0) and B (1), lists 1:[A,B] 2:[A,B] 3:[B], priorities
// A: 2 > 1 > 3 and B: 1 > 3 > 2. DA gives {1->B, 2->A, 3->none}.
inline Economy three_student_instance() {
  Economy econ;
  econ.num_colleges = 2;
  econ.capacities = {1, 1};
  econ.students = {
      {0, {2.0, 1.0}, {2.0, 3.0}, {2.0, 3.0}},
      {1, {2.0, 1.0}, {3.0, 1.0}, {3.0, 1.0}},
      {2, {-1.0, 1.0}, {1.0, 2.0}, {1.0, 2.0}},
  };
  return econ;
}

// ---------------------------------------------------------------------------
// Disclosure safety

// DAVID-Q: for each student and each list consistent with her true ordering (any
// subset of acceptable colleges in v order, any subset of them disclosed, each
// c^vid right behind its c^r), adding one more c^vid at any position after its
// c^r must not lower v at the matched college. Others keep `others`.
// Bases that park a c^vid behind a worse college are excluded: such a list already
// ranks the worse college above c and the insertion can then cost her c.
inline PropertyReport check_disclosure_safety_q(const Economy& econ, const std::vector<SubRol>& others,
                                                std::uint64_t seed = 0) {
  validate(econ);
  detail::check_exhaustive_bounds(econ);
  const int n = econ.num_students();
  if (static_cast<int>(others.size()) != n) throw InvalidInstance("need one sub-college list per student");
  PropertyReport report;
  report.property = "disclosure-safety/david-q";
  report.instances = 1;

  for (StudentId i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const auto order = truthful_rol(econ.students[ii]).entries;
    const std::size_t k = order.size();
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      std::vector<CollegeId> listed;
      for (std::size_t j = 0; j < k; ++j) {
        if (mask & (1u << j)) listed.push_back(order[j]);
      }
      for (std::uint32_t vmask = 0; vmask < (1u << listed.size()); ++vmask) {
        std::vector<CollegeId> vid;
        std::vector<CollegeId> missing;
        for (std::size_t j = 0; j < listed.size(); ++j) {
          ((vmask & (1u << j)) ? vid : missing).push_back(listed[j]);
        }
        {
          const SubRol base = canonical_sub_rol(RankOrderedList{i, listed}, vid);
          auto reports = others;
          reports[ii] = base;
          const double before = matched_utility(econ, i, run_david_q(econ, reports).college_of[ii]);
          for (CollegeId add : missing) {
            const auto reg = std::find(base.entries.begin(), base.entries.end(), SubCollege{add, Track::regular});
            const auto from = static_cast<std::size_t>(reg - base.entries.begin()) + 1;
            for (std::size_t pos = from; pos <= base.entries.size(); ++pos) {
              SubRol grown = base;
              grown.entries.insert(grown.entries.begin() + static_cast<std::ptrdiff_t>(pos),
                                   SubCollege{add, Track::disclosure});
              reports[ii] = grown;
              const double after = matched_utility(econ, i, run_david_q(econ, reports).college_of[ii]);
              if (after < before) {
                report.violations.push_back(
                    {seed, i, detail::describe(base) + " -> " + detail::describe(grown), before, after});
              }
            }
          }
        }
      }
    }
  }
  return report;
}

struct UnsafetyWitness {
  StudentId student = kUnmatched;
  CollegeId added_target = kUnmatched;
  double before = 0.0;
  double after = 0.0;
};

// DAVID-U: every (student, extra target) whose addition strictly lowers the
// student's matched utility.
inline std::vector<UnsafetyWitness> find_david_u_unsafety(const Economy& econ, const std::vector<RankOrderedList>& rols,
                                                          const std::vector<TargetSet>& targets) {
  std::vector<UnsafetyWitness> out;
  const auto base = run_david_u(econ, rols, targets);
  for (const auto& s : econ.students) {
    const double before = matched_utility(econ, s.id, base.college_of[static_cast<std::size_t>(s.id)]);
    for (int c = 0; c < econ.num_colleges; ++c) {
      if (targets[static_cast<std::size_t>(s.id)].contains(c)) continue;
      auto grown = targets;
      grown[static_cast<std::size_t>(s.id)].targets.push_back(c);
      const double after =
          matched_utility(econ, s.id, run_david_u(econ, rols, grown).college_of[static_cast<std::size_t>(s.id)]);
      if (after < before) out.push_back({s.id, c, before, after});
    }
  }
  return out;
}

// Student 0 ranks A above B and is admitted to A on her expected payoff (0.8 beats
// student 1's 0.6), but her true payoff at A is only 0.5. Targeting A reveals it and
// she falls to B.
inline Economy david_u_witness_economy() {
  Economy econ;
  econ.num_colleges = 2;
  econ.capacities = {1, 1};
  econ.gamma_i = 0.1;
  econ.gamma_c = 0.1;
  econ.students = {
      {0, {2.0, 1.0}, {0.5, 0.5}, {0.8, 0.5}},
      {1, {1.0, 0.5}, {0.7, 0.4}, {0.6, 0.4}},
  };
  econ.expected_payoff = Table{{0.8, 0.5}, {0.6, 0.4}};
  return econ;
}

// ---------------------------------------------------------------------------
// Justified envy

enum class EnvyVariant { college, quota, with_disclosure };

inline const char* to_string(EnvyVariant v) {
  switch (v) {
    case EnvyVariant::college: return "college";
    case EnvyVariant::quota: return "quota";
    case EnvyVariant::with_disclosure: return "with-disclosure";
  }
  return "?";
}

namespace detail {

// College-level envy under eligibility priorities, read from the college order of
// each student's submitted list.
inline std::vector<Violation> college_envy(const MatchResult& r, const Economy& econ, std::uint64_t seed) {
  std::vector<Violation> out;
  const int cc = econ.num_colleges;
  std::vector<std::vector<StudentId>> admitted(static_cast<std::size_t>(cc));
  for (std::size_t i = 0; i < r.college_of.size(); ++i) {
    if (r.college_of[i] != kUnmatched) admitted[static_cast<std::size_t>(r.college_of[i])].push_back(static_cast<StudentId>(i));
  }
  for (const auto& rol : r.instance.rols) {
    const auto i = static_cast<std::size_t>(rol.owner);
    std::vector<CollegeId> order;
    for (SlotId s : rol.entries) {
      const CollegeId c = r.mechanism == Mechanism::david_q ? (s < cc ? s : s - cc) : s;
      if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
    }
    for (CollegeId c : order) {
      if (c == r.college_of[i]) break;
      const auto ci = static_cast<std::size_t>(c);
      if (econ.capacities[ci] == 0) continue;
      if (static_cast<int>(admitted[ci].size()) < econ.capacities[ci]) {
        out.push_back({seed, rol.owner, "college " + std::to_string(c) + " has a vacant seat", 0.0, 0.0});
        continue;
      }
      for (StudentId j : admitted[ci]) {
        const double mine = econ.students[i].e[ci];
        const double theirs = econ.students[static_cast<std::size_t>(j)].e[ci];
        if (mine > theirs || (mine == theirs && rol.owner < j)) {
          out.push_back({seed, rol.owner,
                         "outranks student " + std::to_string(j) + " at college " + std::to_string(c), theirs, mine});
        }
      }
    }
  }
  return out;
}

inline std::vector<Violation> slot_envy(const MatchResult& r, std::uint64_t seed) {
  std::vector<Violation> out;
  for (const auto& bp : find_blocking_pairs(r.instance, r.run.matching)) {
    out.push_back({seed, bp.student, "blocks slot " + std::to_string(bp.slot), 0.0, 0.0});
  }
  return out;
}

}  // namespace detail

// college: (student, college) pairs under eligibility priorities.
// quota: (student, sub-college) pairs of a DAVID-Q run under each slot's own
//   priority; college-level envy across quotas is listed under `permitted`.
// with_disclosure: (student, college) pairs of a DAVID-U run under the updated priorities.
inline PropertyReport check_justified_envy(const MatchResult& result, const Economy& econ, EnvyVariant variant,
                                           std::uint64_t seed = 0) {
  PropertyReport report;
  report.property = std::string("justified-envy/") + to_string(variant);
  report.instances = 1;
  switch (variant) {
    case EnvyVariant::college:
      report.violations = detail::college_envy(result, econ, seed);
      break;
    case EnvyVariant::quota:
      if (result.mechanism != Mechanism::david_q) throw InvalidInstance("quota audit needs a DAVID-Q result");
      report.violations = detail::slot_envy(result, seed);
      report.permitted = detail::college_envy(result, econ, seed);
      break;
    case EnvyVariant::with_disclosure:
      if (result.mechanism != Mechanism::david_u) throw InvalidInstance("disclosure audit needs a DAVID-U result");
      report.violations = detail::slot_envy(result, seed);
      break;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Monotone demand and gross substitutes

struct CutoffGrid {
  std::vector<double> levels;  // ascending; the same levels for every coordinate
};

namespace detail {

// Walks every grid point of `dims` coordinates, raises one coordinate to the next
// level, and compares demand keys (-1 for none). owns(key, coord) says whether a
// coordinate is the key's own cutoff.
inline void lemma1_scan(int dims, const CutoffGrid& grid, const std::function<int(const std::vector<double>&)>& demand,
                        const std::function<bool(int key, int coord)>& owns, PropertyReport& report, std::uint64_t seed,
                        StudentId who) {
  const auto levels = static_cast<int>(grid.levels.size());
  if (levels < 3) throw BadParam("cutoff grid needs at least 3 levels");
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  std::vector<double> p(static_cast<std::size_t>(dims));
  while (true) {
    for (int d = 0; d < dims; ++d) p[static_cast<std::size_t>(d)] = grid.levels[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
    int base = -2;
    try {
      base = demand(p);
    } catch (const AmbiguousDemand&) {
      ++report.skipped;
    }
    if (base != -2) {
      for (int d = 0; d < dims; ++d) {
        const auto di = static_cast<std::size_t>(d);
        if (idx[di] + 1 >= levels) continue;
        std::vector<double> q = p;
        q[di] = grid.levels[static_cast<std::size_t>(idx[di] + 1)];
        int raised = -2;
        try {
          raised = demand(q);
        } catch (const AmbiguousDemand&) {
          ++report.skipped;
          continue;
        }
        if (raised == base) continue;
        if (raised >= 0 && owns(raised, d)) {
          report.violations.push_back({seed, who, "raising coordinate " + std::to_string(d) + " created demand for " +
                                                      std::to_string(raised), p[di], q[di]});
        }
        if (base >= 0 && !owns(base, d)) {
          report.violations.push_back({seed, who, "raising coordinate " + std::to_string(d) + " destroyed demand for " +
                                                      std::to_string(base), p[di], q[di]});
        }
      }
    }
    int d = 0;
    while (d < dims && ++idx[static_cast<std::size_t>(d)] == levels) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == dims) break;
  }
}

}  // namespace detail

// DAVID-U: coordinates are the C joint cutoffs; demand keys are colleges.
inline PropertyReport check_lemma1_u(const std::vector<StudentType>& types, const Table& expected, double gamma_i,
                                     const CutoffGrid& grid, std::uint64_t seed = 0) {
  PropertyReport report;
  report.property = "lemma1/david-u";
  for (const auto& s : types) {
    ++report.instances;
    const auto& ew = expected[static_cast<std::size_t>(s.id)];
    auto demand = [&](const std::vector<double>& pi) { return demand_u(s, Cutoffs(pi), ew, gamma_i).college; };
    auto owns = [](int key, int coord) { return key == coord; };
    detail::lemma1_scan(static_cast<int>(s.num_colleges()), grid, demand, owns, report, seed, s.id);
  }
  return report;
}

// DAVID-Q: coordinates are the 2C sub-college cutoffs (regular then disclosure);
// demand keys are sub-college slots, so both monotonicity and substitution are
// checked one sub-college at a time.
inline PropertyReport check_lemma1_q(const std::vector<StudentType>& types, double gamma_i, const CutoffGrid& grid,
                                     std::uint64_t seed = 0) {
  PropertyReport report;
  report.property = "lemma1/david-q";
  for (const auto& s : types) {
    ++report.instances;
    const int c_count = static_cast<int>(s.num_colleges());
    auto demand = [&](const std::vector<double>& p) {
      const DemandOutcome d = demand_q(s, Cutoffs(p), gamma_i);
      if (d.college == kUnmatched) return -1;
      return d.via_disclosure ? c_count + d.college : d.college;
    };
    auto owns = [](int key, int coord) { return key == coord; };
    detail::lemma1_scan(2 * c_count, grid, demand, owns, report, seed, s.id);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Best-response dynamics over single-target profiles

struct CycleTranscript {
  std::vector<std::vector<CollegeId>> profiles;  // per student: targeted college or -1
  bool cycle = false;
  std::optional<std::vector<CollegeId>> fixed_point;
  std::vector<std::vector<CollegeId>> equilibria;  // every mutually optimal profile
};

namespace detail {

inline std::vector<TargetSet> targets_from(const std::vector<CollegeId>& profile) {
  auto out = empty_targets(static_cast<int>(profile.size()));
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile[i] != kUnmatched) out[i].targets = {profile[i]};
  }
  return out;
}

inline double net_utility_of(const Economy& econ, const std::vector<RankOrderedList>& rols,
                             const std::vector<CollegeId>& profile, StudentId i) {
  return run_david_u(econ, rols, targets_from(profile)).net_utility[static_cast<std::size_t>(i)];
}

// Best single target (or none) for student i; staying silent wins ties.
inline CollegeId best_target(const Economy& econ, const std::vector<RankOrderedList>& rols,
                             std::vector<CollegeId> profile, StudentId i) {
  const auto ii = static_cast<std::size_t>(i);
  profile[ii] = kUnmatched;
  CollegeId best = kUnmatched;
  double best_value = net_utility_of(econ, rols, profile, i);
  for (int c = 0; c < econ.num_colleges; ++c) {
    profile[ii] = c;
    const double value = net_utility_of(econ, rols, profile, i);
    if (value > best_value) {
      best_value = value;
      best = c;
    }
  }
  return best;
}

}  // namespace detail

// Students revise in id order, one deviation at a time, starting from nobody
// targeting. Stops on a full pass without change (fixed point) or on a revisited
// profile (cycle). Also enumerates every profile to list the pure equilibria.
inline CycleTranscript best_response_dynamics(const Economy& econ, int max_steps = 1000) {
  validate(econ);
  const auto rols = truthful_rols(econ);
  const int n = econ.num_students();
  CycleTranscript out;
  std::vector<CollegeId> profile(static_cast<std::size_t>(n), kUnmatched);
  std::map<std::vector<CollegeId>, int> seen{{profile, 0}};
  out.profiles.push_back(profile);
  int quiet = 0;
  for (int step = 0; step < max_steps && quiet < n; ++step) {
    const StudentId i = step % n;
    const CollegeId br = detail::best_target(econ, rols, profile, i);
    if (br == profile[static_cast<std::size_t>(i)]) {
      ++quiet;
      continue;
    }
    quiet = 0;
    profile[static_cast<std::size_t>(i)] = br;
    out.profiles.push_back(profile);
    if (!seen.emplace(profile, static_cast<int>(out.profiles.size()) - 1).second) {
      out.cycle = true;
      break;
    }
  }
  if (!out.cycle && quiet >= n) out.fixed_point = profile;

  std::vector<CollegeId> p(static_cast<std::size_t>(n), kUnmatched);
  while (true) {
    bool stable = true;
    for (StudentId i = 0; i < n && stable; ++i) {
      stable = detail::best_target(econ, rols, p, i) == p[static_cast<std::size_t>(i)];
    }
    if (stable) out.equilibria.push_back(p);
    int d = 0;
    while (d < n && ++p[static_cast<std::size_t>(d)] == econ.num_colleges) p[static_cast<std::size_t>(d++)] = kUnmatched;
    if (d == n) break;
  }
  return out;
}

// Two students, one seat: e = (0.5, 0.4), w = (0.9, 0.8), v = (1, 1), gamma_I = 0.1,
// and the college ranks undisclosed students by e.
inline Economy cycle_example_economy() {
  Economy econ;
  econ.num_colleges = 1;
  econ.capacities = {1};
  econ.gamma_i = 0.1;
  econ.students = {
      {0, {1.0}, {0.9}, {0.5}},
      {1, {1.0}, {0.8}, {0.4}},
  };
  return econ;
}

inline CycleTranscript detect_cycle_example() { return best_response_dynamics(cycle_example_economy()); }

}  // namespace david
