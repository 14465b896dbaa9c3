#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "david/demand.hpp"
#include "david/econ_model.hpp"
#include "david/error.hpp"
#include "david/mechanisms.hpp"
#include "david/spda.hpp"

namespace david {

enum class EquilibriumStatus { converged, cycle_detected, max_iter };

inline const char* to_string(EquilibriumStatus s) {
  switch (s) {
    case EquilibriumStatus::converged: return "converged";
    case EquilibriumStatus::cycle_detected: return "cycle_detected";
    case EquilibriumStatus::max_iter: return "max_iter";
  }
  return "?";
}

// simultaneous: every student revises against the same thresholds, then one rerun.
// sequential: students revise in id order and the mechanism is rerun after each
// change, so later students face the updated thresholds.
enum class UpdateRule { simultaneous, sequential };

struct EquilibriumOptions {
  double tol = 1e-9;  // market-clearing tolerance reported alongside the result
  int max_iter = 1000;
  UpdateRule update = UpdateRule::simultaneous;
  std::optional<Table> expected;  // overrides expected_payoff_table(econ)
};

struct EquilibriumResult {
  EquilibriumStatus status = EquilibriumStatus::max_iter;
  int iterations = 0;
  Cutoffs cutoffs;  // joint DAVID-U cutoffs, expected-payoff units
  Matching matching;  // college level
  std::vector<RankOrderedList> rols;
  std::vector<TargetSet> targets;
  MatchResult result;  // DAVID-U run under `targets`
  std::vector<double> demand;  // share of students demanding each college at the final iterate
  std::vector<Cutoffs> trace;  // iterate 0 is the DA matching priced in expected payoff
  std::vector<std::vector<CollegeId>> profiles;  // target per student (-1 none), one per iterate
  int cycle_start = -1;  // iterate whose target profile was revisited
  int ambiguous_resolved = 0;  // demand equalities settled toward the regular branch
  MarketClearing clearing;  // demand vs seats per student, both as shares of n
};

namespace detail {

// One target (or none) per student; the profile key for cycle detection.
inline std::vector<CollegeId> profile_of(const std::vector<TargetSet>& targets) {
  std::vector<CollegeId> key;
  key.reserve(targets.size());
  for (const auto& t : targets) key.push_back(t.targets.empty() ? kUnmatched : t.targets.front());
  return key;
}

struct DemandRound {
  std::vector<TargetSet> targets;
  std::vector<double> mass;
  int resolved = 0;
};

// Every student's best response to the thresholds she faces in the last run: she
// keeps her full truthful list and targets the demanded college when admission
// there needs disclosure.
inline DemandRound respond(const Economy& econ, const Table& expected, const SpdaInstance& inst,
                           const SpdaResult& run) {
  DemandRound out;
  out.targets = empty_targets(econ.num_students());
  out.mass.assign(static_cast<std::size_t>(econ.num_colleges), 0.0);
  for (const auto& s : econ.students) {
    const Cutoffs faced = personal_cutoffs(inst, run, s.id);
    bool resolved = false;
    const DemandOutcome d = demand_u(s, faced, expected[static_cast<std::size_t>(s.id)], econ.gamma_i,
                                     TieHandling::prefer_regular, &resolved);
    if (resolved) ++out.resolved;
    if (d.college == kUnmatched) continue;
    out.mass[static_cast<std::size_t>(d.college)] += 1.0;
    if (d.via_disclosure) out.targets[static_cast<std::size_t>(s.id)].targets = {d.college};
  }
  for (double& m : out.mass) m /= std::max(1, econ.num_students());
  return out;
}

}  // namespace detail

// Iterated best response for DAVID-U:
//   0. truthful DA; its proposals are re-priced in expected-payoff units.
//   k. students recompute demand against the thresholds they face and target the
//      demanded college if that needs disclosure; DAVID-U is rerun.
// Converged when a whole pass changes no target, which pins down the same
// assignment and cutoffs; cycle_detected when an older profile comes back.
inline EquilibriumResult solve_equilibrium_u(const Economy& econ, const EquilibriumOptions& opt = {}) {
  validate(econ);
  if (opt.max_iter < 1) throw BadParam("max_iter must be >= 1");
  const Table expected = opt.expected ? *opt.expected : expected_payoff_table(econ);

  EquilibriumResult out;
  out.rols = truthful_rols(econ);
  const MatchResult da = run_da(econ, out.rols);

  SpdaInstance probe_inst = da.instance;
  for (const auto& s : econ.students) {
    for (int c = 0; c < econ.num_colleges; ++c) {
      probe_inst.priorities.set(c, s.id, expected[static_cast<std::size_t>(s.id)][static_cast<std::size_t>(c)]);
    }
  }
  SpdaResult probe_run = da.run;
  out.trace.push_back(extract_cutoffs(probe_run.matching, probe_inst.priorities, probe_inst.capacities));

  std::vector<TargetSet> current = empty_targets(econ.num_students());
  std::optional<MatchResult> last;
  auto rerun = [&] {
    last = run_david_u(econ, out.rols, current, expected);
    probe_inst = last->instance;
    probe_run = last->run;
  };
  std::map<std::vector<CollegeId>, int> visited;
  visited[detail::profile_of(current)] = 0;
  out.profiles.push_back(detail::profile_of(current));

  for (int k = 1; k <= opt.max_iter; ++k) {
    out.iterations = k;
    bool changed = false;
    if (opt.update == UpdateRule::simultaneous) {
      detail::DemandRound round = detail::respond(econ, expected, probe_inst, probe_run);
      out.ambiguous_resolved += round.resolved;
      changed = detail::profile_of(round.targets) != detail::profile_of(current);
      current = std::move(round.targets);
    } else {
      for (const auto& s : econ.students) {
        const Cutoffs faced = personal_cutoffs(probe_inst, probe_run, s.id);
        bool resolved = false;
        const DemandOutcome d = demand_u(s, faced, expected[static_cast<std::size_t>(s.id)], econ.gamma_i,
                                         TieHandling::prefer_regular, &resolved);
        if (resolved) ++out.ambiguous_resolved;
        std::vector<CollegeId> want;
        if (d.via_disclosure) want = {d.college};
        auto& mine = current[static_cast<std::size_t>(s.id)].targets;
        if (want == mine) continue;
        mine = want;
        changed = true;
        rerun();
      }
    }
    if (!changed && last) {
      out.status = EquilibriumStatus::converged;
      break;
    }
    if (!last || opt.update == UpdateRule::simultaneous) rerun();
    out.trace.push_back(last->cutoffs);
    const auto key = detail::profile_of(current);
    out.profiles.push_back(key);
    if (!changed) continue;
    const auto seen = visited.find(key);
    if (seen != visited.end()) {
      out.status = EquilibriumStatus::cycle_detected;
      out.cycle_start = seen->second;
      break;
    }
    visited[key] = k;
  }
  if (!last) rerun();

  out.targets = current;
  out.result = *last;
  out.cutoffs = last->cutoffs;
  out.matching = last->run.matching;
  out.demand = detail::respond(econ, expected, last->instance, last->run).mass;
  std::vector<double> supply;
  for (int cap : econ.capacities) supply.push_back(static_cast<double>(cap) / std::max(1, econ.num_students()));
  out.clearing = check_market_clearing(out.cutoffs, out.demand, supply, opt.tol);
  return out;
}

struct QuotaEquivalence {
  std::vector<double> delta;
  std::vector<int> disclosure_seats;
  MatchResult quota_result;
  std::vector<char> agrees;  // per student
  int agreeing = 0;

  double agreement() const {
    return agrees.empty() ? 1.0 : static_cast<double>(agreeing) / static_cast<double>(agrees.size());
  }
};

// Disclosure shares under which DAVID-Q reproduces a DAVID-U equilibrium:
// delta_c = (students admitted to c via disclosure) / S_c, with every targeter
// listing c^vid right after c^r.
inline QuotaEquivalence derive_equivalent_quotas(const EquilibriumResult& eq, const Economy& econ) {
  if (eq.status != EquilibriumStatus::converged) {
    throw NotConverged(std::string("equilibrium status is ") + to_string(eq.status));
  }
  QuotaEquivalence out;
  const auto c_count = static_cast<std::size_t>(econ.num_colleges);
  std::vector<int> via(c_count, 0);
  for (std::size_t i = 0; i < eq.result.college_of.size(); ++i) {
    if (eq.result.via_disclosure[i]) ++via[static_cast<std::size_t>(eq.result.college_of[i])];
  }
  out.delta.assign(c_count, 0.0);
  for (std::size_t c = 0; c < c_count; ++c) {
    const int seats = econ.capacities[c];
    out.delta[c] = seats > 0 ? static_cast<double>(via[c]) / seats : 0.0;
  }
  Economy quota_econ = econ;
  quota_econ.delta = out.delta;
  out.disclosure_seats = expand_subcolleges(quota_econ).disclosure;

  std::vector<SubRol> lists;
  lists.reserve(eq.rols.size());
  for (std::size_t i = 0; i < eq.rols.size(); ++i) {
    lists.push_back(canonical_sub_rol(eq.rols[i], eq.targets[i].targets));
  }
  out.quota_result = run_david_q(quota_econ, lists);
  out.agrees.assign(eq.rols.size(), 0);
  for (std::size_t i = 0; i < eq.rols.size(); ++i) {
    if (out.quota_result.college_of[i] == eq.result.college_of[i]) {
      out.agrees[i] = 1;
      ++out.agreeing;
    }
  }
  return out;
}

}  // namespace david
