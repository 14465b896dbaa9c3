#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "david/demand.hpp"
#include "david/econ_model.hpp"
#include "david/equilibrium.hpp"
#include "david/mechanisms.hpp"
#include "david/properties.hpp"

// Randomized batteries behind `check --suite ...` and the acceptance runner.
namespace david::suites {

inline RandomEconomySpec small_spec() {
  RandomEconomySpec spec;
  spec.min_students = 2;
  spec.max_students = kMaxExhaustiveStudents;
  spec.min_colleges = 2;
  spec.max_colleges = kMaxExhaustiveColleges;
  spec.max_capacity = 2;
  return spec;
}

struct StabilityReports {
  PropertyReport da;       // college level, eligibility priorities
  PropertyReport quota;    // sub-college level; cross-quota envy under `permitted`
  PropertyReport disclosure;
};

// Random markets with up to 20 students and 5 colleges and random (not
// necessarily truthful) reports for each mechanism.
inline StabilityReports stability(int instances, std::uint64_t seed) {
  StabilityReports out;
  out.da.property = "justified-envy/college";
  out.quota.property = "justified-envy/quota";
  out.disclosure.property = "justified-envy/with-disclosure";
  for (int k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    const Economy econ = random_economy(s);
    std::mt19937_64 rng(derive_seed(s, 1));
    const int n = econ.num_students();
    std::vector<RankOrderedList> rols;
    std::vector<SubRol> subs;
    for (int i = 0; i < n; ++i) rols.push_back(random_rol(i, econ.num_colleges, rng));
    for (int i = 0; i < n; ++i) subs.push_back(random_sub_rol(i, econ.num_colleges, rng));
    const auto targets = random_targets(n, econ.num_colleges, rng);
    out.da.merge(check_justified_envy(run_da(econ, rols), econ, EnvyVariant::college, s));
    out.quota.merge(check_justified_envy(run_david_q(econ, subs), econ, EnvyVariant::quota, s));
    out.disclosure.merge(check_justified_envy(run_david_u(econ, rols, targets), econ, EnvyVariant::with_disclosure, s));
  }
  return out;
}

struct StrategyproofReports {
  PropertyReport da;
  PropertyReport david_q;
  PropertyReport david_u;
  PropertyReport control;  // immediate acceptance; expected to fire
  int control_instances_fired = 0;
};

inline StrategyproofReports strategyproofness(int instances, std::uint64_t seed) {
  StrategyproofReports out;
  out.da.property = "strategyproofness/da";
  out.david_q.property = "strategyproofness/david-q";
  out.david_u.property = "strategyproofness/david-u";
  out.control.property = "strategyproofness/immediate-acceptance";
  auto run_control = [&](const Economy& econ, std::uint64_t s) {
    const PropertyReport r = check_strategyproofness(econ, Rule::immediate_acceptance, {}, s);
    if (!r.pass()) ++out.control_instances_fired;
    out.control.merge(r);
  };
  run_control(three_student_instance(), 0);
  for (int k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    const Economy econ = random_economy(s, small_spec());
    std::mt19937_64 rng(derive_seed(s, 2));
    AuxiliaryActions aux;
    aux.targets = random_targets(econ.num_students(), econ.num_colleges, rng, 0.4);
    for (const auto& t : random_targets(econ.num_students(), econ.num_colleges, rng, 0.4)) aux.vid.push_back(t.targets);
    out.da.merge(check_strategyproofness(econ, Rule::da, {}, s));
    out.david_q.merge(check_strategyproofness(econ, Rule::david_q, aux, s));
    out.david_u.merge(check_strategyproofness(econ, Rule::david_u, aux, s));
    run_control(econ, s);
  }
  return out;
}

struct SafetyReports {
  PropertyReport david_q;
  std::vector<UnsafetyWitness> witness;  // found on the bundled DAVID-U instance
  int random_u_instances_unsafe = 0;     // random DAVID-U markets where some extra target hurts
};

inline SafetyReports disclosure_safety(int instances, std::uint64_t seed) {
  SafetyReports out;
  out.david_q.property = "disclosure-safety/david-q";
  for (int k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    const Economy econ = random_economy(s, small_spec());
    std::mt19937_64 rng(derive_seed(s, 3));
    std::vector<SubRol> others;
    for (const auto& st : econ.students) {
      std::vector<CollegeId> vid;
      for (int c = 0; c < econ.num_colleges; ++c) {
        if (std::bernoulli_distribution(0.4)(rng)) vid.push_back(c);
      }
      others.push_back(canonical_sub_rol(truthful_rol(st), vid));
    }
    out.david_q.merge(check_disclosure_safety_q(econ, others, s));
    if (!find_david_u_unsafety(econ, truthful_rols(econ), empty_targets(econ.num_students())).empty()) {
      ++out.random_u_instances_unsafe;
    }
  }
  const Economy w = david_u_witness_economy();
  out.witness = find_david_u_unsafety(w, truthful_rols(w), empty_targets(w.num_students()));
  return out;
}

struct Lemma1Reports {
  PropertyReport david_u;
  PropertyReport david_q;
};

// Gaussian types around mean 1; grid levels straddle the bulk of e, w and E[w|e].
inline Lemma1Reports lemma1(int types, std::uint64_t seed) {
  GaussianTypeParams p;
  p.rho_ew = 0.5;
  p.rho_wv = 0.5;
  p.rho_ev = 0.25;
  const GaussianTypeModel model = build_model(p);
  const double gamma_i = 0.05;
  const CutoffGrid grid{{-kInf, 0.85, 0.95, 1.05, 1.15}};

  Lemma1Reports out;
  const auto u_types = sample_students(model, types, 3, derive_seed(seed, 0x4C31));
  Table ew;
  for (const auto& s : u_types) {
    std::vector<double> row;
    for (double e : s.e) row.push_back(conditional_expected_payoff(model, e));
    ew.push_back(row);
  }
  out.david_u = check_lemma1_u(u_types, ew, gamma_i, grid, seed);
  const auto q_types = sample_students(model, types, 2, derive_seed(seed, 0x4C32));
  out.david_q = check_lemma1_q(q_types, gamma_i, grid, seed);
  return out;
}

struct CycleReports {
  CycleTranscript bundled;
  CycleTranscript modified;  // w_2 below e_1
};

inline CycleReports cycle() {
  CycleReports out;
  out.bundled = detect_cycle_example();
  Economy econ = cycle_example_economy();
  econ.students[1].w[0] = 0.45;
  out.modified = best_response_dynamics(econ);
  return out;
}

}  // namespace david::suites
