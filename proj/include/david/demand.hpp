#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "david/econ_model.hpp"
#include "david/error.hpp"
#include "david/mechanisms.hpp"
#include "david/spda.hpp"

namespace david {

// Individual demand: the college a type expects admission at, and whether that
// admission relies on disclosure.
struct DemandOutcome {
  CollegeId college = kUnmatched;
  bool via_disclosure = false;

  bool operator==(const DemandOutcome&) const = default;
};

// Whether a college is reachable on the regular criterion and/or with disclosure.
struct CollegeAccess {
  Access regular = Access::no;
  Access disclosure = Access::no;
};

// raise: equality cases and multiple satisfied branches throw AmbiguousDemand.
// prefer_regular: regular ties count as admitted, disclosure ties as rejected, and the
// remaining choice goes to the best net utility, regular before disclosure.
enum class TieHandling { raise, prefer_regular };

namespace detail {

inline DemandOutcome best_net_option(std::span<const double> v, std::span<const CollegeAccess> access,
                                     double gamma) {
  DemandOutcome best;
  double best_net = 0.0;
  bool best_regular = false;
  for (std::size_t c = 0; c < v.size(); ++c) {
    const bool reg = access[c].regular != Access::no;
    const bool disc = access[c].disclosure == Access::yes;
    if (!reg && !disc) continue;
    const double net = reg ? v[c] : v[c] - gamma;
    if (net > best_net || (net == best_net && net > 0.0 && reg && !best_regular)) {
      best = {static_cast<CollegeId>(c), !reg};
      best_net = net;
      best_regular = reg;
    }
  }
  return best;
}

}  // namespace detail

// Evaluates the eligibility (epsilon) and disclosure (sigma) indicators literally.
// With c' ranging over the other colleges:
//   eps_c   = 1(v_c > 0) 1(regular ok at c) prod_c' epshat_{c,c'}
//   sigma_c = 1(v_c > gamma) 1(regular fails at c) 1(disclosure ok at c) prod_c' sighat_{c,c'}
//   epshat  = v_c > v_c'  or  (c' fails both ways)  or  (c' fails regularly and v_c > v_c' - gamma)
//   sighat  = v_c - gamma > v_c'  or  (c' fails both ways)  or  (c' fails regularly and v_c > v_c')
inline DemandOutcome demand_from_access(std::span<const double> v, std::span<const CollegeAccess> access,
                                        double gamma, TieHandling ties = TieHandling::raise,
                                        bool* resolved = nullptr) {
  if (access.size() != v.size()) throw InvalidInstance("access vector must match utility vector");
  const std::size_t n = v.size();
  bool tie = false;
  for (std::size_t c = 0; c < n; ++c) {
    if (v[c] > 0.0 && (access[c].regular == Access::tie || access[c].disclosure == Access::tie)) tie = true;
  }
  auto reg_ok = [&](std::size_t c) { return access[c].regular == Access::yes; };
  auto reg_fail = [&](std::size_t c) { return access[c].regular == Access::no; };
  auto disc_ok = [&](std::size_t c) { return access[c].disclosure == Access::yes; };
  auto disc_fail = [&](std::size_t c) { return access[c].disclosure == Access::no; };

  std::vector<DemandOutcome> satisfied;
  for (std::size_t c = 0; c < n; ++c) {
    bool eps = v[c] > 0.0 && reg_ok(c);
    bool sig = v[c] > gamma && reg_fail(c) && disc_ok(c);
    for (std::size_t o = 0; o < n && (eps || sig); ++o) {
      if (o == c) continue;
      const bool unreachable = reg_fail(o) && disc_fail(o);
      eps = eps && (v[c] > v[o] || unreachable || (reg_fail(o) && v[c] > v[o] - gamma));
      sig = sig && (v[c] - gamma > v[o] || unreachable || (reg_fail(o) && v[c] > v[o]));
    }
    if (eps) satisfied.push_back({static_cast<CollegeId>(c), false});
    if (sig) satisfied.push_back({static_cast<CollegeId>(c), true});
  }

  // An empty system while some option has positive net value only happens on an
  // exact utility tie.
  const bool dangling = satisfied.empty() && !tie && detail::best_net_option(v, access, gamma).college != kUnmatched;
  const bool ambiguous = tie || satisfied.size() > 1 || dangling;
  if (resolved) *resolved = false;
  if (!ambiguous) return satisfied.empty() ? DemandOutcome{} : satisfied.front();
  if (ties == TieHandling::raise) {
    throw AmbiguousDemand(tie ? "cutoff comparison hit an exact equality"
                              : "indicator system does not select a single option");
  }
  if (resolved) *resolved = true;
  std::vector<CollegeAccess> settled(access.begin(), access.end());
  for (auto& a : settled) {
    if (a.regular == Access::tie) a.regular = Access::yes;
    if (a.disclosure == Access::tie) a.disclosure = Access::no;
  }
  return detail::best_net_option(v, settled, gamma);
}

// DA demand: regular admission only (disclosure thresholds at +inf).
inline DemandOutcome demand_da(const StudentType& theta, const Cutoffs& p,
                               TieHandling ties = TieHandling::raise, bool* resolved = nullptr) {
  const std::size_t n = theta.num_colleges();
  if (p.size() != n) throw InvalidInstance("DA demand needs one cutoff per college");
  std::vector<CollegeAccess> access(n);
  for (std::size_t c = 0; c < n; ++c) {
    access[c].regular = clears(theta.e[c], theta.id, p.value[c], p.holder[c]);
  }
  return demand_from_access(theta.v, access, 0.0, ties, resolved);
}

inline DemandOutcome demand_da(const StudentType& theta, const std::vector<double>& p) {
  return demand_da(theta, Cutoffs(p));
}

// DAVID-Q demand. p_sub holds the C regular cutoffs P^r followed by the C disclosure
// cutoffs P^d.
inline DemandOutcome demand_q(const StudentType& theta, const Cutoffs& p_sub, double gamma_i,
                              TieHandling ties = TieHandling::raise, bool* resolved = nullptr) {
  const std::size_t n = theta.num_colleges();
  if (p_sub.size() != 2 * n) throw InvalidInstance("DAVID-Q demand needs 2C cutoffs");
  std::vector<CollegeAccess> access(n);
  for (std::size_t c = 0; c < n; ++c) {
    access[c].regular = clears(theta.e[c], theta.id, p_sub.value[c], p_sub.holder[c]);
    access[c].disclosure = clears(theta.w[c], theta.id, p_sub.value[n + c], p_sub.holder[n + c]);
  }
  return demand_from_access(theta.v, access, gamma_i, ties, resolved);
}

inline DemandOutcome demand_q(const StudentType& theta, const std::vector<double>& p_sub, double gamma_i) {
  return demand_q(theta, Cutoffs(p_sub), gamma_i);
}

// DAVID-U demand against a single joint cutoff per college, in expected-payoff units.
// ew[c] = E[w_c | e_c] for this type.
inline DemandOutcome demand_u(const StudentType& theta, const Cutoffs& pi, std::span<const double> ew,
                              double gamma_i, TieHandling ties = TieHandling::raise,
                              bool* resolved = nullptr) {
  const std::size_t n = theta.num_colleges();
  if (pi.size() != n || ew.size() != n) throw InvalidInstance("DAVID-U demand needs C cutoffs and C expectations");
  std::vector<CollegeAccess> access(n);
  for (std::size_t c = 0; c < n; ++c) {
    access[c].regular = clears(ew[c], theta.id, pi.value[c], pi.holder[c]);
    access[c].disclosure = clears(theta.w[c], theta.id, pi.value[c], pi.holder[c]);
  }
  return demand_from_access(theta.v, access, gamma_i, ties, resolved);
}

inline DemandOutcome demand_u(const StudentType& theta, const std::vector<double>& pi,
                              const std::vector<double>& ew, double gamma_i) {
  return demand_u(theta, Cutoffs(pi), ew, gamma_i);
}

struct DemandParams {
  double gamma_i = 0.0;
  const Table* expected = nullptr;  // required for DAVID-U
  TieHandling ties = TieHandling::raise;
};

// Share of students demanding each college: D_c = (1/n) sum_i 1[demand_i = c].
inline std::vector<double> aggregate_demand(const std::vector<StudentType>& students, const Cutoffs& cutoffs,
                                            Mechanism mechanism, const DemandParams& params = {}) {
  if (students.empty()) return {};
  const std::size_t c_count = students.front().num_colleges();
  std::vector<double> mass(c_count, 0.0);
  for (const auto& s : students) {
    DemandOutcome d;
    switch (mechanism) {
      case Mechanism::da:
        d = demand_da(s, cutoffs, params.ties);
        break;
      case Mechanism::david_q:
        d = demand_q(s, cutoffs, params.gamma_i, params.ties);
        break;
      case Mechanism::david_u:
        if (!params.expected) throw InvalidInstance("DAVID-U aggregate demand needs an expected-payoff table");
        d = demand_u(s, cutoffs, (*params.expected)[static_cast<std::size_t>(s.id)], params.gamma_i, params.ties);
        break;
    }
    if (d.college != kUnmatched) mass[static_cast<std::size_t>(d.college)] += 1.0;
  }
  for (double& m : mass) m /= static_cast<double>(students.size());
  return mass;
}

struct MarketClearing {
  bool clears = false;
  std::vector<double> residuals;  // D_c - S_c
};

// Clearing: D_c <= S_c (+tol) everywhere, and |D_c - S_c| <= tol wherever the cutoff
// is finite.
inline MarketClearing check_market_clearing(const Cutoffs& cutoffs, const std::vector<double>& demand,
                                            const std::vector<double>& supply, double tol) {
  if (demand.size() != supply.size() || cutoffs.size() != supply.size()) {
    throw InvalidInstance("cutoffs, demand and supply must have the same length");
  }
  MarketClearing out;
  out.clears = true;
  for (std::size_t c = 0; c < supply.size(); ++c) {
    const double r = demand[c] - supply[c];
    out.residuals.push_back(r);
    if (r > tol) out.clears = false;
    if (std::isfinite(cutoffs.value[c]) && std::abs(r) > tol) out.clears = false;
  }
  return out;
}

}  // namespace david
