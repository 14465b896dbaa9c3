#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "david/econ_model.hpp"
#include "david/equilibrium.hpp"
#include "david/error.hpp"
#include "david/mechanisms.hpp"

namespace david {

// At least one sweep point had no converged replication.
class AllDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Welfare {
  double student_mean = 0.0;  // per student, net of application costs
  double college_mean = 0.0;  // per admitted student, net of screening costs
};

inline Welfare compute_welfare(const MatchResult& r, const Economy& econ) {
  Welfare w;
  if (econ.num_students() > 0) w.student_mean = r.total_net_utility() / econ.num_students();
  const int admitted = r.num_admitted();
  if (admitted > 0) w.college_mean = r.total_net_payoff() / admitted;
  return w;
}

// Shortest round-trip decimal form; NaN prints as an empty field.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Sweep configuration

inline const std::vector<std::string>& sweep_axis_names() {
  static const std::vector<std::string> names{"gamma_c", "gamma_i", "rho_ev", "rho_ew", "rho_wv"};
  return names;
}

struct SweepConfig {
  int replications = 100;
  int n_students = 100;
  int n_colleges = 6;
  int seats_per_college = 10;
  double gamma_i = 0.0;
  double gamma_c = 0.0;
  GaussianTypeParams model;
  std::map<std::string, std::vector<double>> axes;  // keys from sweep_axis_names(), iterated sorted
  std::uint64_t seed = 1;
  int max_iter = 1000;
};

inline void validate(const SweepConfig& cfg) {
  if (cfg.replications < 1) throw BadParam("replications must be >= 1");
  if (cfg.n_students < 1) throw BadParam("n_students must be >= 1");
  if (cfg.n_colleges < 1) throw BadParam("n_colleges must be >= 1");
  if (cfg.seats_per_college < 0) throw BadParam("seats_per_college must be >= 0");
  if (!(cfg.gamma_i >= 0.0) || !(cfg.gamma_c >= 0.0)) throw BadParam("costs must be non-negative");
  if (cfg.max_iter < 1) throw BadParam("max_iter must be >= 1");
  const auto& known = sweep_axis_names();
  for (const auto& [name, values] : cfg.axes) {
    if (std::find(known.begin(), known.end(), name) == known.end()) throw BadParam("unknown sweep axis " + name);
    if (values.empty()) throw BadParam("sweep axis " + name + " has no values");
  }
}

struct SweepPoint {
  int index = 0;
  double gamma_i = 0.0;
  double gamma_c = 0.0;
  GaussianTypeParams params;
};

// Cartesian product of the axes in name order; the last name varies fastest.
inline std::vector<SweepPoint> sweep_points(const SweepConfig& cfg) {
  validate(cfg);
  std::vector<SweepPoint> out;
  std::vector<std::pair<std::string, std::vector<double>>> axes(cfg.axes.begin(), cfg.axes.end());
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    SweepPoint p;
    p.index = static_cast<int>(out.size());
    p.gamma_i = cfg.gamma_i;
    p.gamma_c = cfg.gamma_c;
    p.params = cfg.model;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const double x = axes[a].second[idx[a]];
      const auto& name = axes[a].first;
      if (name == "gamma_i") p.gamma_i = x;
      if (name == "gamma_c") p.gamma_c = x;
      if (name == "rho_ew") p.params.rho_ew = x;
      if (name == "rho_ev") p.params.rho_ev = x;
      if (name == "rho_wv") p.params.rho_wv = x;
    }
    out.push_back(p);
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

struct WelfareRow {
  double gamma_i = 0.0;
  double gamma_c = 0.0;
  double rho_ew = 0.0;
  double rho_ev = 0.0;
  double rho_wv = 0.0;
  double stud_da = std::numeric_limits<double>::quiet_NaN();
  double stud_u = std::numeric_limits<double>::quiet_NaN();
  double coll_da = std::numeric_limits<double>::quiet_NaN();
  double coll_u = std::numeric_limits<double>::quiet_NaN();
  double stud_diff = std::numeric_limits<double>::quiet_NaN();
  double coll_diff = std::numeric_limits<double>::quiet_NaN();
  double share_disclose = std::numeric_limits<double>::quiet_NaN();
  double share_converged = 0.0;
  int reps = 0;
  int ambiguous_reps = 0;  // converged replications whose demand hit an exact tie
};

inline constexpr const char* kWelfareCsvHeader =
    "gamma_i,gamma_c,rho_ew,rho_ev,rho_wv,stud_da,stud_u,coll_da,coll_u,stud_diff,coll_diff,share_disclose,"
    "share_converged,reps";

inline std::string to_csv_line(const WelfareRow& r) {
  const double cols[] = {r.gamma_i, r.gamma_c, r.rho_ew,   r.rho_ev,    r.rho_wv,         r.stud_da,
                         r.stud_u,  r.coll_da, r.coll_u,   r.stud_diff, r.coll_diff,      r.share_disclose,
                         r.share_converged};
  std::string line;
  for (double x : cols) line += format_number(x) + ",";
  return line + std::to_string(r.reps);
}

inline std::string to_csv(const std::vector<WelfareRow>& rows) {
  std::string out = std::string(kWelfareCsvHeader) + "\n";
  for (const auto& r : rows) out += to_csv_line(r) + "\n";
  return out;
}

struct SkippedPoint {
  SweepPoint point;
  std::string reason;
};

struct SweepResult {
  std::vector<WelfareRow> rows;
  std::vector<SkippedPoint> skipped;
  std::vector<int> diverged_points;  // indices into rows
};

struct Replication {
  bool converged = false;
  int ambiguous = 0;
  Welfare da;
  Welfare u;
  double share_disclose = 0.0;
};

// One population: truthful DA and the DAVID-U fixed point on the same draw.
inline Replication run_replication(const GaussianTypeModel& model, const SweepConfig& cfg, double gamma_i,
                                   double gamma_c, std::uint64_t seed) {
  Economy econ;
  econ.students = sample_students(model, cfg.n_students, cfg.n_colleges, seed);
  econ.num_colleges = cfg.n_colleges;
  econ.capacities.assign(static_cast<std::size_t>(cfg.n_colleges), cfg.seats_per_college);
  econ.gamma_i = gamma_i;
  econ.gamma_c = gamma_c;
  econ.model = model;

  Replication rep;
  const MatchResult da = run_da(econ, truthful_rols(econ));
  EquilibriumOptions opt;
  opt.max_iter = cfg.max_iter;
  const EquilibriumResult eq = solve_equilibrium_u(econ, opt);
  rep.converged = eq.status == EquilibriumStatus::converged;
  rep.ambiguous = eq.ambiguous_resolved;
  rep.da = compute_welfare(da, econ);
  rep.u = compute_welfare(eq.result, econ);
  int disclosing = 0;
  for (const auto& t : eq.targets) disclosing += t.targets.empty() ? 0 : 1;
  rep.share_disclose = static_cast<double>(disclosing) / cfg.n_students;
  return rep;
}

// Every (point, replication) pair gets seed derive_seed(seed, point, rep). Work is
// spread over `jobs` threads but aggregated in index order, so the output does not
// depend on the thread count.
inline SweepResult run_welfare_sweep(const SweepConfig& cfg, int jobs = 1) {
  const auto points = sweep_points(cfg);
  SweepResult out;

  struct Task {
    std::size_t point;
    int rep;
  };
  std::vector<std::optional<GaussianTypeModel>> models(points.size());
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < points.size(); ++p) {
    try {
      models[p] = build_model(points[p].params);
    } catch (const std::invalid_argument& e) {
      out.skipped.push_back({points[p], e.what()});
      continue;
    }
    for (int r = 0; r < cfg.replications; ++r) tasks.push_back({p, r});
  }

  std::vector<Replication> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const auto& t = tasks[k];
      const auto& pt = points[t.point];
      results[k] = run_replication(*models[t.point], cfg, pt.gamma_i, pt.gamma_c,
                                   derive_seed(cfg.seed, static_cast<std::uint64_t>(pt.index),
                                               static_cast<std::uint64_t>(t.rep)));
    }
  };
  const int threads = std::max(1, std::min(jobs, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < threads; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::size_t k = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (!models[p]) continue;
    const auto& pt = points[p];
    WelfareRow row;
    row.gamma_i = pt.gamma_i;
    row.gamma_c = pt.gamma_c;
    row.rho_ew = pt.params.rho_ew;
    row.rho_ev = pt.params.rho_ev;
    row.rho_wv = pt.params.rho_wv;
    row.reps = cfg.replications;
    int converged = 0;
    double sd = 0, su = 0, cd = 0, cu = 0, share = 0;
    for (int r = 0; r < cfg.replications; ++r, ++k) {
      const auto& rep = results[k];
      if (!rep.converged) continue;
      ++converged;
      if (rep.ambiguous > 0) ++row.ambiguous_reps;
      sd += rep.da.student_mean;
      su += rep.u.student_mean;
      cd += rep.da.college_mean;
      cu += rep.u.college_mean;
      share += rep.share_disclose;
    }
    row.share_converged = static_cast<double>(converged) / cfg.replications;
    if (converged > 0) {
      row.stud_da = sd / converged;
      row.stud_u = su / converged;
      row.coll_da = cd / converged;
      row.coll_u = cu / converged;
      row.stud_diff = row.stud_da - row.stud_u;
      row.coll_diff = row.coll_da - row.coll_u;
      row.share_disclose = share / converged;
    } else {
      out.diverged_points.push_back(static_cast<int>(out.rows.size()));
    }
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Least squares y = a + b x, with the usual t statistic for b.

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double t = 0.0;
  int n = 0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw BadParam("line fit needs at least 3 paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw BadParam("line fit needs at least two distinct x values");
  LinearFit f;
  f.n = static_cast<int>(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  f.t = f.slope_se > 0 ? f.slope / f.slope_se : (f.slope == 0 ? 0.0 : std::copysign(kInf, f.slope));
  return f;
}

// ---------------------------------------------------------------------------
// The two-student, two-college worked example

// Ann (0) and Bob (1); college A is 0, B is 1. Colleges rank undisclosed students
// by e, so the expected-payoff table equals e.
inline Economy example1_economy() {
  Economy econ;
  econ.num_colleges = 2;
  econ.capacities = {1, 1};
  econ.gamma_i = 1.0;
  econ.gamma_c = 1.0;
  econ.students = {
      {0, {4.0, 1.0}, {3.0, 2.0}, {2.0, 2.0}},
      {1, {3.0, 2.0}, {2.0, 3.0}, {3.0, 3.0}},
  };
  econ.expected_payoff = Table{{2.0, 2.0}, {3.0, 3.0}};
  return econ;
}

struct ScenarioTotals {
  std::string name;
  MatchResult result;
  double students = 0.0;
  double colleges = 0.0;
};

struct Example1Report {
  std::vector<ScenarioTotals> scenarios;  // DA, optimal disclosure, everyone screened
  std::string table;
};

// 1. truthful DA; 2. the DAVID-U fixed point; 3. every student also discloses to the
// college that admits her, so each college screens everyone it admits.
inline Example1Report reproduce_example1() {
  const Economy econ = example1_economy();
  const auto rols = truthful_rols(econ);
  Example1Report rep;
  auto add = [&](std::string name, MatchResult r) {
    const double s = r.total_net_utility();
    const double c = r.total_net_payoff();
    rep.scenarios.push_back({std::move(name), std::move(r), s, c});
  };
  add("da", run_da(econ, rols));
  const EquilibriumResult eq = solve_equilibrium_u(econ);
  add("david-u optimal disclosure", eq.result);
  auto everyone = empty_targets(econ.num_students());
  for (std::size_t i = 0; i < everyone.size(); ++i) {
    if (eq.result.college_of[i] != kUnmatched) everyone[i].targets = {eq.result.college_of[i]};
  }
  add("david-u everyone screened", run_david_u(econ, rols, everyone));

  static const char* names[] = {"Ann", "Bob"};
  static const char* colleges[] = {"A", "B"};
  std::ostringstream os;
  os << "scenario                     Ann  Bob  students  colleges\n";
  for (const auto& sc : rep.scenarios) {
    std::string line = sc.name;
    line.resize(29, ' ');
    os << line;
    for (std::size_t i = 0; i < 2; ++i) {
      const CollegeId c = sc.result.college_of[i];
      std::string cell = c == kUnmatched ? "-" : colleges[c];
      if (!sc.result.disclosed_to[i].empty()) cell += "*";
      cell.resize(5, ' ');
      os << cell;
    }
    os << format_number(sc.students) << std::string(10 - format_number(sc.students).size(), ' ')
       << format_number(sc.colleges) << "\n";
  }
  os << "(* = disclosed; " << names[0] << " is student 0, " << names[1] << " is student 1)\n";
  rep.table = os.str();
  return rep;
}

}  // namespace david
