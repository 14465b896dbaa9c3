// Command-line front end: solve, equilibrium, check, simulate, examples, sample.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "david/david.hpp"

namespace {

using namespace david;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Instance read_instance(const std::string& path) {
  std::istringstream in(read_file(path));
  return load_instance(in);
}

std::string cutoff_list(const Cutoffs& c) {
  std::string s;
  for (std::size_t k = 0; k < c.size(); ++k) s += (k ? " " : "") + format_number(c.value[k]);
  return s;
}

void print_result(const MatchResult& r) {
  std::cout << "mechanism " << to_string(r.mechanism) << "\n";
  std::cout << "student  college  via_disclosure  applications  net_utility\n";
  for (std::size_t i = 0; i < r.college_of.size(); ++i) {
    std::printf("%7zu  %7s  %14d  %12d  %s\n", i,
                r.college_of[i] == kUnmatched ? "-" : std::to_string(r.college_of[i]).c_str(), r.via_disclosure[i],
                r.applications_sent[i], format_number(r.net_utility[i]).c_str());
  }
  std::cout << "cutoffs (per slot): " << cutoff_list(r.cutoffs) << "\n";
  std::cout << "screened (per college):";
  for (int m : r.messages_screened) std::cout << ' ' << m;
  std::cout << "\nnet payoff (per college):";
  for (double p : r.net_payoff) std::cout << ' ' << format_number(p);
  std::cout << "\ntotal net student utility " << format_number(r.total_net_utility()) << "\ntotal net college payoff "
            << format_number(r.total_net_payoff()) << "\n";
}

int cmd_solve(const std::string& mechanism, const std::string& path, const std::string& out_path) {
  const Instance inst = read_instance(path);
  MatchResult r;
  if (mechanism == "da") {
    r = run_da(inst.economy, inst.rols);
  } else if (mechanism == "david-q") {
    r = run_david_q(inst.economy, inst.sub_rols);
  } else {
    r = run_david_u(inst.economy, inst.rols, inst.targets);
  }
  if (r.run.ties_broken) std::cout << "note: equal priority scores were ordered by student id\n";
  print_result(r);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  write_match_csv(out, r);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_equilibrium(const std::string& path, double tol, int max_iter, const std::string& trace_path) {
  const Instance inst = read_instance(path);
  EquilibriumOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  const EquilibriumResult eq = solve_equilibrium_u(inst.economy, opt);
  std::cout << "status " << to_string(eq.status) << " after " << eq.iterations << " iteration(s)\n";
  if (eq.cycle_start >= 0) std::cout << "profile of iterate " << eq.cycle_start << " came back\n";
  if (eq.ambiguous_resolved > 0) {
    std::cout << "note: " << eq.ambiguous_resolved << " demand tie(s) settled toward no disclosure\n";
  }
  std::cout << "cutoffs " << cutoff_list(eq.cutoffs) << "\n";
  std::cout << "market clearing " << (eq.clearing.clears ? "yes" : "no") << " (tol " << format_number(tol) << ")\n";
  std::cout << "targets:";
  for (const auto& t : eq.targets) {
    if (!t.targets.empty()) std::cout << " " << t.owner << "->" << t.targets.front();
  }
  std::cout << "\n";
  print_result(eq.result);
  if (eq.status == EquilibriumStatus::converged) {
    const QuotaEquivalence q = derive_equivalent_quotas(eq, inst.economy);
    std::cout << "equivalent disclosure shares:";
    for (double d : q.delta) std::cout << ' ' << format_number(d);
    std::cout << "\nDAVID-Q agreement " << q.agreeing << "/" << q.agrees.size() << "\n";
  }
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw std::runtime_error("cannot write " + trace_path);
    write_cutoff_trace_csv(out, eq.trace);
    std::cout << "wrote " << trace_path << "\n";
  }
  return 0;
}

void print_report(const PropertyReport& r, bool expect_violations = false) {
  const bool ok = expect_violations ? !r.pass() : r.pass();
  std::cout << (ok ? "ok    " : "FAIL  ") << r.property << ": " << r.instances << " instance(s), "
            << r.violations.size() << " violation(s)";
  if (!r.permitted.empty()) std::cout << ", " << r.permitted.size() << " permitted finding(s)";
  if (r.skipped > 0) std::cout << ", " << r.skipped << " tie(s) skipped";
  if (expect_violations) std::cout << " (negative control, must fire)";
  std::cout << "\n";
  if (!expect_violations) {
    for (std::size_t k = 0; k < r.violations.size() && k < 5; ++k) {
      const auto& v = r.violations[k];
      std::cout << "      seed " << v.seed << " student " << v.student << ": " << v.description << " ("
                << format_number(v.before) << " -> " << format_number(v.after) << ")\n";
    }
  }
}

void print_transcript(const CycleTranscript& t) {
  for (std::size_t k = 0; k < t.profiles.size(); ++k) {
    std::cout << (k ? " -> " : "      ") << "(";
    for (std::size_t i = 0; i < t.profiles[k].size(); ++i) {
      std::cout << (i ? "," : "") << (t.profiles[k][i] == kUnmatched ? "-" : std::to_string(t.profiles[k][i]));
    }
    std::cout << ")";
  }
  std::cout << "\n";
}

int cmd_check(const std::string& suite, int instances, std::uint64_t seed) {
  bool ok = true;
  auto all = suite == "all";
  if (all || suite == "envy") {
    const auto r = suites::stability(instances, seed);
    for (const auto* p : {&r.da, &r.quota, &r.disclosure}) {
      print_report(*p);
      ok = ok && p->pass();
    }
  }
  if (all || suite == "strategyproof") {
    const auto r = suites::strategyproofness(instances, seed);
    for (const auto* p : {&r.da, &r.david_q, &r.david_u}) {
      print_report(*p);
      ok = ok && p->pass();
    }
    print_report(r.control, true);
    std::cout << "      fired on " << r.control_instances_fired << " instance(s)\n";
    ok = ok && r.control_instances_fired > 0;
  }
  if (all || suite == "safety") {
    const auto r = suites::disclosure_safety(instances, seed);
    print_report(r.david_q);
    ok = ok && r.david_q.pass();
    const bool fired = !r.witness.empty();
    std::cout << (fired ? "ok    " : "FAIL  ") << "disclosure-safety/david-u witness: ";
    if (fired) {
      const auto& w = r.witness.front();
      std::cout << "student " << w.student << " adds target " << w.added_target << ", utility "
                << format_number(w.before) << " -> " << format_number(w.after) << "\n";
    } else {
      std::cout << "no utility drop found\n";
    }
    std::cout << "      random DAVID-U markets with an unsafe extra target: " << r.random_u_instances_unsafe << "\n";
    ok = ok && fired;
  }
  if (all || suite == "lemma1") {
    const auto r = suites::lemma1(instances, seed);
    print_report(r.david_u);
    print_report(r.david_q);
    ok = ok && r.david_u.pass() && r.david_q.pass();
  }
  if (all || suite == "cycle") {
    const auto r = suites::cycle();
    const bool bundled = r.bundled.cycle && r.bundled.equilibria.empty();
    std::cout << (bundled ? "ok    " : "FAIL  ") << "cycle/bundled: " << (r.bundled.cycle ? "cycle" : "no cycle") << ", "
              << r.bundled.equilibria.size() << " pure equilibria\n";
    print_transcript(r.bundled);
    const bool modified = r.modified.fixed_point.has_value();
    std::cout << (modified ? "ok    " : "FAIL  ") << "cycle/modified: "
              << (modified ? "fixed point reached" : "no fixed point") << "\n";
    print_transcript(r.modified);
    ok = ok && bundled && modified;
  }
  return ok ? 0 : 1;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path, int jobs) {
  std::istringstream in(read_file(config_path));
  const SweepConfig cfg = load_sweep_config(in);
  const SweepResult res = run_welfare_sweep(cfg, jobs);
  for (const auto& s : res.skipped) {
    std::cerr << "skipped point rho_ew=" << format_number(s.point.params.rho_ew)
              << " rho_ev=" << format_number(s.point.params.rho_ev) << " rho_wv=" << format_number(s.point.params.rho_wv)
              << ": " << s.reason << "\n";
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << to_csv(res.rows);
  int ambiguous = 0;
  for (const auto& r : res.rows) ambiguous += r.ambiguous_reps;
  std::cout << "wrote " << res.rows.size() << " row(s) to " << out_path << "; " << res.skipped.size()
            << " point(s) skipped";
  if (ambiguous > 0) std::cout << "; " << ambiguous << " replication(s) settled a demand tie";
  std::cout << "\n";
  if (!res.diverged_points.empty()) {
    std::cerr << res.diverged_points.size() << " point(s) had no converged replication\n";
    return 2;
  }
  return 0;
}

int cmd_sample(const std::string& model_path, int n, int colleges, std::uint64_t seed, const std::string& out_path) {
  const GaussianTypeModel model = build_model(parse_model_params(read_file(model_path)));
  const auto students = sample_students(model, n, colleges, seed);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  write_population_csv(out, students);
  std::cout << "wrote " << n << " student(s) to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deferred acceptance with voluntary information disclosure"};
  app.require_subcommand(1);

  std::string mechanism = "da", instance, out = "match.csv", trace, suite = "all", config, model;
  double tol = 1e-9;
  int max_iter = 1000, instances = 200, jobs = 1, n = 100, colleges = 6;
  std::uint64_t seed = 1;

  auto* solve = app.add_subcommand("solve", "run one mechanism on an instance");
  solve->add_option("--mechanism", mechanism)->check(CLI::IsMember({"da", "david-q", "david-u"}));
  solve->add_option("--instance", instance)->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "matching CSV");

  auto* eq = app.add_subcommand("equilibrium", "iterate DAVID-U demand to a fixed point");
  eq->add_option("--instance", instance)->required()->check(CLI::ExistingFile);
  eq->add_option("--tol", tol);
  eq->add_option("--max-iter", max_iter)->check(CLI::PositiveNumber);
  eq->add_option("--trace", trace, "per-iteration cutoff CSV");

  auto* check = app.add_subcommand("check", "property suites on random small markets");
  check->add_option("--suite", suite)->check(CLI::IsMember({"strategyproof", "safety", "envy", "lemma1", "cycle", "all"}));
  check->add_option("--instances", instances)->check(CLI::PositiveNumber);
  check->add_option("--seed", seed);

  auto* sim = app.add_subcommand("simulate", "welfare sweep, DA against DAVID-U");
  sim->add_option("--config", config)->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out)->required();
  sim->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

  auto* examples = app.add_subcommand("examples", "print the two-student worked example");

  auto* sample = app.add_subcommand("sample", "draw a population to CSV");
  sample->add_option("--model", model, "key = value or JSON parameter file")->required()->check(CLI::ExistingFile);
  sample->add_option("-n", n)->check(CLI::PositiveNumber);
  sample->add_option("--colleges", colleges)->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed);
  sample->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(mechanism, instance, out);
    if (*eq) return cmd_equilibrium(instance, tol, max_iter, trace);
    if (*check) return cmd_check(suite, instances, seed);
    if (*sim) return cmd_simulate(config, out, jobs);
    if (*examples) {
      std::cout << reproduce_example1().table;
      return 0;
    }
    if (*sample) return cmd_sample(model, n, colleges, seed, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
