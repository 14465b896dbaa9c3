#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "david/io.hpp"
#include "david/simulation.hpp"

namespace {

using namespace david;

SweepConfig tiny_config() {
  SweepConfig cfg;
  cfg.replications = 4;
  cfg.n_students = 30;
  cfg.n_colleges = 3;
  cfg.seats_per_college = 5;
  cfg.gamma_i = 0.05;
  cfg.model.rho_wv = 0.5;
  cfg.axes["rho_ew"] = {0.1, 0.5};
  cfg.seed = 7;
  return cfg;
}

TEST(Welfare, TwoStudentDa) {
  const Economy econ = example1_economy();
  const auto w = compute_welfare(run_da(econ, truthful_rols(econ)), econ);
  EXPECT_EQ(w.student_mean, 2.0);
  EXPECT_EQ(w.college_mean, 2.0);
}

TEST(Welfare, TwoStudentDisclosure) {
  const Economy econ = example1_economy();
  auto t = empty_targets(2);
  t[0].targets = {0};
  const auto w = compute_welfare(run_david_u(econ, truthful_rols(econ), t), econ);
  EXPECT_EQ(w.student_mean, 2.5);
  EXPECT_EQ(w.college_mean, 2.5);
}

TEST(Welfare, NobodyAdmitted) {
  Economy econ = example1_economy();
  econ.capacities = {0, 0};
  const auto w = compute_welfare(run_da(econ, truthful_rols(econ)), econ);
  EXPECT_EQ(w.student_mean, 0.0);
  EXPECT_EQ(w.college_mean, 0.0);
}

TEST(TwoStudent, ThreeScenarios) {
  const auto rep = reproduce_example1();
  ASSERT_EQ(rep.scenarios.size(), 3u);
  EXPECT_EQ(rep.scenarios[0].students, 4.0);
  EXPECT_EQ(rep.scenarios[0].colleges, 4.0);
  EXPECT_EQ(rep.scenarios[1].students, 5.0);
  EXPECT_EQ(rep.scenarios[1].colleges, 5.0);
  EXPECT_EQ(rep.scenarios[2].students, 4.0);
  EXPECT_EQ(rep.scenarios[2].colleges, 4.0);
  EXPECT_NE(rep.table.find("Ann"), std::string::npos);
}

TEST(FitLine, ExactLineAndNoise) {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  const auto g = fit_line({0, 1, 2, 3, 4}, {0.1, -0.1, 0.2, -0.2, 0.0});
  EXPECT_LT(std::abs(g.t), 2.0);
  // Hand computation: slope -0.03, residual sum of squares 0.091, se = sqrt(0.091/3/10).
  EXPECT_NEAR(g.slope, -0.03, 1e-12);
  EXPECT_NEAR(g.slope_se, std::sqrt(0.091 / 3.0 / 10.0), 1e-12);
  EXPECT_THROW(fit_line({1, 1, 1}, {1, 2, 3}), BadParam);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::nan("")), "");
  EXPECT_EQ(format_number(-kInf), "-inf");
}

TEST(Sweep, PointsCartesianLastAxisFastest) {
  SweepConfig cfg;
  cfg.axes["gamma_i"] = {0, 0.05};
  cfg.axes["rho_ew"] = {0.1, 0.2, 0.3};
  const auto pts = sweep_points(cfg);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0].gamma_i, 0.0);
  EXPECT_EQ(pts[1].params.rho_ew, 0.2);
  EXPECT_EQ(pts[3].gamma_i, 0.05);
}

TEST(Sweep, BadConfigsRejected) {
  SweepConfig cfg;
  cfg.axes["rho_xy"] = {0.1};
  EXPECT_THROW(validate(cfg), BadParam);
  cfg = {};
  cfg.replications = 0;
  EXPECT_THROW(validate(cfg), BadParam);
}

TEST(Sweep, NonPsdPointSkipped) {
  SweepConfig cfg = tiny_config();
  cfg.replications = 1;
  cfg.model.rho_ev = -0.9;
  cfg.axes["rho_ew"] = {0.9};
  const auto r = run_welfare_sweep(cfg);
  EXPECT_TRUE(r.rows.empty());
  ASSERT_EQ(r.skipped.size(), 1u);
}

TEST(Sweep, DeterministicAndThreadIndependent) {
  const auto cfg = tiny_config();
  const auto a = to_csv(run_welfare_sweep(cfg, 1).rows);
  const auto b = to_csv(run_welfare_sweep(cfg, 1).rows);
  const auto c = to_csv(run_welfare_sweep(cfg, 3).rows);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Sweep, PerfectProxyLeavesNoGap) {
  SweepConfig cfg = tiny_config();
  cfg.gamma_i = 0.0;
  cfg.model.rho_wv = 0.0;
  cfg.model.shock_std_w = 0.0;
  cfg.model.shock_std_v = 0.0;
  cfg.axes = {{"rho_ew", {1.0}}};
  const auto r = run_welfare_sweep(cfg);
  ASSERT_EQ(r.rows.size(), 1u);
  ASSERT_GT(r.rows[0].share_converged, 0.0);
  EXPECT_NEAR(r.rows[0].stud_diff, 0.0, 1e-9);
  EXPECT_NEAR(r.rows[0].coll_diff, 0.0, 1e-9);
}

TEST(Sweep, CsvShape) {
  const auto rows = run_welfare_sweep(tiny_config()).rows;
  const auto text = to_csv(rows);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kWelfareCsvHeader);
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 13);
  }
  EXPECT_EQ(n, 2);
}

TEST(Io, ModelParamsKeyValueAndJson) {
  const auto p = parse_model_params("# sweep\nrho_wv = 0.5\nsigma_e=0.2 # note\n");
  EXPECT_EQ(p.rho_wv, 0.5);
  EXPECT_EQ(p.sigma_e, 0.2);
  const auto q = parse_model_params(R"({"rho_ew": 0.3})");
  EXPECT_EQ(q.rho_ew, 0.3);
  EXPECT_THROW(parse_model_params("rho_xx = 1"), BadParam);
  EXPECT_THROW(parse_model_params("rho_ew = abc"), BadParam);
  const auto back = model_params_from_json(to_json(p));
  EXPECT_EQ(back.rho_wv, 0.5);
}

TEST(Io, InstanceRoundTrip) {
  const char* text = R"({
    "capacities": [1, 1], "gamma_i": 1, "gamma_c": 1, "delta": [1, 0],
    "expected_payoff_table": [[2, 2], [3, 3]],
    "students": [
      {"id": 0, "v": [4, 1], "w": [3, 2], "e": [2, 2], "targets": [0],
       "sub_rol": [{"college": 0, "track": "regular"}, {"college": 0, "track": "disclosure"}, {"college": 1, "track": "regular"}]},
      {"id": 1, "v": [3, 2], "w": [2, 3], "e": [3, 3]}
    ]})";
  std::istringstream in(text);
  const Instance inst = load_instance(in);
  EXPECT_EQ(inst.economy.num_students(), 2);
  EXPECT_EQ(inst.rols[0].entries, (std::vector<int>{0, 1}));
  EXPECT_EQ(inst.targets[0].targets, (std::vector<int>{0}));
  EXPECT_EQ(inst.sub_rols[0].entries.size(), 3u);
  EXPECT_EQ(inst.sub_rols[1].entries.size(), 2u);
  const auto r = run_david_u(inst.economy, inst.rols, inst.targets);
  EXPECT_EQ(r.total_net_utility(), 5.0);
  const Instance again = instance_from_json(to_json(inst));
  EXPECT_EQ(again.economy.students[1].e, inst.economy.students[1].e);
  EXPECT_EQ(again.targets[0].targets, inst.targets[0].targets);
  EXPECT_EQ(run_david_q(again.economy, again.sub_rols).college_of, run_david_q(inst.economy, inst.sub_rols).college_of);
}

TEST(Io, InvalidInstancesRejected) {
  auto bad = [](const char* text) {
    std::istringstream in(text);
    return load_instance(in);
  };
  EXPECT_THROW(bad("{"), InvalidInstance);
  EXPECT_THROW(bad(R"({"capacities": [1], "students": [{"id": 0, "v": [1, 2], "w": [1], "e": [1]}]})"),
               InvalidInstance);
  EXPECT_THROW(bad(R"({"capacities": [1.5], "students": []})"), InvalidInstance);
}

TEST(Io, SpdaInstanceRoundTrip) {
  SpdaInstance inst;
  inst.rols = {{0, {0, 1}}, {1, {1}}};
  inst.capacities = {1, 1};
  inst.priorities = PriorityProfile(2, 2);
  inst.priorities.set(0, 0, 0.4);
  inst.priorities.set(1, 1, 0.9);
  const auto back = spda_instance_from_json(to_json(inst));
  EXPECT_EQ(back.rols[0].entries, inst.rols[0].entries);
  EXPECT_EQ(back.priorities.at(1, 1), 0.9);
}

TEST(Io, MatchCsvLeavesUnmatchedBlank) {
  Economy econ = example1_economy();
  econ.capacities = {1, 0};
  std::ostringstream out;
  write_match_csv(out, run_da(econ, truthful_rols(econ)));
  EXPECT_EQ(out.str(), "student_id,slot_id,college_id,admitted_via_disclosure\n0,,,\n1,0,0,0\n");
}

TEST(Io, TraceCsv) {
  std::ostringstream out;
  write_cutoff_trace_csv(out, {Cutoffs({-kInf, 2}), Cutoffs({3, 2})});
  EXPECT_EQ(out.str(), "iteration,college_0,college_1\n0,-inf,2\n1,3,2\n");
}

TEST(Io, SweepConfigUnknownKeyRejected) {
  std::istringstream in(R"({"replications": 3, "oops": 1})");
  EXPECT_THROW(load_sweep_config(in), BadParam);
  std::istringstream ok(R"({"replications": 3, "axes": {"rho_ew": [0.1, 0.2]}})");
  EXPECT_EQ(load_sweep_config(ok).axes.at("rho_ew").size(), 2u);
}

}  // namespace
