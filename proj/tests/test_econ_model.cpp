#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "david/econ_model.hpp"

namespace {

using namespace david;

GaussianTypeParams sweep_params() {
  GaussianTypeParams p;
  p.rho_wv = 0.5;
  return p;
}

TEST(GaussianModel, IdentityCorrelationIsValid) {
  EXPECT_NO_THROW(build_model(GaussianTypeParams{}));
}

TEST(GaussianModel, SweepParametersAreValid) {
  EXPECT_NO_THROW(build_model(sweep_params()));
}

TEST(GaussianModel, IndefiniteCorrelationRejected) {
  GaussianTypeParams p;
  p.rho_ew = 0.9;
  p.rho_ev = 0.9;
  p.rho_wv = -0.9;
  // Oracle: smallest eigenvalue of the correlation matrix, computed directly.
  Eigen::Matrix3d m;
  m << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;
  ASSERT_LT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues().minCoeff(), 0.0);
  EXPECT_THROW(build_model(p), NotPsd);
}

TEST(GaussianModel, BadParametersRejected) {
  GaussianTypeParams p;
  p.sigma_e = 0.0;
  EXPECT_THROW(build_model(p), BadParam);
  p = {};
  p.rho_ew = 1.5;
  EXPECT_THROW(build_model(p), BadParam);
  p = {};
  p.shock_std_w = -0.1;
  EXPECT_THROW(build_model(p), BadParam);
  p = {};
  p.mu_v = std::nan("");
  EXPECT_THROW(build_model(p), BadParam);
}

TEST(GaussianModel, SingularButPsdAccepted) {
  GaussianTypeParams p;
  p.rho_ew = 1.0;
  EXPECT_NO_THROW(build_model(p));
}

TEST(Sampler, ZeroShocksGiveEqualPayoffsAcrossColleges) {
  GaussianTypeParams p = sweep_params();
  p.shock_std_w = 0.0;
  p.shock_std_v = 0.0;
  const auto s = sample_students(build_model(p), 1, 2, 7);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].w[0], s[0].w[1]);
  EXPECT_EQ(s[0].v[0], s[0].v[1]);
  EXPECT_EQ(s[0].e[0], s[0].e[1]);
}

TEST(Sampler, DegenerateScalesConcentrateAtMeans) {
  GaussianTypeParams p;
  p.mu_e = 1.0;
  p.mu_w = 2.0;
  p.mu_v = 3.0;
  p.sigma_e = p.sigma_w = p.sigma_v = 1e-12;
  p.shock_std_w = p.shock_std_v = 0.0;
  for (const auto& s : sample_students(build_model(p), 20, 3, 11)) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(s.e[c], 1.0, 1e-9);
      EXPECT_NEAR(s.w[c], 2.0, 1e-9);
      EXPECT_NEAR(s.v[c], 3.0, 1e-9);
    }
  }
}

TEST(Sampler, MeanEligibilityWithinFourStandardErrors) {
  // Bound: 4 * sigma_e / sqrt(n) = 0.04 for n = 100.
  const auto model = build_model(sweep_params());
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = sample_students(model, 100, 6, seed);
    double m = 0;
    for (const auto& t : s) m += t.e[0];
    m /= 100.0;
    if (std::abs(m - 1.0) <= 0.04) ++inside;
  }
  EXPECT_GE(inside, 198);
}

TEST(Sampler, Deterministic) {
  const auto model = build_model(sweep_params());
  const auto a = sample_students(model, 50, 6, 42);
  const auto b = sample_students(model, 50, 6, 42);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].v, b[i].v);
    EXPECT_EQ(a[i].w, b[i].w);
    EXPECT_EQ(a[i].e, b[i].e);
  }
  const auto c = sample_students(model, 50, 6, 43);
  EXPECT_NE(a[0].e, c[0].e);
}

TEST(Sampler, PrefixStableInPopulationSize) {
  const auto model = build_model(sweep_params());
  const auto small = sample_students(model, 10, 3, 5);
  const auto large = sample_students(model, 30, 3, 5);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].w, large[i].w);
}

TEST(Sampler, EmpiricalCorrelationsMatchModel) {
  GaussianTypeParams p;
  p.rho_ew = 0.6;
  p.rho_wv = 0.3;
  p.rho_ev = -0.2;
  p.shock_std_w = p.shock_std_v = 0.0;
  const auto s = sample_students(build_model(p), 40000, 1, 3);
  auto corr = [&](auto fx, auto fy) {
    double mx = 0, my = 0;
    for (const auto& t : s) {
      mx += fx(t);
      my += fy(t);
    }
    mx /= s.size();
    my /= s.size();
    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& t : s) {
      sxx += (fx(t) - mx) * (fx(t) - mx);
      syy += (fy(t) - my) * (fy(t) - my);
      sxy += (fx(t) - mx) * (fy(t) - my);
    }
    return sxy / std::sqrt(sxx * syy);
  };
  auto e = [](const StudentType& t) { return t.e[0]; };
  auto w = [](const StudentType& t) { return t.w[0]; };
  auto v = [](const StudentType& t) { return t.v[0]; };
  EXPECT_NEAR(corr(e, w), 0.6, 0.02);
  EXPECT_NEAR(corr(w, v), 0.3, 0.02);
  EXPECT_NEAR(corr(e, v), -0.2, 0.02);
}

TEST(Sampler, RejectsEmptyPopulation) {
  const auto model = build_model(GaussianTypeParams{});
  EXPECT_THROW(sample_students(model, 0, 2, 1), BadParam);
  EXPECT_THROW(sample_students(model, 2, 0, 1), BadParam);
}

TEST(ConditionalExpectation, ZeroCorrelationGivesMean) {
  GaussianTypeParams p;
  p.mu_w = 1.7;
  const auto m = build_model(p);
  EXPECT_DOUBLE_EQ(conditional_expected_payoff(m, -3.0), 1.7);
  EXPECT_DOUBLE_EQ(conditional_expected_payoff(m, 5.0), 1.7);
}

TEST(ConditionalExpectation, PerfectCorrelationTracksScore) {
  GaussianTypeParams p;
  p.rho_ew = 1.0;
  EXPECT_NEAR(conditional_expected_payoff(build_model(p), 1.2), 1.2, 1e-12);
}

TEST(ConditionalExpectation, HandValue) {
  GaussianTypeParams p;
  p.rho_ew = 0.5;
  EXPECT_NEAR(conditional_expected_payoff(build_model(p), 1.1), 1.05, 1e-12);
}

TEST(ConditionalExpectation, AffineWithExpectedSlope) {
  GaussianTypeParams p;
  p.rho_ew = 0.35;
  p.sigma_w = 0.3;
  p.sigma_e = 0.2;
  const auto m = build_model(p);
  const double h = 0.5;
  for (double e : {-1.0, 0.3, 1.0, 2.5}) {
    const double slope = (conditional_expected_payoff(m, e + h) - conditional_expected_payoff(m, e)) / h;
    EXPECT_NEAR(slope, 0.35 * 0.3 / 0.2, 1e-9);
  }
}

TEST(ConditionalExpectation, AgreesWithRegressionOnSamples) {
  GaussianTypeParams p;
  p.rho_ew = 0.5;
  p.shock_std_w = 0.0;
  const auto m = build_model(p);
  const auto s = sample_students(m, 40000, 1, 9);
  // Least squares of w on e estimates the conditional mean line.
  double me = 0, mw = 0;
  for (const auto& t : s) {
    me += t.e[0];
    mw += t.w[0];
  }
  me /= s.size();
  mw /= s.size();
  double see = 0, sew = 0;
  for (const auto& t : s) {
    see += (t.e[0] - me) * (t.e[0] - me);
    sew += (t.e[0] - me) * (t.w[0] - mw);
  }
  const double b = sew / see;
  EXPECT_NEAR(b, 0.5, 0.02);
  EXPECT_NEAR(mw + b * (1.1 - me), conditional_expected_payoff(m, 1.1), 0.005);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(derive_seed(1, 2), 3));
}

TEST(EconomyValidation, ShapeErrors) {
  Economy e;
  e.num_colleges = 2;
  e.capacities = {1};
  EXPECT_THROW(validate(e), InvalidInstance);
  e.capacities = {1, -1};
  EXPECT_THROW(validate(e), BadParam);
  e.capacities = {1, 1};
  e.students = {{0, {1, 1}, {1, 1}, {1}}};
  EXPECT_THROW(validate(e), InvalidInstance);
  e.students = {{0, {1, 1}, {1, 1}, {1, 1}}};
  EXPECT_NO_THROW(validate(e));
  e.gamma_i = -1;
  EXPECT_THROW(validate(e), BadParam);
  e.gamma_i = 0;
  e.delta = {0.5, 1.5};
  EXPECT_THROW(validate(e), BadParam);
}

TEST(ExpectedPayoff, DefaultsToScoreThenModelThenTable) {
  Economy e;
  e.num_colleges = 1;
  e.capacities = {1};
  e.students = {{0, {1}, {2}, {1.2}}};
  EXPECT_DOUBLE_EQ(expected_payoff_table(e)[0][0], 1.2);
  GaussianTypeParams p;
  p.rho_ew = 0.5;
  e.model = build_model(p);
  EXPECT_NEAR(expected_payoff_table(e)[0][0], 1.1, 1e-12);
  e.expected_payoff = Table{{9.0}};
  EXPECT_DOUBLE_EQ(expected_payoff_table(e)[0][0], 9.0);
}

}  // namespace
