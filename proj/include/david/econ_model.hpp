#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "david/error.hpp"

namespace david {

using StudentId = int;
using CollegeId = int;

// A student's type: utility v, college payoff w and eligibility e, one entry per college.
struct StudentType {
  StudentId id = 0;
  std::vector<double> v;
  std::vector<double> w;
  std::vector<double> e;

  std::size_t num_colleges() const { return v.size(); }
};

struct GaussianTypeParams {
  double mu_e = 1.0;
  double mu_w = 1.0;
  double mu_v = 1.0;
  double sigma_e = 0.1;
  double sigma_w = 0.1;
  double sigma_v = 0.1;
  double rho_ew = 0.0;
  double rho_wv = 0.0;
  double rho_ev = 0.0;
  double shock_std_w = 0.1;
  double shock_std_v = 0.1;
  double shock_corr_wv = 0.0;
};

inline constexpr double kPsdTolerance = 1e-10;

// Validated two-stage Gaussian type generator. Anchors (e, w, v) are drawn jointly,
// then per-college shocks (eps_w, eps_v) are added to w and v. Only build_model
// constructs one.
class GaussianTypeModel {
 public:
  const GaussianTypeParams& params() const { return params_; }

  // Symmetric square root of the anchor correlation matrix, row-major, order (e, w, v).
  const std::array<double, 9>& anchor_root() const { return root_; }

 private:
  GaussianTypeModel(GaussianTypeParams p, std::array<double, 9> root)
      : params_(p), root_(root) {}

  friend GaussianTypeModel build_model(const GaussianTypeParams& p);

  GaussianTypeParams params_;
  std::array<double, 9> root_{};
};

inline GaussianTypeModel build_model(const GaussianTypeParams& p) {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw BadParam(std::string(name) + " must be a finite positive number");
    }
  };
  auto non_negative = [](double x, const char* name) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw BadParam(std::string(name) + " must be a finite non-negative number");
    }
  };
  auto correlation = [](double x, const char* name) {
    if (!(x >= -1.0 && x <= 1.0)) {
      throw BadParam(std::string(name) + " must lie in [-1, 1]");
    }
  };
  auto finite = [](double x, const char* name) {
    if (!std::isfinite(x)) throw BadParam(std::string(name) + " must be finite");
  };
  finite(p.mu_e, "mu_e");
  finite(p.mu_w, "mu_w");
  finite(p.mu_v, "mu_v");
  positive(p.sigma_e, "sigma_e");
  positive(p.sigma_w, "sigma_w");
  positive(p.sigma_v, "sigma_v");
  correlation(p.rho_ew, "rho_ew");
  correlation(p.rho_wv, "rho_wv");
  correlation(p.rho_ev, "rho_ev");
  non_negative(p.shock_std_w, "shock_std_w");
  non_negative(p.shock_std_v, "shock_std_v");
  correlation(p.shock_corr_wv, "shock_corr_wv");

  Eigen::Matrix3d corr;
  corr << 1.0, p.rho_ew, p.rho_ev,
          p.rho_ew, 1.0, p.rho_wv,
          p.rho_ev, p.rho_wv, 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(corr);
  const Eigen::Vector3d lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -kPsdTolerance) {
    throw NotPsd("anchor correlation matrix is not positive semidefinite (min eigenvalue " +
                 std::to_string(lambda.minCoeff()) + ")");
  }
  // 2x2 shock covariance [[sw^2, c sw sv], [c sw sv, sv^2]] is PSD iff |c| <= 1,
  // already enforced above.

  const Eigen::Vector3d sqrt_lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix3d root =
      eig.eigenvectors() * sqrt_lambda.asDiagonal() * eig.eigenvectors().transpose();
  std::array<double, 9> flat{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) flat[static_cast<std::size_t>(r * 3 + c)] = root(r, c);
  }
  return GaussianTypeModel(p, flat);
}

// SplitMix64 finalizer; used to derive independent RNG substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
  return splitmix64(splitmix64(seed) ^ (a + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

// Draws n students over num_colleges colleges. Student i uses its own stream seeded
// from (seed, i), so populations are reproducible and prefix-stable in n.
inline std::vector<StudentType> sample_students(const GaussianTypeModel& model, int n,
                                                int num_colleges, std::uint64_t seed) {
  if (n < 1) throw BadParam("n must be >= 1");
  if (num_colleges < 1) throw BadParam("num_colleges must be >= 1");
  const auto& p = model.params();
  const auto& a = model.anchor_root();
  const double shock_tail = std::sqrt(std::max(0.0, 1.0 - p.shock_corr_wv * p.shock_corr_wv));

  std::vector<StudentType> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> z(0.0, 1.0);
    const double z0 = z(rng);
    const double z1 = z(rng);
    const double z2 = z(rng);
    const double e_anchor = p.mu_e + p.sigma_e * (a[0] * z0 + a[1] * z1 + a[2] * z2);
    const double w_anchor = p.mu_w + p.sigma_w * (a[3] * z0 + a[4] * z1 + a[5] * z2);
    const double v_anchor = p.mu_v + p.sigma_v * (a[6] * z0 + a[7] * z1 + a[8] * z2);

    StudentType s;
    s.id = i;
    s.v.resize(static_cast<std::size_t>(num_colleges));
    s.w.resize(static_cast<std::size_t>(num_colleges));
    s.e.assign(static_cast<std::size_t>(num_colleges), e_anchor);
    for (std::size_t c = 0; c < s.v.size(); ++c) {
      const double u1 = z(rng);
      const double u2 = z(rng);
      s.w[c] = w_anchor + p.shock_std_w * u1;
      s.v[c] = v_anchor + p.shock_std_v * (p.shock_corr_wv * u1 + shock_tail * u2);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// E[w | e] under the anchor Gaussian: mu_w + rho_ew * (sigma_w / sigma_e) * (e - mu_e).
inline double conditional_expected_payoff(const GaussianTypeModel& model, double e) {
  const auto& p = model.params();
  return p.mu_w + p.rho_ew * (p.sigma_w / p.sigma_e) * (e - p.mu_e);
}

using Table = std::vector<std::vector<double>>;  // [student][college]

// Market primitives shared by all mechanisms.
struct Economy {
  std::vector<StudentType> students;
  int num_colleges = 0;
  std::vector<int> capacities;
  double gamma_i = 0.0;  // application cost per disclosure, utility units
  double gamma_c = 0.0;  // screening cost per received disclosure, payoff units
  std::vector<double> delta;  // disclosure shares (DAVID-Q only); empty means all zero

  // How colleges value an undisclosed student. An explicit table wins over a model;
  // with neither, the eligibility score is taken as an unbiased estimate (E[w|e] = e).
  std::optional<Table> expected_payoff;
  std::optional<GaussianTypeModel> model;

  int num_students() const { return static_cast<int>(students.size()); }
};

inline void validate(const Economy& econ) {
  if (econ.num_colleges < 0) throw InvalidInstance("num_colleges must be >= 0");
  const auto c_count = static_cast<std::size_t>(econ.num_colleges);
  if (econ.capacities.size() != c_count) {
    throw InvalidInstance("capacities must have one entry per college");
  }
  for (int s : econ.capacities) {
    if (s < 0) throw BadParam("capacities must be non-negative");
  }
  if (!(econ.gamma_i >= 0.0)) throw BadParam("gamma_i must be non-negative");
  if (!(econ.gamma_c >= 0.0)) throw BadParam("gamma_c must be non-negative");
  if (!econ.delta.empty()) {
    if (econ.delta.size() != c_count) throw InvalidInstance("delta must have one entry per college");
    for (double d : econ.delta) {
      if (!(d >= 0.0 && d <= 1.0)) throw BadParam("delta entries must lie in [0, 1]");
    }
  }
  for (std::size_t i = 0; i < econ.students.size(); ++i) {
    const auto& s = econ.students[i];
    if (s.id != static_cast<StudentId>(i)) {
      throw InvalidInstance("student ids must be 0..n-1 in order");
    }
    if (s.v.size() != c_count || s.w.size() != c_count || s.e.size() != c_count) {
      throw InvalidInstance("student " + std::to_string(i) +
                            ": v, w, e must have one entry per college");
    }
  }
  if (econ.expected_payoff) {
    const auto& t = *econ.expected_payoff;
    if (t.size() != econ.students.size()) {
      throw InvalidInstance("expected_payoff_table must have one row per student");
    }
    for (const auto& row : t) {
      if (row.size() != c_count) {
        throw InvalidInstance("expected_payoff_table rows must have one entry per college");
      }
    }
  }
}

// E[w_{i,c} | e_{i,c}] for every student and college.
inline Table expected_payoff_table(const Economy& econ) {
  if (econ.expected_payoff) return *econ.expected_payoff;
  Table t;
  t.reserve(econ.students.size());
  for (const auto& s : econ.students) {
    std::vector<double> row(s.e.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = econ.model ? conditional_expected_payoff(*econ.model, s.e[c]) : s.e[c];
    }
    t.push_back(std::move(row));
  }
  return t;
}

}  // namespace david
