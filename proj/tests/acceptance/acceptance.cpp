// Runs the fourteen acceptance criteria and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "circlelab/cohomology.hpp"
#include "circlelab/errors.hpp"
#include "circlelab/experiments.hpp"
#include "circlelab/lyapunov.hpp"
#include "circlelab/matrix.hpp"
#include "support/sampling.hpp"

using namespace circlelab;
using testing_support::kGolden;
using testing_support::kSilver;
using testing_support::kTwoPi;

namespace {

const std::filesystem::path kConfigs = CIRCLELAB_CONFIG_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ExperimentResult run_config(const std::string& file) {
  return run_experiment(load_config(kConfigs / file));
}

// every check of every listed config must pass
Outcome configs_pass(const std::vector<std::string>& files) {
  Outcome o;
  for (const auto& f : files) {
    const auto r = run_config(f);
    for (const auto& c : r.checks) o.require(c.pass, f + " " + c.name + ": " + c.detail);
  }
  return o;
}

std::vector<PeriodicMap> sample_set() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> degree(1, 32);
  std::vector<PeriodicMap> out;
  for (int t = 0; t < 100; ++t) out.push_back(testing_support::random_trig(rng, degree(rng), 1.0, {}, 1.0, 0.3));
  return out;
}

const std::vector<AngleEnsemble>& angle_cases() {
  static const std::vector<AngleEnsemble> cases{AngleEnsemble::single(kGolden),
                                                AngleEnsemble::uniform({kGolden, kSilver})};
  return cases;
}

double grid_inner(const PeriodicMap& a, const PeriodicMap& b) {
  const auto sa = a.samples(), sb = b.samples();
  double s = 0.0;
  for (std::size_t j = 0; j < sa.size(); ++j) s += sa[j] * sb[j];
  return s / static_cast<double>(sa.size());
}

Outcome cohomology_contract() {
  const auto psis = sample_set();
  std::mt19937_64 rng(7);
  Outcome o;
  for (std::size_t c = 0; c < angle_cases().size(); ++c) {
    const auto& alpha = angle_cases()[c];
    double solve = 0.0, adjoint = 0.0;
    for (std::size_t t = 0; t < psis.size(); ++t) {
      const auto& psi = psis[t];
      const auto u = solve_U(psi, alpha);
      solve = std::max(solve, ck_norm((u - transfer_T0(u, alpha)) - (psi - psi.mean()), 0));
      const auto& other = psis[(t + 1) % psis.size()];
      adjoint = std::max(adjoint, std::abs(grid_inner(u, other) - grid_inner(psi, solve_Ubar(other, alpha))));
    }
    o.require(solve < 1e-9, "angles " + std::to_string(c) + ": solve residual " + num(solve) + " < 1e-9");
    o.require(adjoint < 1e-10, "adjoint gap " + num(adjoint) + " < 1e-10");
  }
  return o;
}

Outcome solution_bound() {
  const auto psis = sample_set();
  Outcome o;
  for (std::size_t c = 0; c < angle_cases().size(); ++c) {
    const auto& alpha = angle_cases()[c];
    const auto prof = diophantine_profile(alpha, 64);
    const int sigma = prof.integer_sigma();
    const int k0 = 2 * sigma + 2;
    int violations = 0;
    for (const auto& psi : psis) {
      const auto u = solve_U(psi, alpha);
      for (int k = 0; k <= 2; ++k)
        if (ck_norm(u, k) > ck_norm(psi, k + k0) / (prof.A * prof.A)) ++violations;
    }
    o.require(violations == 0, "angles " + std::to_string(c) + " (A " + num(prof.A) + ", sigma " +
                                   std::to_string(sigma) + "): " + std::to_string(violations) + " violations");
  }
  return o;
}

Outcome parseval_consistency() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> angle(0.0, 1.0), size(0.01, 0.1);
  std::uniform_int_distribution<int> atoms(1, 3), degree(1, 8);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<CircleDiffeo> fs;
    std::vector<double> as;
    const int m = atoms(rng);
    for (int i = 0; i < m; ++i) {
      auto zeta = testing_support::random_trig(rng, degree(rng), 1.0);
      zeta *= size(rng) / ck_norm(zeta, 1);
      as.push_back(angle(rng));
      fs.push_back(CircleDiffeo(zeta + as.back()));
    }
    const auto e = order2_expansion(CircleEnsemble::uniform(fs), AngleEnsemble::uniform(as));
    worst = std::max(worst, std::abs(e.direct - e.parseval));
  }
  Outcome o;
  o.require(worst < 1e-10, "max |direct - fourier| " + num(worst) + " < 1e-10");
  return o;
}

Outcome determinant_identity() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0), a(0.0, 2.0), scale(0.0, 0.3);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Mat2 B{u(rng), u(rng), u(rng), u(rng)};
    const Mat2 M = sl2_normalize(Mat2::rotation(a(rng)) + scale(rng) * B).first;
    const auto dphi = projective_diffeo(M).phi().derivative();
    const auto s = dphi.samples();
    for (int j = 0; j < dphi.grid_size(); ++j) {
      const double x = dphi.grid_point(j);
      const auto v = M.apply(std::cos(std::numbers::pi * x), std::sin(std::numbers::pi * x));
      worst = std::max(worst, std::abs((v[0] * v[0] + v[1] * v[1]) * (1.0 + s[static_cast<std::size_t>(j)]) - 1.0));
    }
  }
  Outcome o;
  o.require(worst < 1e-10, "max deviation " + num(worst) + " < 1e-10 over 1000 matrices");
  return o;
}

Mat2 bumped(double alpha, double eps, const Mat2& B) {
  const Mat2 R = Mat2::rotation(alpha);
  return sl2_normalize(R + eps * (R * B)).first;
}

Outcome projective_bridge() {
  const MatrixEnsemble first = MatrixEnsemble::uniform({bumped(0.3, 0.1, {1.0, 0.0, 0.0, -1.0}),
                                                        bumped(0.3, 0.1, {0.0, 1.0, 0.0, 0.0})});
  const MatrixEnsemble second({{0.3, Mat2::rotation(0.2) * Mat2{1.2, 0.0, 0.0, 1.0 / 1.2}},
                               {0.7, Mat2::rotation(0.55)}});
  Outcome o;
  int k = 0;
  for (const auto& M : {first, second}) {
    const McOptions mm{100000, 64, 41, 0, Estimator::conditional, 1};
    const McOptions cm{100000, 64, 42, 0, Estimator::conditional, 1};
    const auto lam = mc_matrix_lyapunov(M, mm);
    const auto circ = mc_lyapunov(M.map([](const Mat2& m) { return projective_diffeo(m); }), cm);
    const double se = std::sqrt(lam.std_error * lam.std_error + 0.25 * circ.std_error * circ.std_error);
    const double gap = std::abs(lam.value + 0.5 * circ.value);
    o.require(gap <= 3.0 * se, "ensemble " + std::to_string(++k) + ": Lambda " + num(lam.value) + ", |Lambda + lambda/2| " +
                                   num(gap) + " <= " + num(3.0 * se));
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  for (const char* f : {"commutator_circle_perturbed.json", "matrix_expansion.json"}) {
    const auto cfg = load_config(kConfigs / f);
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    const auto c = run_experiment(cfg, "", RunOverrides{std::nullopt, 4});
    bool same = a.files.size() == b.files.size() && a.files.size() == c.files.size();
    for (std::size_t i = 0; same && i < a.files.size(); ++i)
      same = a.files[i].content == b.files[i].content && a.files[i].content == c.files[i].content;
    o.require(same, std::string(f) + " byte-identical across repeats and thread counts");
  }
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "cohomology contract", 5, cohomology_contract},
      {2, "solution bound with A^-2", 5, solution_bound},
      {3, "quadratic Lyapunov law", 120, [] { return configs_pass({"lyapunov_expansion.json"}); }},
      {4, "Parseval consistency", 10, parseval_consistency},
      {5, "first-order stationary density", 60, [] { return configs_pass({"stationary_density.json"}); }},
      {6, "planted circle linearization", 30, [] { return configs_pass({"kam_circle_planted.json"}); }},
      {7, "stopping distance against lambda", 120, [] { return configs_pass({"kam_circle_perturbed.json"}); }},
      {8, "commutator defect", 30,
       [] { return configs_pass({"commutator_circle_perturbed.json", "commutator_circle_planted.json"}); }},
      {9, "matrix determinant identity", 5, determinant_identity},
      {10, "matrix order-2 law", 120, [] { return configs_pass({"matrix_expansion.json"}); }},
      {11, "weak-disorder Schrodinger", 60, [] { return configs_pass({"schrodinger.json"}); }},
      {12, "matrix/projective exponent bridge", 60, projective_bridge},
      {13, "matrix reduction", 60, [] { return configs_pass({"kam_matrix_planted.json", "kam_matrix_perturbed.json"}); }},
      {14, "determinism", 60, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.limit_s, "runtime " + num(secs) + " s < " + num(c.limit_s) + " s");
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
