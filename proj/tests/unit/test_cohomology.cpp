#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "circlelab/cohomology.hpp"
#include "circlelab/errors.hpp"
#include "support/sampling.hpp"

using namespace circlelab;
using testing_support::kGolden;
using testing_support::kSilver;
using testing_support::kTwoPi;

namespace {

PeriodicMap cos_mode(int p, Resolution res = {}) {
  std::vector<double> c(static_cast<std::size_t>(p), 0.0), s;
  c.back() = 1.0;
  return PeriodicMap::trigonometric(0.0, c, s, res);
}

}  // namespace

TEST_SUITE("cohomology") {

TEST_CASE("averaged multiplier invariants") {
  const AngleEnsemble alpha({{0.3, kGolden}, {0.7, 0.123}});
  const AveragedMultiplier m(alpha, 64);
  CHECK(m(0) == std::complex<double>(1.0, 0.0));
  for (int q = 1; q <= 64; ++q) {
    CHECK(std::abs(m(q)) <= 1.0 + 1e-15);
    CHECK(m(-q) == std::conj(m(q)));
    const auto direct = 0.3 * std::polar(1.0, kTwoPi * q * kGolden) + 0.7 * std::polar(1.0, kTwoPi * q * 0.123);
    CHECK(std::abs(m(q) - direct) < 1e-12);
  }
}

TEST_CASE("T0 with a single angle is a rotation; constants are fixed") {
  std::mt19937_64 rng(53);
  const auto phi = testing_support::random_trig(rng, 16, 1.0);
  const auto t0 = transfer_T0(phi, AngleEnsemble::single(0.3));
  CHECK(ck_norm(t0 - phi.shifted(0.3), 0) < 1e-13);
  const auto c = PeriodicMap::constant(2.5, {});
  CHECK(ck_norm(transfer_T0(c, AngleEnsemble::uniform({0.1, 0.4})) - c, 0) < 1e-15);
}

TEST_CASE("T0 averages cos over quarter turns to zero") {
  const auto t0 = transfer_T0(cos_mode(1), AngleEnsemble::uniform({0.25, 0.75}));
  // oracle: (cos(2 pi (x + 1/4)) + cos(2 pi (x + 3/4))) / 2
  const double direct = testing_support::dense_sup(
      [](double x) { return 0.5 * (std::cos(kTwoPi * (x + 0.25)) + std::cos(kTwoPi * (x + 0.75))); }, 1000);
  CHECK(direct < 1e-15);
  CHECK(ck_norm(t0, 0) < 1e-15);
}

TEST_CASE("T on rotations equals T0; constants are fixed") {
  std::mt19937_64 rng(59);
  const auto phi = testing_support::random_trig(rng, 16, 1.0);
  const auto alpha = AngleEnsemble::uniform({kGolden, kSilver, 0.05});
  const auto f = alpha.map([](double a) { return CircleDiffeo::rotation(a); });
  CHECK(ck_norm(transfer_T(phi, f) - transfer_T0(phi, alpha), 0) < 1e-12);
  const auto c = PeriodicMap::constant(-1.0, {});
  CHECK(ck_norm(transfer_T(c, f) - c, 0) < 1e-14);
}

TEST_CASE("T on a sine perturbation matches pointwise evaluation") {
  const std::vector<double> c, s{0.1 / kTwoPi};
  const auto f = CircleEnsemble::single(CircleDiffeo(PeriodicMap::trigonometric(0.0, c, s, {})));
  const auto t = transfer_T(cos_mode(1), f);
  const double err = testing_support::dense_sup([&](double x) {
    return t(x) - std::cos(kTwoPi * (x + 0.1 * std::sin(kTwoPi * x) / kTwoPi));
  }, 2000);
  CHECK(err < 1e-10);
}

TEST_CASE("U and Ubar annihilate constants") {
  const auto c = PeriodicMap::constant(3.0, {});
  const auto alpha = AngleEnsemble::single(kGolden);
  CHECK(ck_norm(solve_U(c, alpha), 0) == 0.0);
  CHECK(ck_norm(solve_Ubar(c, alpha), 0) == 0.0);
}

TEST_CASE("U on cos(2 pi x) with alpha = 0.3") {
  const auto alpha = AngleEnsemble::single(0.3);
  const auto psi = cos_mode(1);
  const auto phi = solve_U(psi, alpha);
  const auto expected = 0.5 / (1.0 - std::polar(1.0, kTwoPi * 0.3));
  CHECK(std::abs(phi.coeff(1) - expected) < 1e-15);
  CHECK(std::abs(phi.mean()) < 1e-16);
  CHECK(ck_norm((phi - transfer_T0(phi, alpha)) - (psi - psi.mean()), 0) < 1e-10);
}

TEST_CASE("(I - T0) U = I - mean on random inputs") {
  std::mt19937_64 rng(61);
  for (const auto& alpha : {AngleEnsemble::single(kGolden), AngleEnsemble::uniform({kGolden, kSilver})}) {
    for (int t = 0; t < 20; ++t) {
      const auto psi = testing_support::random_trig(rng, 32, 1.0, {}, 1.0, 0.4);
      const auto phi = solve_U(psi, alpha);
      CHECK(ck_norm((phi - transfer_T0(phi, alpha)) - (psi - psi.mean()), 0) < 1e-9);
      const auto phib = solve_Ubar(psi, alpha);
      CHECK(std::abs(phib.mean()) < 1e-15);
    }
  }
}

TEST_CASE("Ubar with alpha equals U with -alpha for a single angle") {
  std::mt19937_64 rng(67);
  const auto psi = testing_support::random_trig(rng, 16, 1.0);
  CHECK(ck_norm(solve_Ubar(psi, AngleEnsemble::single(0.27)) - solve_U(psi, AngleEnsemble::single(-0.27)), 0) < 1e-13);
}

TEST_CASE("adjoint identity between U and Ubar") {
  std::mt19937_64 rng(71);
  const auto alpha = AngleEnsemble::single(kGolden);
  for (int t = 0; t < 20; ++t) {
    const auto a = testing_support::random_trig(rng, 16, 1.0);
    const auto b = testing_support::random_trig(rng, 16, 1.0);
    // grid quadrature, exact for the band-limited product
    const auto ua = solve_U(a, alpha), ubb = solve_Ubar(b, alpha);
    double lhs = 0.0, rhs = 0.0;
    const auto sa = a.samples(), sb = b.samples(), sua = ua.samples(), subb = ubb.samples();
    for (std::size_t j = 0; j < sa.size(); ++j) {
      lhs += sua[j] * sb[j];
      rhs += sa[j] * subb[j];
    }
    lhs /= static_cast<double>(sa.size());
    rhs /= static_cast<double>(sa.size());
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("resonance names the offending mode") {
  const auto alpha = AngleEnsemble::single(0.5);
  CHECK_NOTHROW(solve_U(cos_mode(1), alpha));
  try {
    solve_U(cos_mode(2), alpha);
    FAIL("expected a resonance error");
  } catch (const ResonanceError& e) {
    CHECK(e.mode() == 2);
    CHECK(e.divisor() < 1e-10);
  }
  CHECK_THROWS_AS(solve_Ubar(cos_mode(4), AngleEnsemble::uniform({0.25, 0.5})), ResonanceError);
}

TEST_CASE("denominators dominate the squared diophantine profile") {
  for (const auto& alpha : {AngleEnsemble::single(kGolden), AngleEnsemble::uniform({kGolden, kSilver}),
                            AngleEnsemble::uniform({kGolden, 0.0})}) {
    const auto prof = diophantine_profile(alpha, 64);
    const AveragedMultiplier m(alpha, 64);
    for (int q = 1; q <= 64; ++q) CHECK(m.divisor(q) >= prof.value(q) * prof.value(q));
  }
}

TEST_CASE("U bound with the A^-2 constant and k0 = 2 sigma + 2") {
  std::mt19937_64 rng(73);
  int violations = 0;
  for (const auto& alpha : {AngleEnsemble::single(kGolden), AngleEnsemble::uniform({kGolden, kSilver})}) {
    const auto prof = diophantine_profile(alpha, 64);
    const int sigma = prof.integer_sigma();
    const int k0 = 2 * sigma + 2;
    for (int t = 0; t < 30; ++t) {
      const auto psi = testing_support::random_trig(rng, 32, 1.0, {}, 1.0);
      const auto u = solve_U(psi, alpha);
      for (int k = 0; k <= 2; ++k)
        if (ck_norm(u, k) > ck_norm(psi, k + k0) / (prof.A * prof.A)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("U and Ubar are linear and commute with d/dx") {
  std::mt19937_64 rng(79);
  const auto alpha = AngleEnsemble::uniform({kGolden, kSilver});
  const auto a = testing_support::random_trig(rng, 24, 1.0);
  const auto b = testing_support::random_trig(rng, 24, 1.0);
  CHECK(ck_norm(solve_U(2.0 * a - b, alpha) - (2.0 * solve_U(a, alpha) - solve_U(b, alpha)), 0) < 1e-12);
  CHECK(ck_norm(solve_Ubar(a.derivative(), alpha) - solve_Ubar(a, alpha).derivative(), 0) < 1e-10);
  CHECK(ck_norm(solve_U(a.derivative(), alpha) - solve_U(a, alpha).derivative(), 0) < 1e-10);
}

}  // TEST_SUITE
