#pragma once

// Random trigonometric polynomials and small helpers shared by the test programs.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "circlelab/circle_diffeo.hpp"
#include "circlelab/periodic_map.hpp"

namespace testing_support {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
inline const double kSilver = std::sqrt(2.0) - 1.0;

/// Coefficients decaying like 1 / p^decay, uniform phases, mean `mean`.
inline circlelab::PeriodicMap random_trig(std::mt19937_64& rng, int degree, double scale,
                                          circlelab::Resolution res = {}, double decay = 2.0,
                                          double mean = 0.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(degree)), s(static_cast<std::size_t>(degree));
  for (int p = 1; p <= degree; ++p) {
    c[static_cast<std::size_t>(p - 1)] = scale * u(rng) / std::pow(p, decay);
    s[static_cast<std::size_t>(p - 1)] = scale * u(rng) / std::pow(p, decay);
  }
  return circlelab::PeriodicMap::trigonometric(mean, c, s, res);
}

/// Direct evaluation of sum_p c_p e^{2 i pi p x} from the stored coefficients.
inline double direct_sum(const circlelab::PeriodicMap& phi, double x) {
  double s = phi.coeff(0).real();
  for (int p = 1; p <= phi.modes(); ++p) {
    const auto c = phi.coeff(p);
    s += 2.0 * (c.real() * std::cos(kTwoPi * p * x) - c.imag() * std::sin(kTwoPi * p * x));
  }
  return s;
}

/// sup over a dense uniform grid of |fn|.
template <class F>
double dense_sup(F&& fn, int points = 100000) {
  double m = 0.0;
  for (int k = 0; k < points; ++k) m = std::max(m, std::abs(fn(static_cast<double>(k) / points)));
  return m;
}

inline double dist_to_integer(double x) { return std::abs(x - std::round(x)); }

}  // namespace testing_support
