#include "circlelab/cohomology.hpp"

#include <cmath>
#include <numbers>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

PeriodicMap divide(const PeriodicMap& psi, const AveragedMultiplier& m, bool conjugate,
                   double floor) {
  if (m.modes() < psi.modes()) throw std::invalid_argument("solver: multiplier has too few modes");
  std::vector<std::complex<double>> out(static_cast<std::size_t>(psi.modes() + 1), 0.0);
  for (int q = 1; q <= psi.modes(); ++q) {
    const auto c = psi.coeff(q);
    if (c == 0.0) continue;
    const auto mq = conjugate ? std::conj(m(q)) : m(q);
    const auto den = 1.0 - mq;
    if (std::abs(den) <= floor) throw ResonanceError(q, std::abs(den));
    out[static_cast<std::size_t>(q)] = c / den;
  }
  return PeriodicMap::from_coefficients(std::move(out), psi.resolution());
}

}  // namespace

AveragedMultiplier::AveragedMultiplier(const AngleEnsemble& alpha, int modes) {
  if (modes < 0) throw std::invalid_argument("AveragedMultiplier: negative mode count");
  m_.assign(static_cast<std::size_t>(modes + 1), 0.0);
  m_[0] = 1.0;
  for (int q = 1; q <= modes; ++q) {
    std::complex<double> s = 0.0;
    for (const auto& a : alpha) {
      // reduce q*alpha mod 1 before the trig call
      const double t = q * a.value - std::floor(q * a.value);
      s += a.weight * std::polar(1.0, 2.0 * std::numbers::pi * t);
    }
    m_[static_cast<std::size_t>(q)] = s;
  }
}

std::complex<double> AveragedMultiplier::operator()(int q) const {
  const int a = std::abs(q);
  if (a > modes()) throw std::out_of_range("AveragedMultiplier: mode out of range");
  const auto v = m_[static_cast<std::size_t>(a)];
  return q < 0 ? std::conj(v) : v;
}

PeriodicMap transfer_T0(const PeriodicMap& phi, const AngleEnsemble& alpha) {
  const AveragedMultiplier m(alpha, phi.modes());
  std::vector<std::complex<double>> c(phi.coefficients().begin(), phi.coefficients().end());
  for (int q = 1; q <= phi.modes(); ++q) c[static_cast<std::size_t>(q)] *= m(q);
  return PeriodicMap::from_coefficients(std::move(c), phi.resolution());
}

PeriodicMap transfer_T(const PeriodicMap& phi, const CircleEnsemble& f) {
  const auto& res = phi.resolution();
  std::vector<double> acc(static_cast<std::size_t>(res.grid), 0.0);
  for (const auto& atom : f) {
    if (!(atom.value.resolution() == res)) throw std::invalid_argument("transfer_T: resolution mismatch");
    const auto s = atom.value.phi().samples();
    for (int j = 0; j < res.grid; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      acc[jj] += atom.weight * phi(phi.grid_point(j) + s[jj]);
    }
  }
  double residual = 0.0;
  auto out = PeriodicMap::from_samples(acc, res, &residual);
  if (residual > 1e-8) throw SpectralUnderresolution(residual);
  return out;
}

PeriodicMap solve_U(const PeriodicMap& psi, const AngleEnsemble& alpha, double resonance_floor) {
  return solve_U(psi, AveragedMultiplier(alpha, psi.modes()), resonance_floor);
}

PeriodicMap solve_U(const PeriodicMap& psi, const AveragedMultiplier& m, double resonance_floor) {
  return divide(psi, m, false, resonance_floor);
}

PeriodicMap solve_Ubar(const PeriodicMap& psi, const AngleEnsemble& alpha, double resonance_floor) {
  return solve_Ubar(psi, AveragedMultiplier(alpha, psi.modes()), resonance_floor);
}

PeriodicMap solve_Ubar(const PeriodicMap& psi, const AveragedMultiplier& m,
                       double resonance_floor) {
  return divide(psi, m, true, resonance_floor);
}

}  // namespace circlelab
