#pragma once

// Averaged transfer operators and the small-divisor solvers of the
// cohomological equation phi - T0 phi = psi - mean(psi).

#include <complex>
#include <vector>

#include "circlelab/circle_diffeo.hpp"
#include "circlelab/ensemble.hpp"
#include "circlelab/periodic_map.hpp"

namespace circlelab {

inline constexpr double kDefaultResonanceFloor = 1e-10;

/// m_q = E[exp(2 i pi q alpha)] for 0 <= q <= modes.
class AveragedMultiplier {
 public:
  AveragedMultiplier(const AngleEnsemble& alpha, int modes);

  int modes() const { return static_cast<int>(m_.size()) - 1; }
  /// m_q for any |q| <= modes; m_{-q} = conj(m_q).
  std::complex<double> operator()(int q) const;
  /// |1 - m_q|.
  double divisor(int q) const { return std::abs(1.0 - (*this)(q)); }

 private:
  std::vector<std::complex<double>> m_;
};

/// T0 phi = E[phi o r_alpha], coefficient-wise c_q -> c_q m_q.
PeriodicMap transfer_T0(const PeriodicMap& phi, const AngleEnsemble& alpha);

/// T phi = E[phi o f], grid-wise average re-projected onto the band.
PeriodicMap transfer_T(const PeriodicMap& phi, const CircleEnsemble& f);

/// U psi: sum over q != 0 of psi_q / (1 - m_q) e_q. Throws ResonanceError for a mode with
/// psi_q != 0 and |1 - m_q| <= floor.
PeriodicMap solve_U(const PeriodicMap& psi, const AngleEnsemble& alpha,
                    double resonance_floor = kDefaultResonanceFloor);
PeriodicMap solve_U(const PeriodicMap& psi, const AveragedMultiplier& m,
                    double resonance_floor = kDefaultResonanceFloor);

/// Ubar psi: same with denominators 1 - conj(m_q).
PeriodicMap solve_Ubar(const PeriodicMap& psi, const AngleEnsemble& alpha,
                       double resonance_floor = kDefaultResonanceFloor);
PeriodicMap solve_Ubar(const PeriodicMap& psi, const AveragedMultiplier& m,
                       double resonance_floor = kDefaultResonanceFloor);

}  // namespace circlelab
