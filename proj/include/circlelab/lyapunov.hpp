#pragma once

// Lyapunov exponents of random circle diffeomorphisms: Monte Carlo estimators,
// empirical stationary measures and the order-2 analytic expansion.

#include <complex>
#include <cstdint>
#include <vector>

#include "circlelab/circle_diffeo.hpp"
#include "circlelab/cohomology.hpp"
#include "circlelab/ensemble.hpp"
#include "circlelab/periodic_map.hpp"

namespace circlelab {

/// pathwise: accumulate ln f'(x_k) of the atom actually drawn at step k.
/// conditional: accumulate E_i[ln f_i'(x_k)] over all atoms (same chain, lower variance,
/// same expectation).
enum class Estimator { pathwise, conditional };

struct McOptions {
  long n_steps = 10000;
  int n_samples = 100;
  std::uint64_t seed = 1;
  long burn_in = 0;
  Estimator estimator = Estimator::pathwise;
  int threads = 1;
};

struct LyapunovEstimate {
  double value = 0.0;      // nats per step
  double std_error = 0.0;  // sample sd / sqrt(n_samples)
  long n_steps = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  double spread = 0.0;  // max - min over the per-sample (per start point) estimates
};

/// Independent chains x_{k+1} = f_k(x_k), each from its own uniform x_0 and RNG stream.
LyapunovEstimate mc_lyapunov(const CircleEnsemble& f, const McOptions& opts);
LyapunovEstimate mc_lyapunov(const CircleEnsemble& f, long n_steps, int n_samples,
                             std::uint64_t seed);

struct StationaryHistogram {
  std::vector<double> masses;                 // uniform bins on [0, 1), sum 1
  std::vector<std::complex<double>> moments;  // moments[p-1] = mean of exp(2 i pi p x_k)
  long n_draws = 0;

  int bins() const { return static_cast<int>(masses.size()); }
  /// Empirical integral of cos(2 pi p x) (p >= 1, p <= moments.size()).
  double cos_moment(int p) const { return moments.at(static_cast<std::size_t>(p - 1)).real(); }
};

inline constexpr int kStationaryMoments = 8;

/// One chain from a uniform x_0: burn_in discarded steps, then n_draws recorded points.
StationaryHistogram mc_stationary(const CircleEnsemble& f, long burn_in, long n_draws, int bins,
                                  std::uint64_t seed);

/// zeta_i = phi_i - alpha_i, atom by atom. The ensembles must carry the same weights.
Ensemble<PeriodicMap> perturbations(const CircleEnsemble& f, const AngleEnsemble& alpha);

/// zeta_bar = E[zeta o r_{-alpha}].
PeriodicMap averaged_perturbation(const Ensemble<PeriodicMap>& zeta, const AngleEnsemble& alpha);

/// h1 = 1 - (Ubar zeta_bar)'.
PeriodicMap stationary_density_order1(const CircleEnsemble& f, const AngleEnsemble& alpha,
                                      double resonance_floor = kDefaultResonanceFloor);

struct Order2Expansion {
  PeriodicMap eta;       // Ubar zeta_bar
  double direct = 0.0;   // -1/2 E int (zeta' + eta' - eta' o r_alpha)^2, grid quadrature
  double parseval = 0.0;  // same quantity summed over Fourier modes
};

Order2Expansion order2_expansion(const CircleEnsemble& f, const AngleEnsemble& alpha,
                                 double resonance_floor = kDefaultResonanceFloor);

/// lambda_2. Checks lambda_2 <= 0 and that both forms agree to 1e-10, throwing
/// std::logic_error otherwise.
double analytic_lyapunov_order2(const CircleEnsemble& f, const AngleEnsemble& alpha,
                                double resonance_floor = kDefaultResonanceFloor);

/// (E[d_k(f, r_alpha)^3])^{1/3}.
double perturbation_size(const CircleEnsemble& f, const AngleEnsemble& alpha, int k = 3);

}  // namespace circlelab
