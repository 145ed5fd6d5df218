#pragma once

#include <utility>
#include <vector>

#include "circlelab/ensemble.hpp"
#include "circlelab/periodic_map.hpp"

namespace circlelab {

/// Lift f = Id + phi of an orientation-preserving circle diffeomorphism.
class CircleDiffeo {
 public:
  /// Throws NotADiffeomorphism if 1 + phi' <= 0 somewhere on the refined grid.
  explicit CircleDiffeo(PeriodicMap phi);

  static CircleDiffeo identity(Resolution res = {});
  static CircleDiffeo rotation(double alpha, Resolution res = {});

  const PeriodicMap& phi() const { return phi_; }
  const Resolution& resolution() const { return phi_.resolution(); }

  double operator()(double x) const { return x + phi_(x); }
  double derivative(double x) const { return 1.0 + phi_.derivative_at(x, 1); }
  double min_derivative() const { return min_derivative_; }
  double max_derivative() const { return max_derivative_; }

 private:
  PeriodicMap phi_;
  double min_derivative_ = 1.0;
  double max_derivative_ = 1.0;
};

using CircleEnsemble = Ensemble<CircleDiffeo>;

/// (f o g)(x) = f(g(x)), re-projected onto the band limit. Throws
/// SpectralUnderresolution when the discarded part exceeds 1e-8.
CircleDiffeo compose(const CircleDiffeo& f, const CircleDiffeo& g);

/// Newton inversion of the lift at every grid point. Throws NonConvergence.
CircleDiffeo invert(const CircleDiffeo& f);

/// h o f o h^{-1}.
CircleDiffeo conjugate(const CircleDiffeo& h, const CircleDiffeo& f);

/// Birkhoff estimate (F^n(x0) - x0) / n averaged over `starts` equally spaced x0.
double rotation_number(const CircleDiffeo& f, long n_iter, int starts = 4);

/// d_k(f, g) = ||f - g||_k.
double distance(const CircleDiffeo& f, const CircleDiffeo& g, int k);

/// d_k(f, r_alpha) = ||phi - alpha||_k.
double distance_to_rotation(const CircleDiffeo& f, double alpha, int k);

/// Random diophantine profile: value(q) = ||dist(q alpha, Z)||_{L2(Omega)}.
struct DiophantineProfile {
  std::vector<std::pair<int, double>> values;  // q = 1..q_max
  double A = 0.0;
  double sigma = 0.0;
  int q_max = 0;
  bool resonant = false;

  /// value(q) for any nonzero q with |q| <= q_max.
  double value(int q) const;
  /// Smallest integer >= sigma (the integer exponent used in derivative-loss counts).
  int integer_sigma() const;
};

/// Probes 1 <= q <= q_max. sigma is the smallest exponent (resolution 1e-3) for which
/// q^sigma value(q) over the upper half of the probed range is no smaller than over the
/// lower half; A = min_q q^sigma value(q), so value(q) >= A / q^sigma for every probed q.
DiophantineProfile diophantine_profile(const AngleEnsemble& alpha, int q_max);

}  // namespace circlelab
