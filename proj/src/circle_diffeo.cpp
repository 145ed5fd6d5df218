#include "circlelab/circle_diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

constexpr double kAliasingLimit = 1e-8;
constexpr int kNewtonMaxIter = 50;
constexpr double kNewtonTol = 1e-13;

PeriodicMap project_checked(const std::vector<double>& values, Resolution res) {
  double residual = 0.0;
  auto out = PeriodicMap::from_samples(values, res, &residual);
  if (residual > kAliasingLimit) throw SpectralUnderresolution(residual);
  return out;
}

double dist_to_integer(double x) {
  return std::abs(x - std::round(x));
}

}  // namespace

CircleDiffeo::CircleDiffeo(PeriodicMap phi) : phi_(std::move(phi)) {
  if (phi_.effective_degree() == 0) return;
  const auto d = phi_.refined_samples(4, 1);
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  min_derivative_ = 1.0 + *lo;
  max_derivative_ = 1.0 + *hi;
  if (!(min_derivative_ > 0.0))
    throw NotADiffeomorphism("CircleDiffeo: 1 + phi' is not positive (min = " +
                             std::to_string(min_derivative_) + ")");
}

CircleDiffeo CircleDiffeo::identity(Resolution res) {
  return CircleDiffeo(PeriodicMap(res));
}

CircleDiffeo CircleDiffeo::rotation(double alpha, Resolution res) {
  return CircleDiffeo(PeriodicMap::constant(alpha, res));
}

CircleDiffeo compose(const CircleDiffeo& f, const CircleDiffeo& g) {
  const auto& res = g.resolution();
  if (!(res == f.resolution())) throw std::invalid_argument("compose: resolution mismatch");
  const auto gs = g.phi().samples();
  std::vector<double> values(gs.size());
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const double x = g.phi().grid_point(static_cast<int>(j));
    values[j] = gs[j] + f.phi()(x + gs[j]);
  }
  return CircleDiffeo(project_checked(values, res));
}

CircleDiffeo invert(const CircleDiffeo& f) {
  const auto& phi = f.phi();
  const auto& res = f.resolution();
  std::vector<double> values(static_cast<std::size_t>(res.grid));
  for (int j = 0; j < res.grid; ++j) {
    const double x = phi.grid_point(j);
    double y = x - phi(x);
    bool converged = false;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const double r = y + phi(y) - x;
      const double step = r / (1.0 + phi.derivative_at(y, 1));
      y -= step;
      if (std::abs(step) < kNewtonTol) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NonConvergence("invert: Newton iteration did not converge");
    values[static_cast<std::size_t>(j)] = y - x;
  }
  return CircleDiffeo(project_checked(values, res));
}

CircleDiffeo conjugate(const CircleDiffeo& h, const CircleDiffeo& f) {
  return compose(compose(h, f), invert(h));
}

double rotation_number(const CircleDiffeo& f, long n_iter, int starts) {
  if (n_iter < 1) throw std::invalid_argument("rotation_number: n_iter must be >= 1");
  starts = std::max(starts, 1);
  double total = 0.0;
  for (int s = 0; s < starts; ++s) {
    const double x0 = static_cast<double>(s) / starts;
    // Lift kept as whole turns + fractional part to avoid precision loss.
    double whole = 0.0;
    double frac = x0;
    for (long n = 0; n < n_iter; ++n) {
      const double y = frac + f.phi()(frac);
      const double fl = std::floor(y);
      whole += fl;
      frac = y - fl;
    }
    total += (whole + frac - x0) / static_cast<double>(n_iter);
  }
  return total / starts;
}

double distance(const CircleDiffeo& f, const CircleDiffeo& g, int k) {
  return ck_norm(f.phi() - g.phi(), k);
}

double distance_to_rotation(const CircleDiffeo& f, double alpha, int k) {
  return ck_norm(f.phi() - alpha, k);
}

double DiophantineProfile::value(int q) const {
  const int a = std::abs(q);
  if (a < 1 || a > q_max) throw std::out_of_range("DiophantineProfile: q outside probed range");
  return values[static_cast<std::size_t>(a - 1)].second;
}

int DiophantineProfile::integer_sigma() const {
  return static_cast<int>(std::ceil(sigma - 1e-12));
}

DiophantineProfile diophantine_profile(const AngleEnsemble& alpha, int q_max) {
  if (q_max < 1) throw std::invalid_argument("diophantine_profile: q_max must be >= 1");
  DiophantineProfile prof;
  prof.q_max = q_max;
  for (int q = 1; q <= q_max; ++q) {
    double s = 0.0;
    for (const auto& a : alpha) {
      const double d = dist_to_integer(q * a.value);
      s += a.weight * d * d;
    }
    const double v = std::sqrt(s);
    prof.values.emplace_back(q, v);
    if (v < 1e-12) prof.resonant = true;
  }
  if (prof.resonant) {
    prof.A = 0.0;
    prof.sigma = std::numeric_limits<double>::infinity();
    return prof;
  }

  auto weighted_min = [&](double s, int lo, int hi) {
    double m = std::numeric_limits<double>::infinity();
    for (int q = lo; q <= hi; ++q) m = std::min(m, std::pow(q, s) * prof.value(q));
    return m;
  };
  const int half = q_max / 2;
  double sigma = 0.0;
  if (half >= 1) {
    constexpr double kStep = 1e-3;
    constexpr double kMaxSigma = 20.0;
    for (sigma = 0.0; sigma < kMaxSigma; sigma += kStep) {
      if (weighted_min(sigma, half + 1, q_max) >= weighted_min(sigma, 1, half)) break;
    }
    sigma = std::round(sigma / kStep) * kStep;
  }
  prof.sigma = sigma;
  prof.A = weighted_min(sigma, 1, q_max);
  return prof;
}

}  // namespace circlelab
