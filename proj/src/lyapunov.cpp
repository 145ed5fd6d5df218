#include "circlelab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"
#include "trig_eval.hpp"

namespace circlelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<detail::TrigEvaluator> evaluators(const CircleEnsemble& f) {
  std::vector<detail::TrigEvaluator> out;
  out.reserve(f.size());
  for (const auto& a : f) out.emplace_back(a.value.phi());
  return out;
}

}  // namespace

LyapunovEstimate mc_lyapunov(const CircleEnsemble& f, const McOptions& opts) {
  if (opts.n_steps < 1) throw std::invalid_argument("mc_lyapunov: n_steps must be >= 1");
  if (opts.n_samples < 1) throw std::invalid_argument("mc_lyapunov: n_samples must be >= 1");
  const auto eval = evaluators(f);
  const std::size_t m = f.size();
  std::vector<double> per_sample(static_cast<std::size_t>(opts.n_samples));

  detail::parallel_for(per_sample.size(), opts.threads, [&](std::size_t s) {
    auto eng = detail::stream_engine(opts.seed, s);
    double x = detail::uniform01(eng);
    for (long k = 0; k < opts.burn_in; ++k) {
      const auto i = f.sample_index(detail::uniform01(eng));
      x = detail::wrap01(x + eval[i](x).first);
    }
    double sum = 0.0;
    for (long k = 0; k < opts.n_steps; ++k) {
      const auto i = f.sample_index(detail::uniform01(eng));
      const auto [v, d] = eval[i](x);
      if (opts.estimator == Estimator::pathwise) {
        sum += std::log1p(d);
      } else {
        double e = f.weight(i) * std::log1p(d);
        for (std::size_t j = 0; j < m; ++j)
          if (j != i) e += f.weight(j) * std::log1p(eval[j](x).second);
        sum += e;
      }
      x = detail::wrap01(x + v);
    }
    per_sample[s] = sum / static_cast<double>(opts.n_steps);
  });

  LyapunovEstimate est;
  est.n_steps = opts.n_steps;
  est.n_samples = opts.n_samples;
  est.seed = opts.seed;
  const double n = static_cast<double>(per_sample.size());
  est.value = std::accumulate(per_sample.begin(), per_sample.end(), 0.0) / n;
  if (per_sample.size() > 1) {
    double ss = 0.0;
    for (double v : per_sample) ss += (v - est.value) * (v - est.value);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  const auto [lo, hi] = std::minmax_element(per_sample.begin(), per_sample.end());
  est.spread = *hi - *lo;
  return est;
}

LyapunovEstimate mc_lyapunov(const CircleEnsemble& f, long n_steps, int n_samples,
                             std::uint64_t seed) {
  McOptions opts;
  opts.n_steps = n_steps;
  opts.n_samples = n_samples;
  opts.seed = seed;
  return mc_lyapunov(f, opts);
}

StationaryHistogram mc_stationary(const CircleEnsemble& f, long burn_in, long n_draws, int bins,
                                  std::uint64_t seed) {
  if (burn_in < 1 || n_draws < 1) throw std::invalid_argument("mc_stationary: burn_in and n_draws must be >= 1");
  if (bins < 1) throw std::invalid_argument("mc_stationary: bins must be >= 1");
  const auto eval = evaluators(f);
  auto eng = detail::stream_engine(seed, 0);
  double x = detail::uniform01(eng);
  for (long k = 0; k < burn_in; ++k)
    x = detail::wrap01(x + eval[f.sample_index(detail::uniform01(eng))](x).first);

  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  std::vector<std::complex<double>> acc(kStationaryMoments, 0.0);
  for (long k = 0; k < n_draws; ++k) {
    x = detail::wrap01(x + eval[f.sample_index(detail::uniform01(eng))](x).first);
    const auto b = std::min(static_cast<std::size_t>(x * bins), counts.size() - 1);
    ++counts[b];
    const auto z = std::polar(1.0, kTwoPi * x);
    std::complex<double> zp = 1.0;
    for (auto& a : acc) {
      zp *= z;
      a += zp;
    }
  }
  StationaryHistogram out;
  out.n_draws = n_draws;
  const double inv = 1.0 / static_cast<double>(n_draws);
  for (long c : counts) out.masses.push_back(static_cast<double>(c) * inv);
  for (const auto& a : acc) out.moments.push_back(a * inv);
  return out;
}

Ensemble<PeriodicMap> perturbations(const CircleEnsemble& f, const AngleEnsemble& alpha) {
  if (!f.same_weights(alpha))
    throw std::invalid_argument("perturbations: diffeo and angle ensembles differ in weights");
  std::vector<PeriodicMap> z;
  z.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) z.push_back(f.value(i).phi() - alpha.value(i));
  return f.with_values(std::move(z));
}

PeriodicMap averaged_perturbation(const Ensemble<PeriodicMap>& zeta, const AngleEnsemble& alpha) {
  if (!zeta.same_weights(alpha)) throw std::invalid_argument("averaged_perturbation: weight mismatch");
  PeriodicMap out(zeta.value(0).resolution());
  for (std::size_t i = 0; i < zeta.size(); ++i)
    out += zeta.value(i).shifted(-alpha.value(i)) * zeta.weight(i);
  return out;
}

PeriodicMap stationary_density_order1(const CircleEnsemble& f, const AngleEnsemble& alpha,
                                      double resonance_floor) {
  const auto zeta = perturbations(f, alpha);
  const auto eta = solve_Ubar(averaged_perturbation(zeta, alpha), alpha, resonance_floor);
  return -eta.derivative() + 1.0;
}

Order2Expansion order2_expansion(const CircleEnsemble& f, const AngleEnsemble& alpha,
                                 double resonance_floor) {
  const auto zeta = perturbations(f, alpha);
  Order2Expansion out;
  out.eta = solve_Ubar(averaged_perturbation(zeta, alpha), alpha, resonance_floor);
  const auto deta = out.eta.derivative();

  double direct = 0.0;
  double parseval = 0.0;
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    const double a = alpha.value(i);
    const auto g = zeta.value(i).derivative() + deta - deta.shifted(a);
    double sq = 0.0;
    for (double v : g.samples()) sq += v * v;
    direct += zeta.weight(i) * sq / g.grid_size();

    double modes = 0.0;
    for (int p = zeta.value(i).modes(); p >= 1; --p) {
      const auto shift = 1.0 - std::polar(1.0, kTwoPi * detail::wrap01(p * a));
      const auto c = zeta.value(i).coeff(p) + out.eta.coeff(p) * shift;
      modes += 2.0 * kTwoPi * kTwoPi * p * p * std::norm(c);
    }
    parseval += zeta.weight(i) * modes;
  }
  out.direct = -0.5 * direct;
  out.parseval = -0.5 * parseval;
  return out;
}

double analytic_lyapunov_order2(const CircleEnsemble& f, const AngleEnsemble& alpha,
                                double resonance_floor) {
  const auto e = order2_expansion(f, alpha, resonance_floor);
  if (e.direct > 0.0) throw std::logic_error("analytic_lyapunov_order2: positive lambda_2");
  if (std::abs(e.direct - e.parseval) > 1e-10 * std::max(1.0, std::abs(e.direct)))
    throw std::logic_error("analytic_lyapunov_order2: direct and Fourier forms disagree");
  return e.direct;
}

double perturbation_size(const CircleEnsemble& f, const AngleEnsemble& alpha, int k) {
  if (!f.same_weights(alpha)) throw std::invalid_argument("perturbation_size: weight mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = distance_to_rotation(f.value(i), alpha.value(i), k);
    s += f.weight(i) * d * d * d;
  }
  return std::cbrt(s);
}

}  // namespace circlelab
