#include "circlelab/kam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "circlelab/errors.hpp"
#include "rng.hpp"

namespace circlelab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Conjugation conjugate_with(const CircleEnsemble& f, const AngleEnsemble& alpha,
                           const std::optional<double>& T, const DichotomyParams& params) {
  const auto zeta = perturbations(f, alpha);
  auto eta = solve_Ubar(averaged_perturbation(zeta, alpha), alpha, params.resonance_floor);
  if (T) eta = smooth_split(eta, *T).first;
  if (ck_norm(eta.derivative(), 0) >= 1.0)
    throw NotADiffeomorphism("conjugation: Id - eta is not invertible (sup |eta'| >= 1)");
  CircleDiffeo g(-eta);
  auto f_new = conjugate_all(g, f);

  Conjugation out{std::move(g), std::move(f_new), std::move(eta)};
  out.norm0_before = triple_norm(zeta, 0);
  out.normk_before = triple_norm(zeta, params.k0);
  out.norm0_after = triple_norm(perturbations(out.f_new, alpha), 0);
  if (out.norm0_after <= 3.0 * std::sqrt(std::abs(params.lambda)))
    out.branch = Branch::small_by_lambda;
  else if (out.norm0_after <= params.C0 * std::pow(out.normk_before, 1.5))
    out.branch = Branch::small_by_power;
  return out;
}

PeriodicMap random_shape(std::mt19937_64& eng, int degree, double amplitude, Resolution res) {
  std::vector<double> c(static_cast<std::size_t>(degree)), s(static_cast<std::size_t>(degree));
  for (int p = 0; p < degree; ++p) {
    const double decay = 1.0 / ((p + 1) * (p + 1));
    c[static_cast<std::size_t>(p)] = (2.0 * detail::uniform01(eng) - 1.0) * decay;
    s[static_cast<std::size_t>(p)] = (2.0 * detail::uniform01(eng) - 1.0) * decay;
  }
  auto phi = PeriodicMap::trigonometric(0.0, c, s, res);
  return phi * (amplitude / ck_norm(phi, 0));
}

}  // namespace

double triple_norm(const Ensemble<PeriodicMap>& z, int k) {
  double s = 0.0;
  for (const auto& a : z) {
    const double n = ck_norm(a.value, k);
    s += a.weight * n * n;
  }
  return std::sqrt(s);
}

bool in_U0(const CircleEnsemble& f) {
  for (const auto& a : f) {
    if (!(std::abs(a.value.min_derivative() - 1.0) < 0.5)) return false;
    if (!(std::abs(a.value.max_derivative() - 1.0) < 0.5)) return false;
  }
  return true;
}

CircleEnsemble conjugated_rotations(const CircleDiffeo& h, const AngleEnsemble& alpha) {
  const auto hinv = invert(h);
  std::vector<CircleDiffeo> fs;
  for (const auto& a : alpha)
    fs.push_back(compose(hinv, compose(CircleDiffeo::rotation(a.value, h.resolution()), h)));
  return alpha.with_values(std::move(fs));
}

CircleEnsemble conjugate_all(const CircleDiffeo& g, const CircleEnsemble& f) {
  const auto ginv = invert(g);
  std::vector<CircleDiffeo> out;
  out.reserve(f.size());
  for (const auto& a : f) out.push_back(compose(compose(g, a.value), ginv));
  return f.with_values(std::move(out));
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::small_by_lambda: return "small_by_lambda";
    case Branch::small_by_power: return "small_by_power";
    case Branch::neither: return "neither";
  }
  return "?";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::obstruction: return "obstruction";
    case StopReason::left_U0: return "left_U0";
    case StopReason::max_iters: return "max_iters";
    case StopReason::resonance: return "resonance";
  }
  return "?";
}

Conjugation first_conjugation(const CircleEnsemble& f, const AngleEnsemble& alpha,
                              const DichotomyParams& params) {
  return conjugate_with(f, alpha, std::nullopt, params);
}

Conjugation smoothed_conjugation(const CircleEnsemble& f, const AngleEnsemble& alpha, double T,
                                 const DichotomyParams& params) {
  if (T < 0.0) throw std::invalid_argument("smoothed_conjugation: T must be >= 0");
  return conjugate_with(f, alpha, T, params);
}

void KamConfig::validate() const {
  if (!(Q > 1.0 && Q < 1.5)) throw std::invalid_argument("KamConfig: Q must lie in (1, 3/2)");
  if (K < 0) throw std::invalid_argument("KamConfig: K must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("KamConfig: max_iters must be >= 1");
  if (!(convergence_tol > 0.0)) throw std::invalid_argument("KamConfig: convergence_tol must be > 0");
  if (!(resonance_floor > 0.0)) throw std::invalid_argument("KamConfig: resonance_floor must be > 0");
}

double schedule(double Q, int n) {
  return std::pow(2.0, std::pow(Q, n));
}

double calibrate_C0(const AngleEnsemble& alpha, int k0, Resolution res, const C0Calibration& opts) {
  auto eng = detail::stream_engine(opts.seed, 0);
  DichotomyParams params;
  params.k0 = k0;
  double worst = 0.0;
  for (double amp : opts.amplitudes) {
    for (int s = 0; s < opts.samples_per_amplitude; ++s) {
      const CircleDiffeo h(random_shape(eng, opts.degree, amp, res));
      const auto f = conjugated_rotations(h, alpha);
      const auto c = first_conjugation(f, alpha, params);
      if (c.normk_before > 0.0) worst = std::max(worst, c.norm0_after / std::pow(c.normk_before, 1.5));
    }
  }
  return 2.0 * worst;
}

KamReport kam_run(const CircleEnsemble& f0, const AngleEnsemble& alpha, const KamConfig& config) {
  config.validate();
  if (!f0.same_weights(alpha)) throw std::invalid_argument("kam_run: weight mismatch");
  const auto res = f0.value(0).resolution();

  KamReport report;
  report.h = CircleDiffeo::identity(res);
  const auto profile = diophantine_profile(alpha, config.q_max > 0 ? config.q_max : res.modes);
  report.sigma = profile.sigma;
  report.A = profile.A;
  report.K = config.K > 0 ? config.K
                          : 4 * (profile.resonant ? 0 : profile.integer_sigma()) + 7;
  report.lambda = mc_lyapunov(f0, config.mc);
  const double lambda_abs = std::abs(report.lambda.value);
  // lower confidence bound: MC noise alone never triggers the obstruction
  const double lambda_low = std::max(lambda_abs - 3.0 * report.lambda.std_error, 0.0);

  CircleEnsemble f = f0;
  auto finish = [&] {
    const auto zeta = perturbations(f, alpha);
    report.final_d0 = triple_norm(zeta, 0);
    report.ratio = lambda_abs > 0.0 ? report.final_d0 / std::sqrt(lambda_abs) : 0.0;
    report.f_final = f;
    return report;
  };

  if (profile.resonant) {
    report.stop_reason = StopReason::resonance;
    return finish();
  }
  report.C0 = config.C0 > 0.0 ? config.C0 : calibrate_C0(alpha, report.K, res);

  DichotomyParams params{lambda_abs, report.C0, report.K, config.resonance_floor};
  report.stop_reason = StopReason::max_iters;
  for (int n = 0; n < config.max_iters; ++n) {
    const auto zeta = perturbations(f, alpha);
    KamStep step{n, schedule(config.Q, n), triple_norm(zeta, 0), triple_norm(zeta, report.K),
                 "iterated"};
    auto stop = [&](StopReason r) {
      step.action = "stopped";
      report.steps.push_back(step);
      report.stop_reason = r;
    };
    if (step.norm0 < config.convergence_tol) {
      stop(StopReason::converged);
      break;
    }
    if (!in_U0(f)) {
      stop(StopReason::left_U0);
      break;
    }
    try {
      if (std::sqrt(lambda_low) >= report.C0 / 3.0 * std::pow(step.normK, 1.5)) {
        auto c = first_conjugation(f, alpha, params);
        report.h = compose(c.g, report.h);
        f = std::move(c.f_new);
        stop(StopReason::obstruction);
        break;
      }
      auto c = smoothed_conjugation(f, alpha, step.T, params);
      report.h = compose(c.g, report.h);
      f = std::move(c.f_new);
    } catch (const ResonanceError& e) {
      report.resonant_mode = e.mode();
      stop(StopReason::resonance);
      break;
    }
    report.steps.push_back(step);
  }
  return finish();
}

double commutator_defect(const CircleEnsemble& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const double d = distance(compose(f.value(i), f.value(j)), compose(f.value(j), f.value(i)), 0);
      s += 2.0 * f.weight(i) * f.weight(j) * d * d;  // (i, j) and (j, i)
    }
  }
  return std::sqrt(s);
}

void write_report(std::ostream& os, const KamReport& r) {
  os << "n,T_n,norm0,normK,action\n";
  for (const auto& s : r.steps)
    os << s.n << ',' << fmt(s.T) << ',' << fmt(s.norm0) << ',' << fmt(s.normK) << ',' << s.action
       << '\n';
  os << "\n[summary]\n";
  os << "stop_reason=" << to_string(r.stop_reason) << '\n';
  os << "iterations=" << r.steps.size() << '\n';
  os << "final_d0=" << fmt(r.final_d0) << '\n';
  os << "lambda=" << fmt(r.lambda.value) << '\n';
  os << "lambda_std_error=" << fmt(r.lambda.std_error) << '\n';
  os << "lambda_n_steps=" << r.lambda.n_steps << '\n';
  os << "lambda_n_samples=" << r.lambda.n_samples << '\n';
  os << "lambda_seed=" << r.lambda.seed << '\n';
  os << "ratio=" << fmt(r.ratio) << '\n';
  os << "C0=" << fmt(r.C0) << '\n';
  os << "K=" << r.K << '\n';
  os << "sigma=" << fmt(r.sigma) << '\n';
  os << "A=" << fmt(r.A) << '\n';
  if (r.stop_reason == StopReason::resonance) os << "resonant_mode=" << r.resonant_mode << '\n';
}

}  // namespace circlelab
