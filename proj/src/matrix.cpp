#include "circlelab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "circlelab/errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace circlelab {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::complex<double> conformal_z(const Mat2& m) {
  return {m.a + m.d, m.c - m.b};
}

LyapunovEstimate summarize(std::vector<double>& per_sample, const McOptions& opts) {
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

}  // namespace

Mat2 Mat2::rotation(double alpha) {
  const double c = std::cos(kPi * alpha), s = std::sin(kPi * alpha);
  return {c, -s, s, c};
}

Mat2 Mat2::inverse() const {
  const double D = det();
  if (D == 0.0) throw std::invalid_argument("Mat2::inverse: singular matrix");
  return {d / D, -b / D, -c / D, a / D};
}

std::string to_string(MatrixNorm n) {
  return n == MatrixNorm::operator2 ? "operator2" : "frobenius";
}

double norm(const Mat2& m, MatrixNorm which) {
  if (which == MatrixNorm::frobenius) return std::sqrt(m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
  // largest singular value of z -> (Zc z + Z' conj z) / 2
  return 0.5 * (std::abs(conformal_z(m)) + std::abs(hyperbolic_z(m)));
}

std::complex<double> perturbation_z(const Mat2& E) {
  return {E.a + E.d, E.b - E.c};
}

std::complex<double> perturbation_z_traces(const Mat2& E) {
  const Mat2 ER = E * Mat2::rotation(0.5);
  return {E.trace(), ER.trace()};
}

std::complex<double> hyperbolic_z(const Mat2& E) {
  return {E.a - E.d, E.b + E.c};
}

double nearest_rotation_angle(const Mat2& M) {
  return std::atan2(M.c - M.b, M.a + M.d) / kPi;
}

double distance_to_rotations(const Mat2& M, MatrixNorm which) {
  return norm(M - Mat2::rotation(nearest_rotation_angle(M)), which);
}

std::pair<Mat2, double> sl2_normalize(const Mat2& M) {
  const double D = M.det();
  if (!(D > 0.0)) throw std::invalid_argument("sl2_normalize: det must be positive");
  return {(1.0 / std::sqrt(D)) * M, 0.5 * std::log(D)};
}

CircleDiffeo projective_diffeo(const Mat2& M, Resolution res) {
  if (!(M.det() > 0.0)) throw std::invalid_argument("projective_diffeo: det must be positive");
  res.validate();
  std::vector<double> phi(static_cast<std::size_t>(res.grid));
  double prev = nearest_rotation_angle(M);  // lift hint at x = 0
  for (int j = 0; j < res.grid; ++j) {
    const double x = static_cast<double>(j) / res.grid;
    const auto w = M.apply(std::cos(kPi * x), std::sin(kPi * x));
    const double t = std::atan2(w[1], w[0]) / kPi;
    const double hint = j == 0 ? prev : prev + 1.0 / res.grid;
    const double f = t + std::round(hint - t);
    phi[static_cast<std::size_t>(j)] = f - x;
    prev = f;
  }
  return CircleDiffeo(PeriodicMap::from_samples(phi, res));
}

double projective_derivative(const Mat2& M, double x) {
  const auto w = M.apply(std::cos(kPi * x), std::sin(kPi * x));
  return M.det() / (w[0] * w[0] + w[1] * w[1]);
}

PeriodicMap projective_first_order(const Mat2& M, double alpha, Resolution res) {
  const Mat2 E = M - Mat2::rotation(alpha);
  return PeriodicMap::from_function(
      [&](double x) {
        const auto w = E.apply(std::cos(kPi * x), std::sin(kPi * x));
        const auto v = std::complex<double>(w[0], w[1]) * std::polar(1.0, -kPi * (x + alpha));
        return v.imag() / kPi;
      },
      res);
}

LyapunovEstimate mc_matrix_lyapunov(const MatrixEnsemble& M, const McOptions& opts) {
  if (opts.n_steps < 1) throw std::invalid_argument("mc_matrix_lyapunov: n_steps must be >= 1");
  if (opts.n_samples < 1) throw std::invalid_argument("mc_matrix_lyapunov: n_samples must be >= 1");
  for (const auto& atom : M)
    if (atom.value.det() == 0.0) throw std::invalid_argument("mc_matrix_lyapunov: singular atom");
  constexpr double kLow = 0x1.0p-20, kHigh = 0x1.0p20;
  std::vector<double> per_sample(static_cast<std::size_t>(opts.n_samples));

  detail::parallel_for(per_sample.size(), opts.threads, [&](std::size_t s) {
    auto eng = detail::stream_engine(opts.seed, s);
    const double theta = kPi * detail::uniform01(eng);
    double x = std::cos(theta), y = std::sin(theta);
    auto unit_step = [&](const Mat2& m) {
      const auto w = m.apply(x, y);
      const double r = std::hypot(w[0], w[1]);
      x = w[0] / r;
      y = w[1] / r;
      return r;
    };
    for (long k = 0; k < opts.burn_in; ++k) unit_step(M.value(M.sample_index(detail::uniform01(eng))));

    double sum = 0.0;
    if (opts.estimator == Estimator::pathwise) {
      for (long k = 0; k < opts.n_steps; ++k) {
        const auto w = M.value(M.sample_index(detail::uniform01(eng))).apply(x, y);
        x = w[0];
        y = w[1];
        const double r = std::hypot(x, y);
        if ((k + 1) % 32 == 0 || r < kLow || r > kHigh) {
          sum += std::log(r);
          x /= r;
          y /= r;
        }
      }
      sum += std::log(std::hypot(x, y));
    } else {
      for (long k = 0; k < opts.n_steps; ++k) {
        const auto i = M.sample_index(detail::uniform01(eng));
        double e = 0.0;
        for (std::size_t j = 0; j < M.size(); ++j) {
          if (j == i) continue;
          const auto w = M.value(j).apply(x, y);
          e += M.weight(j) * std::log(std::hypot(w[0], w[1]));
        }
        e += M.weight(i) * std::log(unit_step(M.value(i)));
        sum += e;
      }
    }
    per_sample[s] = sum / static_cast<double>(opts.n_steps);
  });
  return summarize(per_sample, opts);
}

MatrixOrder2 analytic_matrix_lyapunov_order2(const MatrixEnsemble& M, const AngleEnsemble& alpha,
                                             double resonance_floor) {
  if (!M.same_weights(alpha)) throw std::invalid_argument("analytic_matrix_lyapunov_order2: weight mismatch");
  std::complex<double> m = 0.0, S = 0.0, zbar = 0.0;
  std::vector<std::complex<double>> z(M.size());
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double a = alpha.value(i);
    z[i] = hyperbolic_z(M.value(i) - Mat2::rotation(a));
    m += alpha.weight(i) * std::polar(1.0, 2.0 * kPi * a);
    S += alpha.weight(i) * z[i] * std::polar(1.0, kPi * a);
    zbar += alpha.weight(i) * z[i];
  }
  if (std::abs(1.0 - m) <= resonance_floor) throw ResonanceError(2, std::abs(1.0 - m));

  MatrixOrder2 out;
  bool constant_angle = true;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double a = alpha.value(i);
    const auto k = (1.0 - std::polar(1.0, 2.0 * kPi * a)) / (1.0 - m);
    out.value += alpha.weight(i) * std::norm(z[i] * std::polar(1.0, kPi * a) - S * k);
    if (a != alpha.value(0)) constant_angle = false;
  }
  out.value /= 8.0;
  if (constant_angle) {
    double var = 0.0;
    for (std::size_t i = 0; i < M.size(); ++i) var += alpha.weight(i) * std::norm(z[i] - zbar);
    out.variance_form = var / 8.0;
    if (std::abs(*out.variance_form - out.value) > 1e-12 * std::max(1.0, out.value))
      throw std::logic_error("analytic_matrix_lyapunov_order2: variance form disagrees");
  }
  return out;
}

MatrixEnsemble schrodinger_ensemble(double energy, const Ensemble<double>& V, double g) {
  if (!(energy > -2.0 && energy < 2.0) || energy == 0.0)
    throw std::invalid_argument("schrodinger: energy must lie in (-2, 2) and be nonzero");
  return V.map([&](double v) { return Mat2{energy - g * v, -1.0, 1.0, 0.0}; });
}

SchrodingerResult schrodinger_lyapunov(double energy, const Ensemble<double>& V, double g,
                                       const McOptions& opts) {
  SchrodingerResult out;
  out.mc = mc_matrix_lyapunov(schrodinger_ensemble(energy, V, g), opts);
  double mean = 0.0, second = 0.0;
  for (const auto& a : V) {
    mean += a.weight * a.value;
    second += a.weight * a.value * a.value;
  }
  out.figotin_pastur = (second - mean * mean) * g * g / (2.0 * (4.0 - energy * energy));
  return out;
}

double matrix_commutator_defect(const MatrixEnsemble& M, MatrixNorm which) {
  double s = 0.0;
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M.size(); ++j) {
      const double n = norm(M.value(i) * M.value(j) - M.value(j) * M.value(i), which);
      s += M.weight(i) * M.weight(j) * n * n;
    }
  return s;
}

double ensemble_distance(const MatrixEnsemble& M, MatrixNorm which) {
  double s = 0.0;
  for (const auto& a : M) {
    const double d = distance_to_rotations(a.value, which);
    s += a.weight * d * d;
  }
  return std::sqrt(s);
}

double trace_l2(const MatrixEnsemble& M) {
  double s = 0.0;
  for (const auto& a : M) s += a.weight * a.value.trace() * a.value.trace();
  return std::sqrt(s);
}

double calibrate_A0(MatrixNorm which, const A0Calibration& opts) {
  auto eng = detail::stream_engine(opts.seed, 0);
  auto u = [&] { return 2.0 * detail::uniform01(eng) - 1.0; };
  double worst = 0.0;
  for (double s : opts.scales) {
    for (int k = 0; k < opts.samples_per_scale; ++k) {
      const double beta = detail::uniform01(eng);
      const Mat2 B{u(), u(), u(), u()};
      const Mat2 M = sl2_normalize(Mat2::rotation(beta) + s * B).first;
      const double alpha = nearest_rotation_angle(M) + 0.5 * s * u();
      const double dm = norm(M - Mat2::rotation(alpha), which);
      const double d0 = ck_norm(projective_diffeo(M, opts.res).phi() - alpha, 0);
      if (dm > 0.0 && d0 > 0.0) worst = std::max({worst, dm / d0, d0 / dm});
    }
  }
  return worst;
}

void MatrixKamConfig::validate() const {
  if (!(delta > 0.0 && delta < 2.0)) throw std::invalid_argument("MatrixKamConfig: delta must lie in (0, 2)");
  if (max_iters < 1) throw std::invalid_argument("MatrixKamConfig: max_iters must be >= 1");
  if (!(convergence_tol > 0.0)) throw std::invalid_argument("MatrixKamConfig: convergence_tol must be > 0");
  if (!(u0_radius > 0.0)) throw std::invalid_argument("MatrixKamConfig: u0_radius must be > 0");
}

std::string to_string(MatrixStopReason r) {
  switch (r) {
    case MatrixStopReason::converged: return "converged";
    case MatrixStopReason::obstruction: return "obstruction";
    case MatrixStopReason::left_U0: return "left_U0";
    case MatrixStopReason::max_iters: return "max_iters";
    case MatrixStopReason::resonance: return "resonance";
  }
  return "?";
}

Mat2 matrix_from_circle_correction(const PeriodicMap& minus_eta) {
  // f_{I+F} = Id + ((c - b) + (c + b) cos 2 pi x + (d - a) sin 2 pi x) / (2 pi) + O(F^2)
  const double A = minus_eta.mean();
  const double B = 2.0 * minus_eta.coeff(1).real();
  const double C = -2.0 * minus_eta.coeff(1).imag();
  const double a = -kPi * C;
  const double b = kPi * (B - A);
  const double c = kPi * (A + B);
  const double d = (1.0 + b * c) / (1.0 + a) - 1.0;  // det = 1
  return {1.0 + a, b, c, 1.0 + d};
}

MatrixKamReport matrix_kam(const MatrixEnsemble& M0, const MatrixKamConfig& config) {
  config.validate();
  for (const auto& a : M0)
    if (std::abs(a.value.det() - 1.0) > 1e-12) throw std::invalid_argument("matrix_kam: atoms must lie in SL2");
  const double tr = trace_l2(M0);
  if (tr > 2.0 - config.delta)
    throw Error("matrix_kam: ellipticity violated, ||Tr M||_L2 = " + fmt(tr) + " > 2 - delta");

  MatrixKamReport report;
  report.norm = config.norm;
  report.A0 = config.A0 > 0.0 ? config.A0 : calibrate_A0(config.norm);
  report.Lambda = mc_matrix_lyapunov(M0, config.mc);
  const double lambda_low = std::max(report.Lambda.value - 3.0 * report.Lambda.std_error, 0.0);
  const double threshold = 4.0 * report.A0 * std::sqrt(lambda_low);
  const Resolution small{2, 8};

  MatrixEnsemble M = M0;
  report.stop_reason = MatrixStopReason::max_iters;
  for (int n = 0; n < config.max_iters; ++n) {
    MatrixKamStep step{n, ensemble_distance(M, config.norm), 0.0, "iterated"};
    auto stop = [&](MatrixStopReason r) {
      step.action = "stopped";
      report.steps.push_back(step);
      report.stop_reason = r;
    };
    if (step.distance < config.convergence_tol) {
      stop(MatrixStopReason::converged);
      break;
    }
    bool outside = false;
    for (const auto& a : M) outside = outside || distance_to_rotations(a.value, config.norm) > config.u0_radius;
    if (outside) {
      stop(MatrixStopReason::left_U0);
      break;
    }
    if (step.distance <= threshold) {
      stop(MatrixStopReason::obstruction);
      break;
    }
    const auto alpha = M.map([](const Mat2& m) { return nearest_rotation_angle(m); });
    PeriodicMap zbar(small);
    for (std::size_t i = 0; i < M.size(); ++i)
      zbar += projective_first_order(M.value(i), alpha.value(i), small).shifted(-alpha.value(i)) *
              M.weight(i);
    PeriodicMap eta(small);
    try {
      eta = solve_Ubar(zbar, alpha, config.resonance_floor);
    } catch (const ResonanceError&) {
      stop(MatrixStopReason::resonance);
      break;
    }
    const Mat2 P = matrix_from_circle_correction(-eta);
    const Mat2 Pinv = P.inverse();
    step.P_deviation = norm(P - Mat2::identity(), config.norm);
    M = M.map([&](const Mat2& m) { return P * m * Pinv; });
    report.P = P * report.P;
    report.steps.push_back(step);
  }
  report.final_distance = ensemble_distance(M, config.norm);
  report.M_final = M;
  if (report.Lambda.value > 0.0) report.C = report.final_distance / std::sqrt(report.Lambda.value);
  return report;
}

void write_report(std::ostream& os, const MatrixKamReport& r) {
  os << "n,distance,P_deviation,action\n";
  for (const auto& s : r.steps)
    os << s.n << ',' << fmt(s.distance) << ',' << fmt(s.P_deviation) << ',' << s.action << '\n';
  os << "\n[summary]\n";
  os << "stop_reason=" << to_string(r.stop_reason) << '\n';
  os << "iterations=" << r.steps.size() << '\n';
  os << "final_distance=" << fmt(r.final_distance) << '\n';
  os << "Lambda=" << fmt(r.Lambda.value) << '\n';
  os << "Lambda_std_error=" << fmt(r.Lambda.std_error) << '\n';
  os << "Lambda_n_steps=" << r.Lambda.n_steps << '\n';
  os << "Lambda_n_samples=" << r.Lambda.n_samples << '\n';
  os << "Lambda_seed=" << r.Lambda.seed << '\n';
  os << "A0=" << fmt(r.A0) << '\n';
  os << "norm=" << to_string(r.norm) << '\n';
  os << "C=" << fmt(r.C) << '\n';
  os << "P=" << fmt(r.P.a) << ' ' << fmt(r.P.b) << ' ' << fmt(r.P.c) << ' ' << fmt(r.P.d) << '\n';
}

}  // namespace circlelab
