#include "circlelab/periodic_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace circlelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Coefficients below this (relative to max(1, sup|samples|)) are FFT rounding.
constexpr double kChopRelative = 2e-15;

std::complex<double> unit(double turns) {
  return std::polar(1.0, kTwoPi * turns);
}

// sum_{p=1}^{n} c_p z^p by Horner.
std::complex<double> horner(std::span<const std::complex<double>> c, int n,
                            std::complex<double> z) {
  std::complex<double> s = 0.0;
  for (int p = n; p >= 1; --p) s = s * z + c[static_cast<std::size_t>(p)];
  return s * z;
}

}  // namespace

void Resolution::validate() const {
  if (modes < 0) throw std::invalid_argument("Resolution: modes must be >= 0");
  if (grid < 4 || (grid & (grid - 1)) != 0)
    throw std::invalid_argument("Resolution: grid must be a power of two >= 4");
  if (grid < 4 * modes) throw std::invalid_argument("Resolution: grid must be >= 4 * modes");
}

PeriodicMap::PeriodicMap(Resolution res) : res_(res) {
  res_.validate();
  coeffs_.assign(static_cast<std::size_t>(res_.modes + 1), 0.0);
  samples_.assign(static_cast<std::size_t>(res_.grid), 0.0);
}

PeriodicMap PeriodicMap::from_coefficients(std::vector<std::complex<double>> coeffs,
                                           Resolution res) {
  PeriodicMap out(res);
  for (std::size_t p = 0; p < coeffs.size(); ++p) {
    if (p < out.coeffs_.size()) {
      out.coeffs_[p] = coeffs[p];
    } else if (coeffs[p] != 0.0) {
      throw std::invalid_argument("PeriodicMap: coefficient above the band limit");
    }
  }
  out.coeffs_[0] = out.coeffs_[0].real();
  out.synthesize();
  return out;
}

PeriodicMap PeriodicMap::from_samples(std::span<const double> samples, Resolution res,
                                      double* residual) {
  res.validate();
  if (static_cast<int>(samples.size()) != res.grid)
    throw std::invalid_argument("PeriodicMap: sample count does not match the grid");
  auto spectrum = detail::forward_real(samples);
  const double inv = 1.0 / res.grid;
  double scale = 1.0;
  for (double v : samples) scale = std::max(scale, std::abs(v));
  const double chop = kChopRelative * scale;

  PeriodicMap out(res);
  for (int p = 0; p <= res.modes; ++p) {
    auto c = spectrum[static_cast<std::size_t>(p)] * inv;
    out.coeffs_[static_cast<std::size_t>(p)] = std::abs(c) <= chop ? 0.0 : c;
  }
  out.coeffs_[0] = out.coeffs_[0].real();
  if (residual != nullptr) {
    double tail = 0.0;
    for (std::size_t p = static_cast<std::size_t>(res.modes) + 1; p < spectrum.size(); ++p)
      tail += 2.0 * std::abs(spectrum[p]) * inv;
    *residual = tail;
  }
  out.synthesize();
  return out;
}

PeriodicMap PeriodicMap::from_function(const std::function<double(double)>& fn, Resolution res,
                                       double* residual) {
  res.validate();
  std::vector<double> values(static_cast<std::size_t>(res.grid));
  for (int j = 0; j < res.grid; ++j) values[static_cast<std::size_t>(j)] = fn(double(j) / res.grid);
  return from_samples(values, res, residual);
}

PeriodicMap PeriodicMap::constant(double value, Resolution res) {
  PeriodicMap out(res);
  out.coeffs_[0] = value;
  out.synthesize();
  return out;
}

PeriodicMap PeriodicMap::trigonometric(double mean, std::span<const double> cos_terms,
                                       std::span<const double> sin_terms, Resolution res) {
  const std::size_t n = std::max(cos_terms.size(), sin_terms.size());
  std::vector<std::complex<double>> c(n + 1, 0.0);
  c[0] = mean;
  // a cos + b sin = Re((a - i b) e^{i theta}), so c_p = (a - i b) / 2.
  for (std::size_t p = 1; p <= n; ++p) {
    const double a = p <= cos_terms.size() ? cos_terms[p - 1] : 0.0;
    const double b = p <= sin_terms.size() ? sin_terms[p - 1] : 0.0;
    c[p] = std::complex<double>(a, -b) * 0.5;
  }
  return from_coefficients(std::move(c), res);
}

std::complex<double> PeriodicMap::coeff(int p) const {
  const int a = std::abs(p);
  if (a > res_.modes) return 0.0;
  auto c = coeffs_[static_cast<std::size_t>(a)];
  return p < 0 ? std::conj(c) : c;
}

double PeriodicMap::operator()(double x) const {
  if (effective_degree_ == 0) return coeffs_[0].real();
  return coeffs_[0].real() + 2.0 * horner(coeffs_, effective_degree_, unit(x)).real();
}

double PeriodicMap::derivative_at(double x, int order) const {
  if (order == 0) return (*this)(x);
  if (effective_degree_ == 0) return 0.0;
  const auto z = unit(x);
  std::complex<double> s = 0.0;
  for (int p = effective_degree_; p >= 1; --p) {
    const auto factor = std::pow(std::complex<double>(0.0, kTwoPi * p), order);
    s = s * z + factor * coeffs_[static_cast<std::size_t>(p)];
  }
  return 2.0 * (s * z).real();
}

PeriodicMap PeriodicMap::derivative(int order) const {
  if (order < 0) throw std::invalid_argument("derivative: negative order");
  PeriodicMap out(res_);
  for (int p = 1; p <= res_.modes; ++p) {
    const auto factor = std::pow(std::complex<double>(0.0, kTwoPi * p), order);
    out.coeffs_[static_cast<std::size_t>(p)] = factor * coeffs_[static_cast<std::size_t>(p)];
  }
  out.coeffs_[0] = order == 0 ? coeffs_[0] : 0.0;
  out.synthesize();
  return out;
}

PeriodicMap PeriodicMap::shifted(double shift) const {
  PeriodicMap out(res_);
  for (int p = 0; p <= res_.modes; ++p)
    out.coeffs_[static_cast<std::size_t>(p)] = coeffs_[static_cast<std::size_t>(p)] * unit(p * shift);
  out.synthesize();
  return out;
}

std::vector<double> PeriodicMap::refined_samples(int factor, int derivative_order) const {
  if (factor < 1) throw std::invalid_argument("refined_samples: factor must be >= 1");
  std::vector<std::complex<double>> c(coeffs_.begin(), coeffs_.end());
  if (derivative_order > 0) {
    c[0] = 0.0;
    for (int p = 1; p <= res_.modes; ++p)
      c[static_cast<std::size_t>(p)] *=
          std::pow(std::complex<double>(0.0, kTwoPi * p), derivative_order);
  }
  return detail::backward_real(c, res_.grid * factor);
}

PeriodicMap PeriodicMap::with_resolution(Resolution res) const {
  res.validate();
  std::vector<std::complex<double>> c(static_cast<std::size_t>(res.modes + 1), 0.0);
  const int n = std::min(res.modes, res_.modes);
  for (int p = 0; p <= n; ++p) c[static_cast<std::size_t>(p)] = coeffs_[static_cast<std::size_t>(p)];
  return from_coefficients(std::move(c), res);
}

PeriodicMap& PeriodicMap::operator+=(const PeriodicMap& other) {
  require_same_resolution(other);
  for (std::size_t p = 0; p < coeffs_.size(); ++p) coeffs_[p] += other.coeffs_[p];
  synthesize();
  return *this;
}

PeriodicMap& PeriodicMap::operator-=(const PeriodicMap& other) {
  require_same_resolution(other);
  for (std::size_t p = 0; p < coeffs_.size(); ++p) coeffs_[p] -= other.coeffs_[p];
  synthesize();
  return *this;
}

PeriodicMap& PeriodicMap::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  synthesize();
  return *this;
}

PeriodicMap PeriodicMap::operator-() const {
  return *this * -1.0;
}

PeriodicMap PeriodicMap::operator+(double c) const {
  PeriodicMap out = *this;
  out.coeffs_[0] += c;
  out.synthesize();
  return out;
}

void PeriodicMap::synthesize() {
  samples_ = detail::backward_real(coeffs_, res_.grid);
  effective_degree_ = 0;
  for (int p = res_.modes; p >= 1; --p) {
    if (coeffs_[static_cast<std::size_t>(p)] != 0.0) {
      effective_degree_ = p;
      break;
    }
  }
}

void PeriodicMap::require_same_resolution(const PeriodicMap& other) const {
  if (!(res_ == other.res_)) throw std::invalid_argument("PeriodicMap: resolution mismatch");
}

double ck_norm(const PeriodicMap& phi, int k) {
  if (k < 0) throw std::invalid_argument("ck_norm: k must be >= 0");
  double best = 0.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0 && phi.effective_degree() == 0) break;
    for (double v : phi.refined_samples(4, j)) best = std::max(best, std::abs(v));
  }
  return best;
}

std::pair<PeriodicMap, PeriodicMap> smooth_split(const PeriodicMap& phi, double T) {
  if (T < 0.0) throw std::invalid_argument("smooth_split: T must be >= 0");
  std::vector<std::complex<double>> low(phi.coefficients().begin(), phi.coefficients().end());
  std::vector<std::complex<double>> high(low.size(), 0.0);
  for (std::size_t p = 0; p < low.size(); ++p) {
    if (static_cast<double>(p) > T) {
      high[p] = low[p];
      low[p] = 0.0;
    }
  }
  return {PeriodicMap::from_coefficients(std::move(low), phi.resolution()),
          PeriodicMap::from_coefficients(std::move(high), phi.resolution())};
}

double integrate_product(const PeriodicMap& a, const PeriodicMap& b) {
  // sum_p a_p b_{-p} = a_0 b_0 + 2 Re sum_{p>0} a_p conj(b_p)
  const int n = std::min(a.modes(), b.modes());
  double s = 0.0;
  for (int p = n; p >= 1; --p) s += (a.coeff(p) * std::conj(b.coeff(p))).real();
  return a.coeff(0).real() * b.coeff(0).real() + 2.0 * s;
}

}  // namespace circlelab
