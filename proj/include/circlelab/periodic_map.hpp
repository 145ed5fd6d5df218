#pragma once

// Real 1-periodic functions on the circle T = R/Z, held as truncated Fourier
// coefficients together with their values on a uniform grid.

#include <complex>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace circlelab {

/// Spectral resolution: Fourier modes |p| <= modes, `grid` uniform samples on [0, 1).
struct Resolution {
  int modes = 64;
  int grid = 256;

  /// Throws std::invalid_argument unless grid is a power of two and grid >= 4 * modes.
  void validate() const;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// phi(x) = sum_{|p| <= N} c_p exp(2 i pi p x) with c_{-p} = conj(c_p).
///
/// Only c_0..c_N are stored. The grid samples are always synthesized from the
/// coefficients, so both views agree to rounding.
class PeriodicMap {
 public:
  PeriodicMap() : PeriodicMap(Resolution{}) {}
  explicit PeriodicMap(Resolution res);

  /// coeffs[p] for p = 0..size-1; modes above res.modes must be zero or are rejected.
  /// The imaginary part of coeffs[0] is discarded.
  static PeriodicMap from_coefficients(std::vector<std::complex<double>> coeffs, Resolution res);

  /// Projects grid samples (size must equal res.grid) onto modes |p| <= res.modes.
  /// `residual` receives a sup-norm bound of the discarded high modes.
  static PeriodicMap from_samples(std::span<const double> samples, Resolution res,
                                  double* residual = nullptr);

  static PeriodicMap from_function(const std::function<double(double)>& fn, Resolution res,
                                   double* residual = nullptr);

  static PeriodicMap constant(double value, Resolution res);

  /// mean + sum_p cos_terms[p-1] cos(2 pi p x) + sin_terms[p-1] sin(2 pi p x).
  static PeriodicMap trigonometric(double mean, std::span<const double> cos_terms,
                                   std::span<const double> sin_terms, Resolution res);

  const Resolution& resolution() const { return res_; }
  int modes() const { return res_.modes; }
  int grid_size() const { return res_.grid; }

  /// c_p for any integer p (zero beyond the band limit).
  std::complex<double> coeff(int p) const;
  std::span<const std::complex<double>> coefficients() const { return coeffs_; }
  std::span<const double> samples() const { return samples_; }
  double grid_point(int j) const { return static_cast<double>(j) / res_.grid; }

  /// Highest p with c_p != 0 (0 for constants).
  int effective_degree() const { return effective_degree_; }

  double operator()(double x) const;
  /// order-th derivative evaluated at x.
  double derivative_at(double x, int order = 1) const;
  double mean() const { return coeffs_[0].real(); }

  PeriodicMap derivative(int order = 1) const;
  /// x -> phi(x + shift).
  PeriodicMap shifted(double shift) const;
  /// Values on a grid refined `factor` times by zero padding.
  std::vector<double> refined_samples(int factor, int derivative_order = 0) const;
  PeriodicMap with_resolution(Resolution res) const;

  PeriodicMap& operator+=(const PeriodicMap& other);
  PeriodicMap& operator-=(const PeriodicMap& other);
  PeriodicMap& operator*=(double s);
  PeriodicMap operator-() const;
  friend PeriodicMap operator+(PeriodicMap a, const PeriodicMap& b) { return a += b; }
  friend PeriodicMap operator-(PeriodicMap a, const PeriodicMap& b) { return a -= b; }
  friend PeriodicMap operator*(PeriodicMap a, double s) { return a *= s; }
  friend PeriodicMap operator*(double s, PeriodicMap a) { return a *= s; }
  PeriodicMap operator+(double c) const;
  PeriodicMap operator-(double c) const { return *this + (-c); }

 private:
  void synthesize();
  void require_same_resolution(const PeriodicMap& other) const;

  Resolution res_;
  std::vector<std::complex<double>> coeffs_;
  std::vector<double> samples_;
  int effective_degree_ = 0;
};

/// ||phi||_k = max_{j <= k} sup |phi^(j)|, sup taken on the grid refined 4x.
double ck_norm(const PeriodicMap& phi, int k);

/// S_T phi (modes |p| <= T) and R_T phi (modes |p| > T); low + high == phi.
std::pair<PeriodicMap, PeriodicMap> smooth_split(const PeriodicMap& phi, double T);

/// Integral over [0, 1) of a * b, computed from the coefficients.
double integrate_product(const PeriodicMap& a, const PeriodicMap& b);

}  // namespace circlelab
