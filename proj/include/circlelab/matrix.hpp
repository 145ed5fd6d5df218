#pragma once

// Random products of 2x2 real matrices close to rotations: projective action,
// Lyapunov exponents, the order-2 expansion and the matrix KAM reduction.

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "circlelab/circle_diffeo.hpp"
#include "circlelab/cohomology.hpp"
#include "circlelab/ensemble.hpp"
#include "circlelab/lyapunov.hpp"

namespace circlelab {

/// [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mat2 identity() { return {}; }
  /// R_alpha = [[cos pi alpha, -sin pi alpha], [sin pi alpha, cos pi alpha]].
  static Mat2 rotation(double alpha);

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  Mat2 inverse() const;
  std::array<double, 2> apply(double x, double y) const { return {a * x + b * y, c * x + d * y}; }

  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c,
            m.c * n.b + m.d * n.d};
  }
  friend Mat2 operator+(const Mat2& m, const Mat2& n) { return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d}; }
  friend Mat2 operator-(const Mat2& m, const Mat2& n) { return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d}; }
  friend Mat2 operator*(double s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

using MatrixEnsemble = Ensemble<Mat2>;

enum class MatrixNorm { operator2, frobenius };
std::string to_string(MatrixNorm n);

double norm(const Mat2& m, MatrixNorm which = MatrixNorm::operator2);

/// Z = (a + d) + i (b - c) of E.
std::complex<double> perturbation_z(const Mat2& E);
/// Tr(E) + i Tr(E R_{1/2}); algebraically equal to perturbation_z.
std::complex<double> perturbation_z_traces(const Mat2& E);
/// Z' = (a - d) + i (b + c) of E: the part of E that does not commute with rotations.
/// E(z) = (Zc z + Z' conj(z)) / 2 on C = R^2 with Zc = (a + d) + i (c - b).
std::complex<double> hyperbolic_z(const Mat2& E);

/// alpha maximizing Tr(R_alpha^{-1} M), pi alpha = atan2(c - b, a + d); in (-1, 1].
double nearest_rotation_angle(const Mat2& M);
/// ||M - R_alpha|| at the nearest angle.
double distance_to_rotations(const Mat2& M, MatrixNorm which = MatrixNorm::operator2);

/// (M / sqrt(det M), ln(det M) / 2). Throws std::invalid_argument when det <= 0.
std::pair<Mat2, double> sl2_normalize(const Mat2& M);

/// exp(i pi f_M(x)) = M u(x) / |M u(x)|, u(x) = (cos pi x, sin pi x). Requires det M > 0.
CircleDiffeo projective_diffeo(const Mat2& M, Resolution res = {});
/// f_M'(x) = det M / |M u(x)|^2, pointwise.
double projective_derivative(const Mat2& M, double x);

/// zeta_1(x) = (1/pi) Im(E(e^{i pi x}) e^{-i pi (x + alpha)}), E = M - R_alpha.
PeriodicMap projective_first_order(const Mat2& M, double alpha, Resolution res = {});

/// Furstenberg-Kesten estimate from independent unit vectors with uniform angles.
/// Pathwise chains renormalize every 32 steps (or when |v| leaves [2^-20, 2^20]).
LyapunovEstimate mc_matrix_lyapunov(const MatrixEnsemble& M, const McOptions& opts);

struct MatrixOrder2 {
  double value = 0.0;                     // 1/8 E|Z' e^{i pi a} - E[Z' e^{i pi a}] k(a)|^2
  std::optional<double> variance_form;    // Var(Z')/8 when alpha is deterministic
};

/// Order-2 expansion with E_i = M_i - R_{alpha_i}. Throws ResonanceError (mode 2) when
/// |1 - E[exp(2 i pi alpha)]| <= floor, and std::logic_error when the deterministic-angle
/// variance form differs by more than 1e-12.
MatrixOrder2 analytic_matrix_lyapunov_order2(const MatrixEnsemble& M, const AngleEnsemble& alpha,
                                             double resonance_floor = kDefaultResonanceFloor);

struct SchrodingerResult {
  LyapunovEstimate mc;
  double figotin_pastur = 0.0;  // Var(V) g^2 / (2 (4 - E^2))
};

/// Transfer matrices (E - g V, -1; 1, 0). E must lie in (-2, 2) and be nonzero.
MatrixEnsemble schrodinger_ensemble(double energy, const Ensemble<double>& V, double g);
SchrodingerResult schrodinger_lyapunov(double energy, const Ensemble<double>& V, double g,
                                       const McOptions& opts);

/// sum_{i,j} w_i w_j ||M_i M_j - M_j M_i||^2.
double matrix_commutator_defect(const MatrixEnsemble& M, MatrixNorm which = MatrixNorm::operator2);

/// sqrt(E ||M - R_{alpha(M)}||^2) with the nearest angle per atom.
double ensemble_distance(const MatrixEnsemble& M, MatrixNorm which = MatrixNorm::operator2);

/// sqrt(E [Tr M]^2).
double trace_l2(const MatrixEnsemble& M);

struct A0Calibration {
  std::vector<double> scales{1e-3, 1e-2, 3e-2, 1e-1};
  int samples_per_scale = 64;
  std::uint64_t seed = 5;
  Resolution res{};
};

/// Largest ratio in either direction between ||M - R_alpha|| and d_0(f_M, r_alpha) over
/// random near-rotation SL2 matrices and angles alpha near their nearest rotation angle.
double calibrate_A0(MatrixNorm which = MatrixNorm::operator2, const A0Calibration& opts = {});

struct MatrixKamConfig {
  double delta = 0.1;            // ellipticity: ||Tr M||_{L2} <= 2 - delta
  int max_iters = 40;
  double convergence_tol = 1e-12;
  double u0_radius = 0.5;        // atoms farther than this from the rotations stop the run
  double A0 = 0.0;               // <= 0 means calibrate_A0
  MatrixNorm norm = MatrixNorm::operator2;
  double resonance_floor = kDefaultResonanceFloor;
  McOptions mc{20000, 64, 1, 0, Estimator::conditional, 1};

  void validate() const;
};

struct MatrixKamStep {
  int n = 0;
  double distance = 0.0;  // ||d(M_n, R)||_{L2}
  double P_deviation = 0.0;  // ||P_n - I||
  std::string action;
};

enum class MatrixStopReason { converged, obstruction, left_U0, max_iters, resonance };
std::string to_string(MatrixStopReason r);

struct MatrixKamReport {
  std::vector<MatrixKamStep> steps;
  MatrixStopReason stop_reason = MatrixStopReason::max_iters;
  Mat2 P;  // accumulated conjugacy Q_N = P_{N-1} ... P_0
  std::optional<MatrixEnsemble> M_final;
  double final_distance = 0.0;
  LyapunovEstimate Lambda;
  double A0 = 0.0;
  MatrixNorm norm = MatrixNorm::operator2;
  double C = 0.0;  // final_distance / sqrt(Lambda), diagnostic
};

/// Builds P in SL2 with f_P close to Id - eta for eta = a cos 2 pi x + b sin 2 pi x + const.
Mat2 matrix_from_circle_correction(const PeriodicMap& minus_eta);

MatrixKamReport matrix_kam(const MatrixEnsemble& M, const MatrixKamConfig& config);

void write_report(std::ostream& os, const MatrixKamReport& report);

}  // namespace circlelab
