#pragma once

// KAM linearization of random circle diffeomorphisms close to rotations.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "circlelab/circle_diffeo.hpp"
#include "circlelab/cohomology.hpp"
#include "circlelab/ensemble.hpp"
#include "circlelab/lyapunov.hpp"

namespace circlelab {

/// sqrt(E ||z||_k^2).
double triple_norm(const Ensemble<PeriodicMap>& z, int k);

/// Every atom satisfies |f' - 1| < 1/2 (the boundary counts as outside).
bool in_U0(const CircleEnsemble& f);

/// f_i = h^{-1} o r_{alpha_i} o h.
CircleEnsemble conjugated_rotations(const CircleDiffeo& h, const AngleEnsemble& alpha);

/// g f_i g^{-1} for every atom.
CircleEnsemble conjugate_all(const CircleDiffeo& g, const CircleEnsemble& f);

enum class Branch { small_by_lambda, small_by_power, neither };
std::string to_string(Branch b);

struct Conjugation {
  CircleDiffeo g;
  CircleEnsemble f_new;
  PeriodicMap eta;          // g = Id - eta
  double norm0_before = 0;  // |||zeta|||_0
  double normk_before = 0;  // |||zeta|||_{k0}
  double norm0_after = 0;   // |||zeta_new|||_0
  Branch branch = Branch::neither;
};

struct DichotomyParams {
  double lambda = 0.0;  // |lambda| used in the small_by_lambda test
  double C0 = 0.0;
  int k0 = 11;
  double resonance_floor = kDefaultResonanceFloor;
};

/// g = Id - Ubar zeta_bar, f_new = g f g^{-1}. Throws NotADiffeomorphism when g is not
/// invertible (sup |eta'| >= 1).
Conjugation first_conjugation(const CircleEnsemble& f, const AngleEnsemble& alpha,
                              const DichotomyParams& params);

/// Same with eta replaced by S_T eta.
Conjugation smoothed_conjugation(const CircleEnsemble& f, const AngleEnsemble& alpha, double T,
                                 const DichotomyParams& params);

struct KamConfig {
  int K = 0;                   // working norm index; 0 means 4 * ceil(sigma) + 7
  double Q = 4.0 / 3.0;
  double C0 = 0.0;             // <= 0 means calibrate on planted conjugacies
  int max_iters = 30;
  double resonance_floor = kDefaultResonanceFloor;
  double convergence_tol = 1e-9;
  int q_max = 0;               // diophantine probe range; 0 means resolution modes
  McOptions mc{20000, 64, 1, 0, Estimator::conditional, 1};

  void validate() const;
};

/// T_n = 2^{Q^n}.
double schedule(double Q, int n);

enum class StopReason { converged, obstruction, left_U0, max_iters, resonance };
std::string to_string(StopReason r);

struct KamStep {
  int n = 0;
  double T = 0.0;
  double norm0 = 0.0;
  double normK = 0.0;
  std::string action;  // "iterated" or "stopped"
};

struct KamReport {
  std::vector<KamStep> steps;
  StopReason stop_reason = StopReason::max_iters;
  CircleDiffeo h = CircleDiffeo::identity();
  std::optional<CircleEnsemble> f_final;
  double final_d0 = 0.0;  // sqrt(E ||h f h^{-1} - r_alpha||_0^2)
  LyapunovEstimate lambda;
  double ratio = 0.0;  // final_d0 / sqrt(|lambda|)
  double C0 = 0.0;
  int K = 0;
  double sigma = 0.0;
  double A = 0.0;
  int resonant_mode = 0;
};

struct C0Calibration {
  std::vector<double> amplitudes{1e-3, 3e-3, 1e-2, 3e-2};
  int samples_per_amplitude = 3;
  int degree = 3;
  std::uint64_t seed = 17;
};

/// Twice the largest |||zeta_new|||_0 / |||zeta|||_{k0}^{3/2} observed after one
/// first_conjugation on random conjugated-rotation ensembles with the given angles.
double calibrate_C0(const AngleEnsemble& alpha, int k0, Resolution res,
                    const C0Calibration& opts = {});

KamReport kam_run(const CircleEnsemble& f, const AngleEnsemble& alpha, const KamConfig& config);

/// sqrt(sum_{i,j} w_i w_j ||f_i o f_j - f_j o f_i||_0^2).
double commutator_defect(const CircleEnsemble& f);

/// Columnar rows "n,T_n,norm0,normK,action", a blank line, then "[summary]" key=value lines.
void write_report(std::ostream& os, const KamReport& report);

}  // namespace circlelab
