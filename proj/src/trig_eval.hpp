#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "circlelab/periodic_map.hpp"

namespace circlelab::detail {

// Trimmed copy of a PeriodicMap for hot loops: evaluates phi and phi' in one pass.
class TrigEvaluator {
 public:
  explicit TrigEvaluator(const PeriodicMap& phi) : mean_(phi.mean()) {
    const int d = phi.effective_degree();
    c_.reserve(static_cast<std::size_t>(d));
    dc_.reserve(static_cast<std::size_t>(d));
    for (int p = 1; p <= d; ++p) {
      const auto c = phi.coeff(p);
      c_.push_back(2.0 * c);
      dc_.push_back(2.0 * std::complex<double>(0.0, 2.0 * std::numbers::pi * p) * c);
    }
  }

  /// (phi(x), phi'(x)).
  std::pair<double, double> operator()(double x) const {
    if (c_.empty()) return {mean_, 0.0};
    const std::complex<double> z = std::polar(1.0, 2.0 * std::numbers::pi * x);
    std::complex<double> s = 0.0, ds = 0.0;
    for (std::size_t p = c_.size(); p-- > 0;) {
      s = s * z + c_[p];
      ds = ds * z + dc_[p];
    }
    return {mean_ + (s * z).real(), (ds * z).real()};
  }

 private:
  double mean_;
  std::vector<std::complex<double>> c_;
  std::vector<std::complex<double>> dc_;
};

inline double wrap01(double x) {
  return x - std::floor(x);
}

}  // namespace circlelab::detail
