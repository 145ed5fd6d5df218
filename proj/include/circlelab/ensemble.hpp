#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace circlelab {

template <class T>
struct Atom {
  double weight;
  T value;
};

/// Finite law: realizations `value` drawn with probability `weight`.
/// Expectations over an ensemble are exact weighted sums.
template <class T>
class Ensemble {
 public:
  static constexpr double kWeightTolerance = 1e-12;

  explicit Ensemble(std::vector<Atom<T>> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("Ensemble: no atoms");
    double total = 0.0;
    cdf_.reserve(atoms_.size());
    for (const auto& a : atoms_) {
      if (!(a.weight > 0.0)) throw std::invalid_argument("Ensemble: weights must be positive");
      total += a.weight;
      cdf_.push_back(total);
    }
    if (std::abs(total - 1.0) > kWeightTolerance)
      throw std::invalid_argument("Ensemble: weights must sum to 1");
    cdf_.back() = 1.0;
  }

  static Ensemble single(T value) { return Ensemble({Atom<T>{1.0, std::move(value)}}); }

  static Ensemble uniform(std::vector<T> values) {
    std::vector<Atom<T>> atoms;
    const double w = 1.0 / static_cast<double>(values.size());
    for (auto& v : values) atoms.push_back({w, std::move(v)});
    return Ensemble(std::move(atoms));
  }

  std::size_t size() const { return atoms_.size(); }
  const Atom<T>& operator[](std::size_t i) const { return atoms_[i]; }
  const T& value(std::size_t i) const { return atoms_[i].value; }
  double weight(std::size_t i) const { return atoms_[i].weight; }
  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }
  const std::vector<Atom<T>>& atoms() const { return atoms_; }

  /// Inverse-CDF atom selection for u uniform on [0, 1).
  std::size_t sample_index(double u) const {
    std::size_t i = 0;
    while (i + 1 < cdf_.size() && u >= cdf_[i]) ++i;
    return i;
  }

  /// Same weights, values transformed by fn.
  template <class F>
  auto map(F&& fn) const -> Ensemble<std::decay_t<std::invoke_result_t<F, const T&>>> {
    using R = std::decay_t<std::invoke_result_t<F, const T&>>;
    std::vector<Atom<R>> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) out.push_back({a.weight, fn(a.value)});
    return Ensemble<R>(std::move(out));
  }

  /// Same weights, values from a parallel list.
  template <class R>
  Ensemble<R> with_values(std::vector<R> values) const {
    if (values.size() != atoms_.size()) throw std::invalid_argument("Ensemble: size mismatch");
    std::vector<Atom<R>> out;
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      out.push_back({atoms_[i].weight, std::move(values[i])});
    return Ensemble<R>(std::move(out));
  }

  template <class U>
  bool same_weights(const Ensemble<U>& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (std::abs(other.weight(i) - weight(i)) > kWeightTolerance) return false;
    return true;
  }

 private:
  std::vector<Atom<T>> atoms_;
  std::vector<double> cdf_;
};

using AngleEnsemble = Ensemble<double>;

}  // namespace circlelab
