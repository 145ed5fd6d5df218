#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace circlelab::detail {

namespace {

enum class PlanKind { r2c, c2r };

// fftw planning is not thread-safe; execution on fresh arrays is.
fftw_plan plan_for(PlanKind kind, int n) {
  static std::mutex mutex;
  static std::map<std::pair<PlanKind, int>, fftw_plan> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({kind, n});
  if (it != cache.end()) return it->second;

  std::vector<double> real(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> cplx(static_cast<std::size_t>(n / 2 + 1));
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = kind == PlanKind::r2c ? fftw_plan_dft_r2c_1d(n, real.data(), c, flags)
                                         : fftw_plan_dft_c2r_1d(n, c, real.data(), flags);
  if (plan == nullptr) throw std::runtime_error("fftw planning failed");
  cache.emplace(std::make_pair(kind, n), plan);
  return plan;
}

}  // namespace

std::vector<std::complex<double>> forward_real(std::span<const double> in) {
  const int n = static_cast<int>(in.size());
  std::vector<double> work(in.begin(), in.end());
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_execute_dft_r2c(plan_for(PlanKind::r2c, n), work.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> backward_real(std::span<const std::complex<double>> half, int n) {
  std::vector<std::complex<double>> work(static_cast<std::size_t>(n / 2 + 1));
  const std::size_t m = std::min(work.size(), half.size());
  for (std::size_t k = 0; k < m; ++k) work[k] = half[k];
  std::vector<double> out(static_cast<std::size_t>(n));
  fftw_execute_dft_c2r(plan_for(PlanKind::c2r, n), reinterpret_cast<fftw_complex*>(work.data()),
                       out.data());
  return out;
}

}  // namespace circlelab::detail
