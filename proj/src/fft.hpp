#pragma once

#include <complex>
#include <span>
#include <vector>

namespace circlelab::detail {

// Unnormalized real DFT of length n = in.size(): out[k] = sum_j in[j] exp(-2 pi i jk/n),
// k = 0..n/2.
std::vector<std::complex<double>> forward_real(std::span<const double> in);

// Inverse of forward_real up to the factor n: out[j] = sum_k X_k exp(2 pi i jk/n) over the
// Hermitian extension of `half` (size n/2 + 1 or shorter, zero-padded).
std::vector<double> backward_real(std::span<const std::complex<double>> half, int n);

}  // namespace circlelab::detail
