#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace glekit::detail {

// In-place iterative radix-2 Cooley-Tukey transform. Length must be a power
// of two; callers zero-pad. sign = -1 forward, +1 inverse (unnormalized).
void fft_pow2(std::vector<std::complex<double>>& a, int sign);

std::size_t next_pow2(std::size_t n);

// Adds the cyclic autocorrelation spectrum |F(x)|^2 of the zero-padded input
// into `spectrum` (length next_pow2 >= padded_len). Used to accumulate
// correlation sums over particles before a single inverse transform.
void accumulate_power_spectrum(const double* x, std::size_t n,
                               std::vector<std::complex<double>>& spectrum);

// Inverse transform of an accumulated power spectrum; returns the first
// `n_lags` raw correlation sums sum_i x[i] * x[i + lag].
std::vector<double> correlation_sums(std::vector<std::complex<double>> spectrum,
                                     std::size_t n_lags);

}  // namespace glekit::detail
