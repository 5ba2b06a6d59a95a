#include "detail/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace glekit::detail {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void accumulate_power_spectrum(const double* x, std::size_t n,
                               std::vector<std::complex<double>>& spectrum) {
  const std::size_t m = spectrum.size();
  std::vector<std::complex<double>> buf(m, std::complex<double>(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
  fft_pow2(buf, -1);
  for (std::size_t i = 0; i < m; ++i) spectrum[i] += std::norm(buf[i]);
}

std::vector<double> correlation_sums(std::vector<std::complex<double>> spectrum,
                                     std::size_t n_lags) {
  const std::size_t m = spectrum.size();
  fft_pow2(spectrum, +1);
  std::vector<double> out(n_lags);
  for (std::size_t k = 0; k < n_lags; ++k)
    out[k] = spectrum[k].real() / static_cast<double>(m);
  return out;
}

}  // namespace glekit::detail
