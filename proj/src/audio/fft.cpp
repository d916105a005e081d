#include "affect/audio/fft.hpp"

#include <cmath>
#include <numbers>

#include "affect/core/error.hpp"

namespace affect::audio {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t n) : n_(n), bitrev_(n), cos_(n / 2), sin_(n / 2) {
  if (!is_power_of_two(n)) throw ConfigError("fft size " + std::to_string(n) + " is not a power of two");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    cos_[k] = std::cos(a);
    sin_[k] = std::sin(a);
  }
}

void FftPlan::forward(std::span<double> re, std::span<double> im) const { transform(re, im, false); }

void FftPlan::inverse(std::span<double> re, std::span<double> im) const {
  transform(re, im, true);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    re[i] *= scale;
    im[i] *= scale;
  }
}

void FftPlan::transform(std::span<double> re, std::span<double> im, bool inverse) const {
  if (re.size() != n_ || im.size() != n_) throw ShapeError("fft buffer length does not match plan");
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = cos_[k * stride];
        const double wi = sign * sin_[k * stride];
        const std::size_t a = start + k;
        const std::size_t b = a + half;
        const double tr = re[b] * wr - im[b] * wi;
        const double ti = re[b] * wi + im[b] * wr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
      }
    }
  }
}

}  // namespace affect::audio
