#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace affect::audio {

// Iterative radix-2 complex FFT with precomputed twiddles and bit-reversal
// permutation. A plan is immutable after construction and may be shared by
// concurrent callers.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  // In-place forward transform, X[k] = sum_n x[n] exp(-2 pi i k n / N).
  void forward(std::span<double> re, std::span<double> im) const;
  // In-place inverse transform including the 1/N factor.
  void inverse(std::span<double> re, std::span<double> im) const;

 private:
  void transform(std::span<double> re, std::span<double> im, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

bool is_power_of_two(std::size_t n);

}  // namespace affect::audio
