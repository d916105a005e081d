#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops used by the DSP front-end, the gallery matcher
// and the linear backend. Each kernel has a scalar reference implementation
// and, where the CPU supports it, an AVX2+FMA variant chosen once at first
// use. Setting AFFECT_SIMD=scalar in the environment forces the reference
// path.
//
// The vector variants reassociate sums, so results agree with the scalar
// reference to rounding only; for a fixed machine and selection every
// kernel is deterministic.

namespace affect::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  const char* name;
  // sum a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // float inputs, double accumulation
  double (*dot_f32)(const float* a, const float* b, std::size_t n);
  // y[i] += alpha*x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = a[i]*b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = re[i]^2 + im[i]^2
  void (*power)(const double* re, const double* im, double* out, std::size_t n);
  // sum x[i]^2
  double (*sum_squares)(const double* x, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the build or the running CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

// Table selected for this process.
const KernelTable& active();

double dot(std::span<const double> a, std::span<const double> b);
double dot(std::span<const float> a, std::span<const float> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
void power(std::span<const double> re, std::span<const double> im, std::span<double> out);
double sum_squares(std::span<const double> x);

}  // namespace affect::simd
