#include <cstdlib>
#include <string_view>

#include "affect/core/error.hpp"
#include "kernels_internal.hpp"

namespace affect::simd {

namespace {

bool cpu_has_avx2() {
#ifdef AFFECT_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* env = std::getenv("AFFECT_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return detail::kScalarTable;
  }
  if (const KernelTable* t = avx2_kernels()) return *t;
  return detail::kScalarTable;
}

void check_same(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string("simd::") + op + ": length mismatch " + std::to_string(a) +
                     " vs " + std::to_string(b));
  }
}

}  // namespace

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* avx2_kernels() {
#ifdef AFFECT_HAVE_AVX2_KERNELS
  static const bool ok = cpu_has_avx2();
  return ok ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

double dot(std::span<const float> a, std::span<const float> b) {
  check_same(a.size(), b.size(), "dot");
  return active().dot_f32(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size(), "axpy");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_same(a.size(), b.size(), "mul");
  check_same(a.size(), out.size(), "mul");
  active().mul(a.data(), b.data(), out.data(), a.size());
}

void power(std::span<const double> re, std::span<const double> im, std::span<double> out) {
  check_same(re.size(), im.size(), "power");
  check_same(re.size(), out.size(), "power");
  active().power(re.data(), im.data(), out.data(), re.size());
}

double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

}  // namespace affect::simd
