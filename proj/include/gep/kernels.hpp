#pragma once

#include <cstddef>
#include <string_view>

namespace gep::kern {

// Dense double-precision kernels used by the solver inner loops and the
// clustering distance computations. Each operation has a scalar reference
// implementation and, where the CPU supports it, a SIMD variant picked once
// at startup. SIMD variants may reassociate sums, so results can differ from
// the scalar path by rounding; equivalence tests bound that difference.
struct Backend {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sumsq)(const double* a, std::size_t n);
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);
  const char* name;
};

const Backend& scalar_backend();
const Backend& active_backend();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active_backend().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active_backend().axpy(alpha, x, y, n);
}
inline double sum(const double* a, std::size_t n) {
  return active_backend().sum(a, n);
}
inline double sumsq(const double* a, std::size_t n) {
  return active_backend().sumsq(a, n);
}
inline double sq_dist(const double* a, const double* b, std::size_t n) {
  return active_backend().sq_dist(a, b, n);
}
inline double max_abs(const double* a, std::size_t n) {
  return active_backend().max_abs(a, n);
}

}  // namespace gep::kern
