// Compiled with -ffast-math so that GCC can call the glibc vector exp.
#include "vexp.hpp"

#include <cmath>

namespace bees::detail {

double exp_shifted(const double* x, double shift, double* out, std::size_t n) noexcept {
  double sum = 0.0;
#pragma omp simd reduction(+ : sum)
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(x[i] - shift);
    sum += out[i];
  }
  return sum;
}

}  // namespace bees::detail
