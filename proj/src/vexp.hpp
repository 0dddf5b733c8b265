#pragma once

#include <cstddef>

namespace bees::detail {

// out[i] = exp(x[i] - shift); returns the sum of out. Built with vector math
// where the toolchain provides it, so results may differ from std::exp in the
// last bit.
double exp_shifted(const double* x, double shift, double* out, std::size_t n) noexcept;

}  // namespace bees::detail
