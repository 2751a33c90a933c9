#include "polymer/simd/kernels.hpp"

namespace polymer::simd {

namespace {

void stencil_scalar(double* out, std::size_t n, double w, const double* a, const double* b,
                    const double* const* nbr, int n_nbr, const double* mult) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = a[i] + b[i];
    for (int j = 0; j < n_nbr; ++j) s += nbr[j][i];
    s = w * s;
    out[i] = mult ? mult[i] * s : s;
  }
}

void philox_row_scalar(Philox4x32::Key key, std::int32_t x1, std::int32_t step, std::uint32_t c1,
                       std::uint32_t c2, std::uint32_t c3, std::size_t n, std::uint64_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = std::uint32_t(x1 + step * std::int32_t(i));
    out[i] = philox_word({x, c1, c2, c3}, key);
  }
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet set{Isa::kScalar, "scalar", stencil_scalar, philox_row_scalar};
  return set;
}

}  // namespace polymer::simd
