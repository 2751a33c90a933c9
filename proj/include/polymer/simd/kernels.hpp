#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "polymer/philox.hpp"

namespace polymer::simd {

enum class Isa { kScalar, kAvx2 };

// Hot loops with one implementation per instruction set. Every variant must
// produce bit-identical results to the scalar one.
struct KernelSet {
  Isa isa;
  const char* name;

  // out[i] = m_i * (w * (a[i] + b[i] + nbr[0][i] + ... + nbr[n_nbr-1][i]))
  // summed left to right; m_i = mult[i], or 1 (no multiply) when mult is null.
  void (*stencil)(double* out, std::size_t n, double w, const double* a, const double* b,
                  const double* const* nbr, int n_nbr, const double* mult);

  // out[i] = philox_word({x1 + step * i, c1, c2, c3}, key) for i < n.
  void (*philox_row)(Philox4x32::Key key, std::int32_t x1, std::int32_t step, std::uint32_t c1,
                     std::uint32_t c2, std::uint32_t c3, std::size_t n, std::uint64_t* out);
};

const KernelSet& scalar_kernels();
// Null when the variant is not compiled in or not supported by this CPU.
const KernelSet* kernels_for(Isa isa);
// Chosen once: POLYMER_SIMD=scalar|avx2 if set, else the best supported.
const KernelSet& active_kernels();

std::string_view isa_name(Isa isa);

}  // namespace polymer::simd
