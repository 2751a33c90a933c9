#include <cstdlib>
#include <string>

#include "polymer/error.hpp"
#include "polymer/simd/kernels.hpp"

namespace polymer::simd {

#if defined(POLYMER_HAVE_AVX2)
extern const KernelSet kAvx2Kernels;
#endif

namespace {

bool cpu_has_avx2() {
#if defined(POLYMER_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelSet& choose() {
  if (const char* env = std::getenv("POLYMER_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2") {
      if (const KernelSet* k = kernels_for(Isa::kAvx2)) return *k;
      throw DomainError("POLYMER_SIMD=avx2 requested but AVX2 is unavailable");
    }
    throw DomainError("POLYMER_SIMD must be 'scalar' or 'avx2'");
  }
  if (const KernelSet* k = kernels_for(Isa::kAvx2)) return *k;
  return scalar_kernels();
}

}  // namespace

const KernelSet* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_kernels();
    case Isa::kAvx2:
#if defined(POLYMER_HAVE_AVX2)
      if (cpu_has_avx2()) return &kAvx2Kernels;
#endif
      return nullptr;
  }
  return nullptr;
}

const KernelSet& active_kernels() {
  static const KernelSet& k = choose();
  return k;
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace polymer::simd
