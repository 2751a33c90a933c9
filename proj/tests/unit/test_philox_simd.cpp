#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "polymer/philox.hpp"
#include "polymer/simd/kernels.hpp"

using namespace polymer;

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  const auto check = [](C c, K k, C want) {
    const C got = Philox4x32::generate(c, k);
    for (int i = 0; i < 4; ++i) CHECK(got[i] == want[i]);
  };
  check({0, 0, 0, 0}, {0, 0}, {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  check({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu},
        {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  check({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u},
        {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("philox is usable at compile time") {
  constexpr auto w = philox_word({0, 0, 0, 0}, {0, 0});
  static_assert(w == 0x6627e8d5e169c58dull);
  CHECK(word_to_open_unit(0) > 0.0);
  CHECK(word_to_open_unit(~0ull) < 1.0);
}

TEST_CASE("seed key folds the fourth coordinate into the high word") {
  CHECK(philox_key(0x0000000500000007ull)[0] == 7u);
  CHECK(philox_key(0x0000000500000007ull)[1] == 5u);
  CHECK(philox_key(7, 1)[1] == 0x85EBCA6Bu);
}

TEST_CASE("scalar kernels match the reference formulas") {
  const auto& k = simd::scalar_kernels();
  std::vector<std::uint64_t> out(5);
  k.philox_row(philox_key(99), -3, 2, 4, 5, 6, out.size(), out.data());
  for (int i = 0; i < 5; ++i) {
    CHECK(out[i] == philox_word({std::uint32_t(-3 + 2 * i), 4, 5, 6}, philox_key(99)));
  }
  const double a[3] = {1, 2, 3}, b[3] = {4, 5, 6}, c[3] = {7, 8, 9}, m[3] = {2, 1, 0.5};
  const double* nbr[1] = {c};
  double o[3];
  k.stencil(o, 3, 0.25, a, b, nbr, 1, m);
  for (int i = 0; i < 3; ++i) CHECK(o[i] == m[i] * (0.25 * ((a[i] + b[i]) + c[i])));
  k.stencil(o, 3, 0.25, a, b, nbr, 1, nullptr);
  CHECK(o[2] == 0.25 * 18);
}

TEST_CASE("AVX2 kernels are bitwise identical to scalar") {
  const simd::KernelSet* v = simd::kernels_for(simd::Isa::kAvx2);
  if (!v) {
    MESSAGE("AVX2 variant not available on this machine");
    return;
  }
  const auto& s = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 1001u}) {
    std::vector<std::uint64_t> x(n), y(n);
    s.philox_row(philox_key(12345, 3), -500, 2, 7, 0xfffffff0u, 42, n, x.data());
    v->philox_row(philox_key(12345, 3), -500, 2, 7, 0xfffffff0u, 42, n, y.data());
    CHECK(x == y);

    std::vector<double> a(n), b(n), m(n);
    std::vector<std::vector<double>> nb(4, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = word_to_open_unit(x[i]) * 1e-3;
      b[i] = 1.0 / (i + 3.0);
      m[i] = 1.0 + 0.3 * ((x[i] >> 63) ? 1 : -1);
      for (int j = 0; j < 4; ++j) nb[j][i] = std::sin(double(i * (j + 1)));
    }
    const double* ptr[4] = {nb[0].data(), nb[1].data(), nb[2].data(), nb[3].data()};
    for (int nn : {0, 2, 4}) {
      std::vector<double> o1(n), o2(n);
      s.stencil(o1.data(), n, 1.0 / 6, a.data(), b.data(), ptr, nn, m.data());
      v->stencil(o2.data(), n, 1.0 / 6, a.data(), b.data(), ptr, nn, m.data());
      CHECK(std::memcmp(o1.data(), o2.data(), n * sizeof(double)) == 0);
      s.stencil(o1.data(), n, 1.0 / 6, a.data(), b.data(), ptr, nn, nullptr);
      v->stencil(o2.data(), n, 1.0 / 6, a.data(), b.data(), ptr, nn, nullptr);
      CHECK(std::memcmp(o1.data(), o2.data(), n * sizeof(double)) == 0);
    }
  }
}
