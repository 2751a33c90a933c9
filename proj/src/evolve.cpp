#include "polymer/evolve.hpp"

#include <algorithm>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/simd/kernels.hpp"

namespace polymer {

namespace {

int dist_to(int v, int lo, int hi) { return v < lo ? lo - v : (v > hi ? v - hi : 0); }

// Calls f(u, s, rem) for every row u_2..u_d of the cube that meets the cone;
// s is the coordinate sum of the row and rem the L1 budget left for u_1.
template <class F>
void for_cone_rows(int dim, int R, const Cone& cone, F&& f) {
  Point u(dim);
  std::array<int, kMaxDim> lo{}, hi{};
  for (int k = 1; k < dim; ++k) {
    lo[k] = std::max(-R, cone.lo[k] - cone.radius);
    hi[k] = std::min(R, cone.hi[k] + cone.radius);
    if (lo[k] > hi[k]) return;
    u[k] = lo[k];
  }
  for (;;) {
    int s = 0, used = 0;
    for (int k = 1; k < dim; ++k) {
      s += u[k];
      used += dist_to(u[k], cone.lo[k], cone.hi[k]);
    }
    if (used <= cone.radius) f(static_cast<const Point&>(u), s, cone.radius - used);
    int k = 1;
    for (; k < dim; ++k) {
      if (++u[k] <= hi[k]) break;
      u[k] = lo[k];
    }
    if (k >= dim) return;
  }
}

// Slot range [k_lo, k_hi] of a row with shift e covering u_1 in the cone.
bool slot_range(int R, int e, const Cone& cone, int rem, int& k_lo, int& k_hi) {
  const int u_lo = std::max(-R, cone.lo[0] - rem);
  const int u_hi = std::min(R, cone.hi[0] + rem);
  if (u_lo > u_hi) return false;
  k_lo = (u_lo + R - e + 1) >> 1;
  k_hi = (u_hi + R - e) >> 1;
  return k_lo <= k_hi;
}

}  // namespace

void diffuse_step(const ParityGrid& prev, ParityGrid& next, const Cone& cone, const SlabWeights* weights) {
  const int d = prev.dim();
  const int R = prev.radius();
  if (next.dim() != d || next.radius() != R || next.parity() == prev.parity()) {
    throw DomainError("diffuse_step: grids must share shape and have opposite parity");
  }
  const auto& kern = simd::active_kernels();
  const double w = 1.0 / (2.0 * d);
  thread_local std::vector<double> mult;
  const double* nbr[2 * kMaxDim];

  for_cone_rows(d, R, cone, [&](const Point& u, int s, int rem) {
    const int e = next.row_shift(s);
    int k_lo, k_hi;
    if (!slot_range(R, e, cone, rem, k_lo, k_hi)) return;
    const std::size_t n = std::size_t(k_hi - k_lo + 1);
    const std::size_t r = next.row_index(u);
    const double* pr = prev.row(r);
    int m = 0;
    for (int k = 1; k < d; ++k) {
      nbr[m++] = prev.row(r - prev.row_stride(k)) + k_lo;
      nbr[m++] = prev.row(r + prev.row_stride(k)) + k_lo;
    }
    const double* mp = nullptr;
    if (weights && weights->field) {
      mult.resize(n);
      Point first = u;
      first[0] = 2 * k_lo + e - R;
      weights->field->fill_row(first + weights->origin, weights->time, n, weights->pin, mult.data());
      mp = mult.data();
    }
    kern.stencil(next.row(r) + k_lo, n, w, pr + k_lo + e - 1, pr + k_lo + e, nbr, m, mp);
  });
}

void fill_pin(ParityGrid& g, const Cone& cone, const SlabWeights& weights) {
  if (!weights.field) throw DomainError("fill_pin needs a field");
  const int R = g.radius();
  for_cone_rows(g.dim(), R, cone, [&](const Point& u, int s, int rem) {
    const int e = g.row_shift(s);
    int k_lo, k_hi;
    if (!slot_range(R, e, cone, rem, k_lo, k_hi)) return;
    Point first = u;
    first[0] = 2 * k_lo + e - R;
    weights.field->fill_row(first + weights.origin, weights.time, std::size_t(k_hi - k_lo + 1), weights.pin,
                            g.row(g.row_index(u)) + k_lo);
  });
}

void clear_outside(ParityGrid& g, const Cone& cone) {
  const int d = g.dim();
  const int R = g.radius();
  Point u(d);
  for (int k = 1; k < d; ++k) u[k] = -R;
  for (;;) {
    int s = 0, used = 0;
    for (int k = 1; k < d; ++k) {
      s += u[k];
      used += dist_to(u[k], cone.lo[k], cone.hi[k]);
    }
    const int e = g.row_shift(s);
    double* row = g.row(g.row_index(u));
    int k_lo = 1, k_hi = 0;
    if (used <= cone.radius) slot_range(R, e, cone, cone.radius - used, k_lo, k_hi);
    for (int k = 0; 2 * k + e - R <= R; ++k) {
      if (k < k_lo || k > k_hi) row[k] = 0.0;
    }
    int k = 1;
    for (; k < d; ++k) {
      if (++u[k] <= R) break;
      u[k] = -R;
    }
    if (k >= d) return;
  }
}

double cone_sum(const ParityGrid& g, const Cone& cone) {
  CompensatedSum acc;
  const int R = g.radius();
  for_cone_rows(g.dim(), R, cone, [&](const Point& u, int s, int rem) {
    int k_lo, k_hi;
    const int e = g.row_shift(s);
    if (!slot_range(R, e, cone, rem, k_lo, k_hi)) return;
    const double* row = g.row(g.row_index(u));
    for (int k = k_lo; k <= k_hi; ++k) acc.add(row[k]);
  });
  return acc.value();
}

double cone_sum_squares(const ParityGrid& g, const Cone& cone) {
  CompensatedSum acc;
  const int R = g.radius();
  for_cone_rows(g.dim(), R, cone, [&](const Point& u, int s, int rem) {
    int k_lo, k_hi;
    const int e = g.row_shift(s);
    if (!slot_range(R, e, cone, rem, k_lo, k_hi)) return;
    const double* row = g.row(g.row_index(u));
    for (int k = k_lo; k <= k_hi; ++k) acc.add(row[k] * row[k]);
  });
  return acc.value();
}

}  // namespace polymer
