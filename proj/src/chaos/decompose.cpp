#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "polymer/chaos.hpp"
#include "polymer/error.hpp"
#include "polymer/evolve.hpp"
#include "polymer/partition.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

namespace {

constexpr int kMaxEnumerationTime = 16;

// Shared state for exhaustive work at small t: every grid lives in absolute
// coordinates on the cube of radius t + |y|_1, with parity j mod 2 at time j.
struct Workspace {
  const DisorderField& field;
  Point y;
  int t;
  int R;
  std::vector<ParityGrid> noise;  // h(., j) on the cube, j = 0..t

  Workspace(const DisorderField& f, const Point& y_, int t_) : field(f), y(y_), t(t_), R(t_ + y_.l1()) {
    if (t < 0 || t > kMaxEnumerationTime) {
      throw ResourceError(fmt::format("exhaustive enumeration supports 0 <= t <= {}", kMaxEnumerationTime));
    }
    const Point zero(f.dim());
    if (!f.region().covers(zero, R, 0, t)) throw RegionError("enumeration cube leaves the disorder region");
    for (int j = 0; j <= t; ++j) {
      noise.emplace_back(f.dim(), R, j & 1);
      fill_pin(noise.back(), Cone::ball(zero, R), SlabWeights{&f, zero, j, Pin::kNoise});
    }
  }

  ParityGrid grid(int j) const { return ParityGrid(field.dim(), R, j & 1); }
  Cone all() const { return Cone::ball(Point(field.dim()), R); }

  void pin(ParityGrid& g, int j) const {
    auto& v = g.raw();
    const auto& h = noise[j].raw();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= h[i];
  }

  ParityGrid diffuse(const ParityGrid& g, int steps, int parity_after) const {
    ParityGrid a = g;
    for (int s = 0; s < steps; ++s) {
      ParityGrid b(field.dim(), R, (parity_after - steps + s + 1) & 1);
      diffuse_step(a, b, all());
      a = std::move(b);
    }
    return a;
  }
};

// Chain value C(I) = sum_z q(i, z) prod h(z_j, i_j) at y for every index
// set I of [0, t], keyed by bit mask (bit j set iff time j is pinned).
void enumerate_chains(const Workspace& ws, int j, ParityGrid g, std::uint32_t mask, std::vector<double>& out) {
  for (int pin = 0; pin <= 1; ++pin) {
    ParityGrid cur = g;
    std::uint32_t m = mask;
    if (pin) {
      ws.pin(cur, j);
      m |= 1u << j;
    }
    if (j == ws.t) {
      out[m] = cur.value(ws.y);
    } else {
      ParityGrid next = ws.grid(j + 1);
      diffuse_step(cur, next, ws.all());
      enumerate_chains(ws, j + 1, std::move(next), m, out);
    }
  }
}

std::vector<int> mask_times(std::uint32_t mask, int t) {
  std::vector<int> times;
  for (int j = 0; j <= t; ++j) {
    if (mask >> j & 1u) times.push_back(j);
  }
  return times;
}

FLTerm fl_term_ws(const Workspace& ws, const std::vector<int>& times, int m, double q) {
  const int r = int(times.size());
  if (m < 1 || m > r + 1) throw DomainError("fl_term: gap position out of range");
  const int d = ws.field.dim();
  const int left = m == 1 ? 0 : times[m - 2];
  const int right = m == r + 1 ? ws.t : times[m - 1];
  // Forward chain from 0 through the pins before the gap.
  ParityGrid fwd = ws.grid(0);
  fwd.set(Point(d), 1.0);
  for (int j = 0; j <= left; ++j) {
    if (m > 1 && std::find(times.begin(), times.begin() + (m - 1), j) != times.begin() + (m - 1)) ws.pin(fwd, j);
    if (j < left) fwd = ws.diffuse(fwd, 1, j + 1);
  }
  // Backward chain from y through the pins after the gap.
  ParityGrid bwd = ws.grid(ws.t);
  bwd.set(ws.y, 1.0);
  for (int j = ws.t; j >= right; --j) {
    if (m <= r && std::find(times.begin() + (m - 1), times.end(), j) != times.end()) ws.pin(bwd, j);
    if (j > right) bwd = ws.diffuse(bwd, 1, j - 1);
  }
  const ParityGrid across = ws.diffuse(fwd, right - left, right);
  const double A = fwd.sum();
  FLTerm out;
  out.F = A * bwd.sum();
  CompensatedSum L;
  const auto& a = across.raw();
  const auto& b = bwd.raw();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] != 0.0) L.add(b[i] * (a[i] / q - A));
  }
  out.L = L.value();
  return out;
}

struct Enumeration {
  std::vector<double> chain;  // by mask
  double q = 0;
};

Enumeration enumerate(const Workspace& ws) {
  Enumeration e;
  e.chain.assign(std::size_t(1) << (ws.t + 1), 0.0);
  ParityGrid start = ws.grid(0);
  start.set(Point(ws.field.dim()), 1.0);
  enumerate_chains(ws, 0, std::move(start), 0, e.chain);
  e.q = transition_series(ws.field.dim(), ws.y, ws.t)[ws.t];
  return e;
}

void require_order_cap(const ScaleParams& p, int t, const std::optional<ThresholdOverride>& ov) {
  if (!ov && k_of_t(p, t) < 1) {
    throw DomainError(fmt::format("decomposition needs k(t) >= 1 (t = {}) or a threshold override", t));
  }
}

}  // namespace

double BDecomposition::residual() const { return std::fabs(q + B1 + B2 + B3 - Z); }

double FLDecomposition::residual() const {
  double s = 0;
  for (int i = 0; i < 3; ++i) s += F[i] + L[i];
  return std::fabs(B3 - q * s);
}

BDecomposition decompose_B(const DisorderField& field, const Point& y, int t, const ScaleParams& p,
                           const std::optional<ThresholdOverride>& ov) {
  require_order_cap(p, t, ov);
  const Workspace ws(field, y, t);
  const auto e = enumerate(ws);
  const double k = ov ? ov->k : k_of_t(p, t);
  BDecomposition out;
  out.q = e.q;
  CompensatedSum b1, b2, b3;
  for (std::uint32_t mask = 1; mask < e.chain.size(); ++mask) {
    const auto times = mask_times(mask, t);
    if (int(times.size()) > k) {
      b1.add(e.chain[mask]);
      ++out.count1;
      continue;
    }
    const auto gc = classify_gaps(times, t, p, ov);
    if (gc.kind == GapClass::kNoHuge) {
      b2.add(e.chain[mask]);
      ++out.count2;
    } else {
      b3.add(e.chain[mask]);
      ++out.count3;
    }
  }
  out.B1 = b1.value();
  out.B2 = b2.value();
  out.B3 = b3.value();
  out.Z = point_to_point(field, Point(field.dim()), 0, y, t);
  return out;
}

FLDecomposition decompose_FL(const DisorderField& field, const Point& y, int t, const ScaleParams& p,
                             const std::optional<ThresholdOverride>& ov) {
  require_order_cap(p, t, ov);
  const Workspace ws(field, y, t);
  const auto e = enumerate(ws);
  if (e.q == 0.0) throw DomainError(fmt::format("decompose_FL: q_{}^{} = 0", t, y.str()));
  const double k = ov ? ov->k : k_of_t(p, t);
  FLDecomposition out;
  out.q = e.q;
  CompensatedSum b3, F[3], L[3];
  for (std::uint32_t mask = 1; mask < e.chain.size(); ++mask) {
    const auto times = mask_times(mask, t);
    const int r = int(times.size());
    if (r > k) continue;
    const auto gc = classify_gaps(times, t, p, ov);
    if (gc.kind != GapClass::kHugeAt) continue;
    b3.add(e.chain[mask]);
    const int cls = gc.m == 1 ? 0 : (gc.m == r + 1 ? 2 : 1);
    const auto term = fl_term_ws(ws, times, gc.m, e.q);
    F[cls].add(term.F);
    L[cls].add(term.L);
  }
  out.B3 = b3.value();
  for (int i = 0; i < 3; ++i) {
    out.F[i] = F[i].value();
    out.L[i] = L[i].value();
  }
  return out;
}

FLTerm fl_term(const DisorderField& field, const Point& y, int t, const std::vector<int>& times, int m) {
  const Workspace ws(field, y, t);
  const double q = transition_series(field.dim(), y, t)[t];
  if (q == 0.0) throw DomainError(fmt::format("fl_term: q_{}^{} = 0", t, y.str()));
  return fl_term_ws(ws, times, m, q);
}

}  // namespace polymer
