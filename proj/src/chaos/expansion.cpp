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

// Order-resolved sweep from `start` at time t0 to time t1 (either
// direction). W^(r) collects the index sets with r pins; pins are allowed
// only at times in [pin_lo, pin_hi]:
//   W^(r)_next = D W^(r) + h (.) D W^(r-1).
// Returns the grids at t1, centred at `start`.
std::vector<ParityGrid> order_sweep(const DisorderField& field, const Point& start, int t0, int t1, int r_max,
                                    int pin_lo, int pin_hi) {
  const int d = field.dim();
  const int n = std::abs(t1 - t0);
  const int dir = t1 >= t0 ? 1 : -1;
  if (!field.region().covers(start, n, std::min(t0, t1), std::max(t0, t1))) {
    throw RegionError("order sweep leaves the disorder region");
  }
  const Point zero(d);
  std::vector<ParityGrid> cur, nxt;
  for (int r = 0; r <= r_max; ++r) {
    cur.emplace_back(d, n, 0);
    nxt.emplace_back(d, n, 1);
  }
  ParityGrid tmp[2] = {ParityGrid(d, n, 0), ParityGrid(d, n, 1)};
  cur[0].set(zero, 1.0);
  const auto pinned = [&](int j) { return j >= pin_lo && j <= pin_hi; };
  if (r_max >= 1 && pinned(t0)) cur[1].set(zero, field.h(start, t0));
  for (int step = 1; step <= n; ++step) {
    const int j = t0 + dir * step;
    const Cone cone = Cone::ball(zero, step);
    const SlabWeights noise{&field, start, j, Pin::kNoise};
    ParityGrid& scratch = tmp[step & 1];
    for (int r = r_max; r >= 0; --r) {
      diffuse_step(cur[r], nxt[r], cone);
      if (r >= 1 && pinned(j)) {
        diffuse_step(cur[r - 1], scratch, cone, &noise);
        nxt[r].add_scaled(scratch, 1.0);
      }
    }
    std::swap(cur, nxt);
  }
  return cur;
}

}  // namespace

std::vector<double> chaos_orders(const DisorderField& field, const Point& y, int t, int r_max) {
  if (t < 0 || r_max < 0) throw DomainError("chaos_orders: need t >= 0 and r_max >= 0");
  r_max = std::min(r_max, t + 1);
  const Point zero(field.dim());
  const auto grids = order_sweep(field, zero, 0, t, r_max, 0, t);
  std::vector<double> out;
  for (const auto& g : grids) out.push_back(g.value(y));
  return out;
}

double chaos_sum_full(const DisorderField& field, const Point& y, int t, int r_max) {
  CompensatedSum acc;
  for (double v : chaos_orders(field, y, t, r_max)) acc.add(v);
  return acc.value();
}

Truncations truncations_windowed(const DisorderField& field, const Point& y, int t, int order_cap, int window) {
  if (t < 1) throw DomainError("truncations need t >= 1");
  const int d = field.dim();
  const Point zero(d);
  Truncations tr;
  tr.order_cap = order_cap = std::min(order_cap, t + 1);
  tr.window = window = std::min(window, t);
  // Pins at times <= window; the kernel after the last pin sums to one.
  CompensatedSum a;
  for (const auto& g : order_sweep(field, zero, 0, window, order_cap, 0, window)) a.add(g.sum());
  tr.T00 = a.value();
  // Mirror image: pins at times >= t - window, first kernel summed out.
  CompensatedSum b;
  for (const auto& g : order_sweep(field, y, t, t - window, order_cap, t - window, t)) b.add(g.sum());
  tr.T0y = b.value();
  return tr;
}

Truncations truncations(const DisorderField& field, const Point& y, int t, const ScaleParams& p) {
  p.validate();
  const int cap = int(std::floor(std::pow(double(t), p.xi1) + 1.0));
  const int window = int(std::floor(std::pow(double(t), p.xi2)));
  return truncations_windowed(field, y, t, cap, window);
}

double delta_error(const DisorderField& field, const Point& y, int t, int T1, int s1) {
  const int d = field.dim();
  const double q = transition_series(d, y, t)[t];
  return delta_errors(field, {y}, t, T1, s1, {q}).front();
}

std::vector<double> delta_errors(const DisorderField& field, const std::vector<Point>& ys, int t, int T1, int s1,
                                 const std::vector<double>& q) {
  if (ys.empty() || ys.size() != q.size()) throw DomainError("delta_errors: need one kernel value per point");
  if (T1 < t || s1 > 0) throw DomainError("delta_errors: need T1 >= t and s1 <= 0");
  const int d = field.dim();
  const int parity = ys.front().l1() & 1;
  Point lo = ys.front(), hi = ys.front();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if ((ys[i].l1() & 1) != parity) throw DomainError("delta_errors: points must share parity");
    if (q[i] == 0.0) throw DomainError(fmt::format("delta_errors: q_{}^{} = 0", t, ys[i].str()));
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], ys[i][k]);
      hi[k] = std::max(hi[k], ys[i][k]);
    }
  }
  // Z_{0,0}^{y,t} for every y and Z_{0,0}^{T1} from one forward sweep.
  std::vector<double> zyt(ys.size());
  const auto slice = forward_evolve(field, Point(d), 0, T1, [&](int j, const ParityGrid& g) {
    if (j != t) return;
    for (std::size_t i = 0; i < ys.size(); ++i) zyt[i] = g.value(ys[i]);
  });
  const double z_plane = slice.total();
  // Z_{s1}^{y,t} from one sweep started on the whole plane at s1.
  const ParityGrid back = plane_to_point_many(field, Cone{lo, hi, 0}, parity, s1, t);
  std::vector<double> out(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) out[i] = zyt[i] / q[i] - z_plane * back.value(ys[i]);
  return out;
}

}  // namespace polymer
