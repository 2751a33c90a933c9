#include "polymer/partition.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>

#include "polymer/error.hpp"
#include "polymer/evolve.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

namespace {

void require_cover(const DisorderField& field, const Point& x, int reach, int s, int t) {
  if (x.dim() != field.dim()) throw DomainError("point dimension does not match the field");
  if (s > t) throw DomainError(fmt::format("start time {} after end time {}", s, t));
  if (!field.region().covers(x, reach, s, t)) {
    throw RegionError(fmt::format("walk cone around {} over [{}, {}] leaves the disorder region", x.str(), s, t));
  }
}

int box_extent(const Cone& c) {
  int m = 0;
  for (int k = 0; k < c.lo.dim(); ++k) m = std::max({m, std::abs(c.lo[k]), std::abs(c.hi[k])});
  return m;
}

void require_box_cover(const DisorderField& field, const Cone& targets, int reach, int s, int t) {
  const Region& r = field.region();
  if (s > t) throw DomainError(fmt::format("start time {} after end time {}", s, t));
  if (s < r.t0 || t > r.t1) throw RegionError("time window leaves the disorder region");
  for (int k = 0; k < field.dim(); ++k) {
    if (targets.lo[k] - reach < -r.radius || targets.hi[k] + reach > r.radius) {
      throw RegionError("target cone leaves the disorder region");
    }
  }
}

}  // namespace

PartitionSlice forward_evolve(const DisorderField& field, const Point& x, int s, int t, const SliceObserver& observer) {
  const int d = field.dim();
  const int R = t - s;
  require_cover(field, x, R, s, t);
  ParityGrid g[2] = {ParityGrid(d, R, 0), ParityGrid(d, R, 1)};
  const Point zero(d);
  g[0].set(zero, field.weight(x, s));
  if (observer) observer(s, g[0]);
  for (int j = s + 1; j <= t; ++j) {
    const int cur = (j - s) & 1;
    const SlabWeights w{&field, x, j, Pin::kWeight};
    diffuse_step(g[cur ^ 1], g[cur], Cone::ball(zero, j - s), &w);
    if (observer) observer(j, g[cur]);
  }
  return {t, s, x, std::move(g[R & 1])};
}

PartitionSlice backward_evolve(const DisorderField& field, const Point& y, int t, int s) {
  const int d = field.dim();
  const int R = t - s;
  require_cover(field, y, R, s, t);
  ParityGrid g[2] = {ParityGrid(d, R, 0), ParityGrid(d, R, 1)};
  const Point zero(d);
  g[0].set(zero, field.weight(y, t));
  for (int j = t - 1; j >= s; --j) {
    const int cur = (t - j) & 1;
    const SlabWeights w{&field, y, j, Pin::kWeight};
    diffuse_step(g[cur ^ 1], g[cur], Cone::ball(zero, t - j), &w);
  }
  return {s, t, y, std::move(g[R & 1])};
}

double point_to_point(const DisorderField& field, const Point& x, int s, const Point& y, int t) {
  return forward_evolve(field, x, s, t).at(y);
}

double point_to_plane(const DisorderField& field, const Point& x, int s, int t) {
  return forward_evolve(field, x, s, t).total();
}

double plane_to_point(const DisorderField& field, int s, const Point& y, int t) {
  return backward_evolve(field, y, t, s).total();
}

ParityGrid point_to_plane_many(const DisorderField& field, const Cone& targets, int parity, int s, int t,
                               const SliceObserver& observer) {
  const int d = field.dim();
  const int span = t - s;
  require_box_cover(field, targets, targets.radius + span, s, t);
  const int R = box_extent(targets) + targets.radius + span;
  // Cells of parity p at time s connect to parity p + (j - s) at time j.
  ParityGrid g[2] = {ParityGrid(d, R, parity), ParityGrid(d, R, parity ^ 1)};
  const Point zero(d);
  const auto cone_at = [&](int j) { return Cone{targets.lo, targets.hi, targets.radius + (j - s)}; };
  fill_pin(g[span & 1], cone_at(t), SlabWeights{&field, zero, t, Pin::kWeight});
  if (observer) observer(t, g[span & 1]);
  for (int j = t - 1; j >= s; --j) {
    const int cur = (j - s) & 1;
    const SlabWeights w{&field, zero, j, Pin::kWeight};
    diffuse_step(g[cur ^ 1], g[cur], cone_at(j), &w);
    if (observer) observer(j, g[cur]);
  }
  return std::move(g[0]);
}

ParityGrid plane_to_point_many(const DisorderField& field, const Cone& targets, int parity, int s, int t) {
  const int d = field.dim();
  const int span = t - s;
  require_box_cover(field, targets, targets.radius + span, s, t);
  const int R = box_extent(targets) + targets.radius + span;
  ParityGrid g[2] = {ParityGrid(d, R, parity), ParityGrid(d, R, parity ^ 1)};
  const Point zero(d);
  const auto cone_at = [&](int j) { return Cone{targets.lo, targets.hi, targets.radius + (t - j)}; };
  fill_pin(g[span & 1], cone_at(s), SlabWeights{&field, zero, s, Pin::kWeight});
  for (int j = s + 1; j <= t; ++j) {
    const int cur = (t - j) & 1;
    const SlabWeights w{&field, zero, j, Pin::kWeight};
    diffuse_step(g[cur ^ 1], g[cur], cone_at(j), &w);
  }
  return std::move(g[0]);
}

namespace {

// Difference of two independent walks, started from the law in g (support
// within `reach` of 0), weighted by (1 + lambda) at every visit to 0
// including time 0.
double replica_sweep(ParityGrid g, int reach, int tau, double boost) {
  const int d = g.dim();
  const Point zero(d);
  ParityGrid tmp(d, g.radius(), g.parity() ^ 1);
  const bool hits = g.parity() == 0;
  if (hits) g.set(zero, g.value(zero) * boost);
  for (int i = 1; i <= tau; ++i) {
    diffuse_step(g, tmp, Cone::ball(zero, reach + 2 * i - 1));
    diffuse_step(tmp, g, Cone::ball(zero, reach + 2 * i));
    if (hits) g.set(zero, g.value(zero) * boost);
  }
  return g.sum();
}

}  // namespace

double replica_second_moment(const DisorderSpec& spec, int d, int tau, const Point& offset) {
  if (tau < 0) throw DomainError("replica_second_moment needs tau >= 0");
  if (offset.dim() != d) throw DomainError("replica_second_moment: offset dimension mismatch");
  const int reach = offset.l1();
  ParityGrid g(d, 2 * tau + reach, reach & 1);
  g.set(-offset, 1.0);
  return replica_sweep(std::move(g), reach, tau, 1.0 + lambda_of(spec));
}

double replica_temporal_moment(const DisorderSpec& spec, int d, int s, int tau) {
  if (tau < 0 || s < 0) throw DomainError("replica_temporal_moment needs s, tau >= 0");
  // Position of the first walk when the second one starts.
  ParityGrid g[2] = {ParityGrid(d, 2 * tau + s, 0), ParityGrid(d, 2 * tau + s, 1)};
  const Point zero(d);
  g[0].set(zero, 1.0);
  for (int j = 1; j <= s; ++j) diffuse_step(g[(j - 1) & 1], g[j & 1], Cone::ball(zero, j));
  return replica_sweep(std::move(g[s & 1]), s, tau, 1.0 + lambda_of(spec));
}

std::vector<double> chaos_moment_curve(const DisorderSpec& spec, int d, int tau) {
  if (tau < 0) throw DomainError("chaos_second_moment needs tau >= 0");
  const double lam = lambda_of(spec);
  // a(n) = sum_z (q_n^z)^2 = q_{2n}^0
  const auto q = transition_series(d, Point(d), 2 * tau);
  std::vector<double> U(std::size_t(tau) + 1), M(std::size_t(tau) + 1);
  CompensatedSum m;
  for (int i = 0; i <= tau; ++i) {
    CompensatedSum u;
    u.add(q[2 * i]);
    for (int j = 0; j < i; ++j) u.add(U[j] * q[2 * (i - j)]);
    U[i] = lam * u.value();
    m.add(U[i]);
    M[i] = m.value();
  }
  return M;
}

double chaos_second_moment(const DisorderSpec& spec, int d, int tau) {
  return 1.0 + chaos_moment_curve(spec, d, tau).back();
}

}  // namespace polymer
