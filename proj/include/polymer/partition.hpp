#pragma once

#include <functional>
#include <vector>

#include "polymer/disorder.hpp"
#include "polymer/lattice.hpp"

namespace polymer {

// One time slice of the transfer-matrix recursion. Cell u of `values` holds
// the weight at the absolute point origin + u.
struct PartitionSlice {
  int time = 0;
  int start = 0;
  Point origin;
  ParityGrid values;

  double at(const Point& z) const { return values.value(z - origin); }
  double total() const { return values.sum(); }
};

using SliceObserver = std::function<void(int time, const ParityGrid& values)>;

// W_s = delta_x (1 + h(x, s)); W_j(z) = (1 + h(z, j)) (2d)^{-1} sum_e W_{j-1}(z - e).
// The observer (if any) sees every slice s..t.
PartitionSlice forward_evolve(const DisorderField& field, const Point& x, int s, int t,
                              const SliceObserver& observer = {});

// V_t = delta_y (1 + h(y, t)); V_j(z) = (1 + h(z, j)) (2d)^{-1} sum_e V_{j+1}(z + e).
// V_s(z) = Z_{z,s}^{y,t}; its sum is Z_s^{y,t}.
PartitionSlice backward_evolve(const DisorderField& field, const Point& y, int t, int s);

double point_to_point(const DisorderField& field, const Point& x, int s, const Point& y, int t);
double point_to_plane(const DisorderField& field, const Point& x, int s, int t);
double plane_to_point(const DisorderField& field, int s, const Point& y, int t);

// Z_{x,s}^t for every x of the given parity class within L1 distance
// `targets.radius` of the box [targets.lo, targets.hi] (one adjoint sweep).
// Cells of the result outside that set are not meaningful.
// The observer sees the adjoint slice V_j (V_j(x) = Z_{x,j}^t) for j = t..s;
// at time j only cells within targets.radius + (j - s) of the box are valid.
ParityGrid point_to_plane_many(const DisorderField& field, const Cone& targets, int parity, int s, int t,
                               const SliceObserver& observer = {});

// Z_s^{y,t} for every y of the given parity class in the target set (one
// forward sweep from the whole plane at time s).
ParityGrid plane_to_point_many(const DisorderField& field, const Cone& targets, int parity, int s, int t);

// <Z_{0,0}^tau Z_{y,0}^tau> = E[(1 + lambda)^N], N the number of coincidence
// times in [0, tau] of independent walks from 0 and y. Exact.
double replica_second_moment(const DisorderSpec& spec, int d, int tau, const Point& offset);
inline double replica_second_moment(const DisorderSpec& spec, int d, int tau) {
  return replica_second_moment(spec, d, tau, Point(d));
}
// <Z_{0,0}^{s+tau} Z_{0,s}^{s+tau}>: the first walk runs alone for s steps.
double replica_temporal_moment(const DisorderSpec& spec, int d, int s, int tau);

// 1 + M_tau, M_tau = sum_r lambda^r sum_{i, z} prod (q_{i_j - i_{j-1}}^{z_j - z_{j-1}})^2.
double chaos_second_moment(const DisorderSpec& spec, int d, int tau);
// M_0 .. M_tau in one pass.
std::vector<double> chaos_moment_curve(const DisorderSpec& spec, int d, int tau);

}  // namespace polymer
