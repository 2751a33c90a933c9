#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polymer/disorder.hpp"
#include "polymer/lattice.hpp"

namespace polymer {

// Exponent bundle of the gap taxonomy and the truncations.
struct ScaleParams {
  double sigma = 0.8;
  double sigma_tilde = 0.85;
  double kappa1 = 0.72;
  double kappa2 = 0.78;
  double gap_exp = 0.05;
  double xi1 = 0.02;
  double xi2 = 0.035;
  std::optional<double> theta_target;

  // ConfigError naming the first violated constraint.
  void validate() const;
  // Least T with 2 (t - t^kappa2) > t for every t >= T.
  int t_kappa2() const;
};

// (t - T_kappa2)^kappa1 - 1 when that is >= 1, else 0. Real valued.
double k_of_t(const ScaleParams& p, int t);

struct ChaosIndex {
  std::vector<int> times;  // strictly increasing, inside [0, t]
  std::vector<Point> sites;
};

// Test-mode thresholds: order cap k and large-gap cut replacing t^gap_exp
// (the huge cut becomes t - r * large_cut).
struct ThresholdOverride {
  double k = 0;
  double large_cut = 0;
};

struct GapClass {
  enum Kind { kNoHuge, kHugeAt } kind = kNoHuge;
  int m = 0;            // 1-based gap position when kind == kHugeAt
  int large_count = 0;
  int huge_count = 0;   // > 1 only possible under an override
};

// Gaps i_j - i_{j-1}, j = 1..r+1, with i_0 = 0 and i_{r+1} = t. Under
// production params raises DomainError if r > k(t) and checks the structure
// facts (at least one large gap, at most one huge gap, no huge gap implies
// two large ones), raising std::logic_error on violation.
GapClass classify_gaps(const std::vector<int>& times, int t, const ScaleParams& p,
                       const std::optional<ThresholdOverride>& ov = std::nullopt);

// Z_{0,0}^{y,t} through the order-resolved expansion, orders r <= r_max.
double chaos_sum_full(const DisorderField& field, const Point& y, int t, int r_max);
// Per-order contributions r = 0..r_max.
std::vector<double> chaos_orders(const DisorderField& field, const Point& y, int t, int r_max);

struct BDecomposition {
  double q = 0;  // q_t^y
  double B1 = 0, B2 = 0, B3 = 0;
  double Z = 0;  // point-to-point by the transfer matrix
  std::uint64_t count1 = 0, count2 = 0, count3 = 0;
  double residual() const;  // |q + B1 + B2 + B3 - Z|
};

struct FLDecomposition {
  double q = 0;
  double F[3] = {0, 0, 0};
  double L[3] = {0, 0, 0};
  double B3 = 0;
  double residual() const;  // |B3 - q (sum F + sum L)|
};

// Exhaustive over all index sets of [0, t]; feasible for small t only.
// Needs k(t) >= 1 or an override.
BDecomposition decompose_B(const DisorderField& field, const Point& y, int t, const ScaleParams& p,
                           const std::optional<ThresholdOverride>& ov = std::nullopt);
FLDecomposition decompose_FL(const DisorderField& field, const Point& y, int t, const ScaleParams& p,
                             const std::optional<ThresholdOverride>& ov = std::nullopt);

// F and L contributions of a single index set with the kernel of gap m
// removed: F = sum_z qhat prod h, L = sum_z (q_gap - q) / q qhat prod h.
struct FLTerm {
  double F = 0;
  double L = 0;
};
FLTerm fl_term(const DisorderField& field, const Point& y, int t, const std::vector<int>& times, int m);

struct Truncations {
  double T00 = 0;
  double T0y = 0;
  int order_cap = 0;
  int window = 0;
};
// Orders r <= floor(t^xi1 + 1); T00 pins times <= floor(t^xi2), T0y pins
// times >= ceil(t - t^xi2).
Truncations truncations(const DisorderField& field, const Point& y, int t, const ScaleParams& p);
Truncations truncations_windowed(const DisorderField& field, const Point& y, int t, int order_cap, int window);

// Z_{0,0}^{y,t} / q_t^y - Z_{0,0}^{T1} Z_{s1}^{y,t}. Raises DomainError when
// q_t^y = 0.
double delta_error(const DisorderField& field, const Point& y, int t, int T1, int s1);
// Same for several y of one parity class, sharing the sweeps.
std::vector<double> delta_errors(const DisorderField& field, const std::vector<Point>& ys, int t, int T1, int s1,
                                 const std::vector<double>& q);

}  // namespace polymer
