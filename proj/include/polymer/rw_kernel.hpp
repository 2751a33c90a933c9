#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "polymer/lattice.hpp"

namespace polymer {

// q_t^z = P(simple random walk from 0 is at z after t steps), stored densely
// for 0 <= t <= t_max on the parity class of [-t, t]^d.
//
// Block t: rows indexed by (z_2, ..., z_d) in [-t, t]^{d-1}, row index
// sum_k (z_k + t) (2t+1)^{k-2}; t + 1 slots per row, slot k holding
// z_1 = 2k + e - t where e = (z_2 + ... + z_d) mod 2.
class KernelTable {
 public:
  KernelTable() = default;
  KernelTable(int d, int t_max);

  int dim() const { return d_; }
  int t_max() const { return t_max_; }

  // Exact zero off the parity class or outside the L1 ball.
  double q(int t, const Point& z) const;

  std::span<const double> block(int t) const;
  double sum(int t) const;
  double sum_squares(int t) const;
  // f(z, q) over every stored cell of block t (zeros included)
  template <class F>
  void for_each(int t, F&& f) const;

  static constexpr std::uint32_t kLayoutVersion = 1;
  void save(std::ostream& os) const;
  static KernelTable load(std::istream& is);
  // z_1..z_d,q rows for the nonzero cells of times [t_lo, t_hi].
  void write_csv(std::ostream& os, int t_lo, int t_hi) const;

 private:
  std::size_t block_rows(int t) const;
  std::size_t index(int t, const Point& z) const;

  int d_ = 0;
  int t_max_ = -1;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
};

// q_n^y for n = 0..n_max by the binomial split of steps between the first
// axis and the rest; independent of the grid recursion. Long double inside.
std::vector<double> transition_series(int d, const Point& y, int n_max);

struct TailEstimate {
  double tail = 0;   // extrapolated sum over t > horizon
  double error = 0;  // difference between fit orders
};

// Extrapolates sum_{t > T} a_t for a_t ~ t^{-p} (A + B/t + ...) from the
// exact values a[0..T] (a.size() == T + 1) using `terms` fitted coefficients
// at nodes T, T/2, T/4, ...
TailEstimate power_tail(std::span<const double> a, double p, int terms);

struct GreenResult {
  double value = 0;
  double error = 0;          // tail extrapolation error estimate
  double partial = 0;        // exact partial sum through the horizon
  double majorant_tail = 0;  // C t^{-d/2} majorant summed beyond the horizon
  int horizon = 0;           // last even-time index 2T included exactly
};

// G(0, y) = sum_{t >= 0} q_{2t}^y (y of even norm; 0 for odd norm).
// Raises ConvergenceError if the tail cannot reach tol within the budget.
GreenResult green_value(int d, const Point& y, double tol, int horizon_budget = 8192);

// G(0, y) = d int_0^inf prod_k e^{-u} I_{|y_k|}(u) du, by quadrature.
double green_integral(int d, const Point& y, double tol = 1e-12);

// alpha_d = sum_{t >= 1} sum_z (q_t^z)^2, from the squared kernel grids up to
// `direct_horizon` plus an extrapolated tail. Checks sum_z (q_t^z)^2 = q_{2t}^0
// against the series at every step (DomainError beyond 1e-14).
GreenResult alpha_d(int d, double tol, int direct_horizon = 96);

// c1 (d / 2 pi t)^{d/2} exp(-d |y|^2 / 2t) exp(-c2 t^{4 sigma_tilde - 3})
double lclt_lower_bound(int t, const Point& y, double sigma_tilde, double c1, double c2);

struct LcltFit {
  double c1 = 0;
  double c2 = 0;
  int checked = 0;      // held-out (t, y) pairs compared
  int violations = 0;   // pairs with bound > q_t^y
  double worst_log_margin = 0;  // min over held-out of ln q - ln bound
};

// Fits (c1, c2) on t in [fit_lo, fit_hi] and compares on [fit_hi, check_hi]
// over parity-valid y with |y|_2 <= t^{0.8}.
LcltFit lclt_fit_and_check(int d, double sigma_tilde, int fit_lo, int fit_hi, int check_hi);

struct TiltState {
  Point z;
  int t = 0;
  std::vector<double> phi;
  double residual = 0;
  int iterations = 0;
};

// F_k(x) = sinh(x_k) / sum_l cosh(x_l)
std::vector<double> tilt_map(std::span<const double> phi);
// Solves F(phi) = z / t by damped Newton from 0. DomainError when |z|_1 / t
// is outside the accepted region, ConvergenceError on failure.
TiltState tilt_solve(const Point& z, int t, double tol = 1e-12);
inline constexpr double kTiltMaxSpeed = 0.9;

struct TiltCalibration {
  double rho1 = 0;  // |z|_2 <= rho1 t implies |phi|_2 <= 1
  double rho2 = 0;  // |phi|_2 <= rho2 |z|_2 / t on the sampled region
};
TiltCalibration calibrate_tilt(int d, int samples = 2000, std::uint64_t seed = 7);

struct TiltedMass {
  double closed = 0;   // Phi(0)^t
  double lattice = 0;  // sum_y q_t^y e^{phi.y}; NaN without a table
  double rel_diff = 0;
};
// Raises DomainError if the lattice sum disagrees beyond 1e-10 relative.
TiltedMass tilted_mass(std::span<const double> phi, int t, const KernelTable* table = nullptr);

struct FourierCheck {
  double lhs = 0;
  double rhs = 0;
  double rhs_imag = 0;
};
// lhs = q_t^z e^{phi.z}; rhs by the exact discrete Fourier sum on N = 2t + 2
// points per axis.
FourierCheck fourier_identity_check(const Point& z, int t, std::span<const double> phi,
                                    const KernelTable& table);
// All z in [-t, t]^d at once (separable inverse transform). Entry layout:
// z_1 fastest, each axis shifted by t. Real and imaginary parts.
void fourier_identity_grid(int d, int t, std::span<const double> phi, std::vector<double>& re,
                           std::vector<double>& im);

struct RatioReport {
  double ratio = 0;
  double bound = 0;
  bool holds = false;
};
RatioReport ratio_bound_report(const KernelTable& table, int t, int t2, const Point& z, const Point& z2,
                               double c, double correction);
// Exponent of the ratio bound: |z|/t (|z - z'| + |t - t'|) + ln(t) |t - t'| / t
double ratio_bound_argument(int t, int t2, const Point& z, const Point& z2);

// t^{d/2} max_y q_t^y e^{phi.y} / sum_z q_t^z e^{phi.z}
double lin_func_ratio(const KernelTable& table, int t, std::span<const double> phi);

struct CompositionBound {
  int t = 0, l = 0, d = 0;
  double M = 0;
  double lhs = 0;
  double rhs = 0;
  double c = 0;
};
// c = 2^d max{zeta(d/2), 1 / (d/2 - 1)}
double composition_constant(int d);
CompositionBound composition_sum(int t, int l, double M, int d);

template <class F>
void KernelTable::for_each(int t, F&& f) const {
  auto blk = block(t);
  Point z(d_);
  for (int k = 1; k < d_; ++k) z[k] = -t;
  std::size_t r = 0;
  for (;;) {
    int s = 0;
    for (int k = 1; k < d_; ++k) s += z[k];
    const int e = s & 1;
    for (int k = 0; 2 * k + e - t <= t; ++k) {
      z[0] = 2 * k + e - t;
      f(static_cast<const Point&>(z), blk[r * std::size_t(t + 1) + std::size_t(k)]);
    }
    ++r;
    int k = 1;
    for (; k < d_; ++k) {
      if (++z[k] <= t) break;
      z[k] = -t;
    }
    if (k >= d_) break;
  }
}

}  // namespace polymer
