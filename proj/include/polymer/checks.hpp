#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polymer/chaos.hpp"
#include "polymer/disorder.hpp"
#include "polymer/experiments.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

struct CheckRow {
  std::string check;
  std::string inputs;
  double lhs = 0;
  double rhs = 0;
  bool pass = false;
  bool gating = true;  // informational rows never fail a report
};

class CheckReport {
 public:
  void add(std::string check, std::string inputs, double lhs, double rhs, bool pass);
  // Passes when lhs <= rhs.
  void le(std::string check, std::string inputs, double lhs, double rhs);
  void note(std::string check, std::string inputs, double lhs, double rhs);
  void append(const CheckReport& other);

  const std::vector<CheckRow>& rows() const { return rows_; }
  bool pass() const;
  std::size_t failures() const;
  // First failing row, else the row with the largest lhs / rhs.
  const CheckRow* worst() const;

 private:
  std::vector<CheckRow> rows_;
};

// Normalization and parity zeros for t <= t_max, sum of squares against
// q_{2t}^0 for t <= square_t (the table must reach 2 square_t).
CheckReport kernel_exactness(const KernelTable& table, int t_max, int square_t);

// Squared-kernel route against the Bessel route, and the weak-disorder margin.
CheckReport alpha_consistency(const DisorderSpec& spec, int d, double tol);

// Newton residual over |z|_2 <= speed t, lattice tilted mass, and the
// Fourier identity for t <= fourier_t_max.
CheckReport tilt_fourier_checks(const KernelTable& table, const std::vector<int>& tilt_times, double speed,
                                int fourier_t_max);

CheckReport composition_checks(int t_max, int l_max, const std::vector<double>& Ms, const std::vector<int>& dims);

CheckReport lclt_checks(int d, double sigma_tilde, int fit_lo, int fit_hi, int check_hi);

// Order-resolved expansion against the transfer matrix for t <= t_max over
// all parity-valid y and seeds seed..seed+seeds-1.
CheckReport chaos_dp_equivalence(const DisorderSpec& spec, int d, int t_max, int seeds);

// B and F/L reassembly in test mode for t <= t_max under each override,
// plus the gap structure facts on random index vectors under p.
CheckReport decomposition_identities(const DisorderSpec& spec, int d, int t_max, const ScaleParams& p,
                                     const std::vector<ThresholdOverride>& overrides, int seeds,
                                     std::size_t random_vectors, std::uint64_t rng_seed);

// Replica against chaos second moment for tau <= tau_max, and an MC variance
// of Z_{0,0}^{tau_mc} over n samples.
CheckReport second_moment_checks(const DisorderSpec& spec, int d, int tau_max, int tau_mc, std::size_t n,
                                 int workers);

CheckReport correlation_verdicts(const CorrelationResult& r, double ratio_tol);
CheckReport convergence_verdicts(const ConvergenceResult& r, double theta_min);
CheckReport factorization_verdicts(const FactorizationResult& r, double slope_max);

}  // namespace polymer
