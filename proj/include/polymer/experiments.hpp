#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "polymer/chaos.hpp"
#include "polymer/disorder.hpp"

namespace polymer {

struct EstimatorReport {
  std::string name;
  std::size_t n = 0;
  double mean = 0;
  double stderr_ = 0;  // sample standard deviation / sqrt(n)
  std::uint64_t seed = 0;
  std::string digest;
};

struct RateFit {
  std::vector<std::pair<double, double>> points;  // (t, value > 0)
  double slope = 0;
  double intercept = 0;   // of ln value against ln t
  double half_width = 0;  // 95% Student-t half width of the slope
  bool excludes_zero() const { return slope + half_width < 0 || slope - half_width > 0; }
};

// Least squares of ln value on ln t; needs >= 3 points with value > 0.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

// Set by the SIGINT handler; runners stop handing out work once it is set.
std::atomic<bool>& cancel_flag();

// Independent realizations i = 0..n-1 seeded with seed + i, evaluated on a
// worker pool. Samples are kept by index so the reductions do not depend on
// scheduling.
class McSamples {
 public:
  using Estimator = std::function<std::vector<double>(std::uint64_t seed)>;

  static McSamples run(const Estimator& f, std::size_t n, std::uint64_t seed, int workers);

  std::size_t n() const { return done_; }
  bool complete() const { return complete_; }
  std::size_t width() const { return width_; }
  double at(std::size_t i, std::size_t k) const { return data_[i * width_ + k]; }

  // Mean and standard error of g(sample row).
  std::pair<double, double> stat(const std::function<double(const double*)>& g) const;
  std::pair<double, double> stat(std::size_t k) const;

 private:
  std::size_t width_ = 0;
  std::size_t done_ = 0;
  bool complete_ = true;
  std::vector<double> data_;
};

EstimatorReport mc_expectation(const std::string& name, const std::function<double(std::uint64_t)>& f,
                               std::size_t n, std::uint64_t seed, int workers);

struct ScanRow {
  std::string experiment;
  int t = 0;
  std::string where;  // y or s label
  std::size_t n = 0;
  double mean = 0;
  double stderr_ = 0;
  double reference = 0;  // oracle value where one exists, NaN otherwise
  double extra = 0;      // experiment specific (see the CSV docs)
};

struct DeltaSample {
  int t = 0;
  int m = 0;  // y = m e_1
  std::uint64_t seed = 0;
  double value = 0;
};

struct FactorizationResult {
  std::vector<ScanRow> rows;
  std::vector<DeltaSample> samples;
  std::vector<std::pair<int, double>> sup;  // (t, max over y of <|delta|>)
  RateFit fit;
  bool strictly_decreasing = false;
  bool complete = true;
};

// Ray grid {0, floor(t^{1/2}), floor(t^sigma)} along e_1, each moved down
// by one when its parity differs from t.
std::vector<Point> factorization_grid(int d, int t, double sigma);

FactorizationResult factorization_scan(const DisorderSpec& spec, int d, const ScaleParams& p,
                                       const std::vector<int>& ladder, std::size_t n, int workers,
                                       int horizon_factor = 2, int past_factor = 1);

struct ConvergenceResult {
  std::vector<ScanRow> rows;  // reference = exact M_Tref - M_t
  RateFit exact_fit;
  RateFit mc_fit;
  double theta_bound = 0;  // min{d/2 - 1, -ln(alpha_d lambda)}
  bool exact_positive_decreasing = false;
  bool mc_within_4se = false;
  bool complete = true;
};

ConvergenceResult convergence_rate_scan(const DisorderSpec& spec, int d, const std::vector<int>& ladder, int t_ref,
                                        std::size_t n, int workers);

enum class CorrelationMode { kSpatial, kTemporal };

struct CorrelationRow {
  Point y;        // spatial offset (zero in temporal mode)
  int s = 0;      // temporal offset
  double mc = 0;  // mean of (Z - 1)(Z' - 1)
  double stderr_ = 0;
  double closed_form = 0;  // kernel sum * lambda / (1 - alpha_d lambda)
  double exact_finite = 0; // exact covariance at the proxy horizon
  double scale = 0;        // |y|^{d-2} or s^{d/2-1}
};

struct CorrelationResult {
  CorrelationMode mode = CorrelationMode::kSpatial;
  int t_proxy = 0;
  std::size_t n = 0;
  std::vector<CorrelationRow> rows;
  bool complete = true;
};

// Spatial mode: offsets are points y (Z_{0,0}^T against Z_{y,0}^T).
// Temporal mode: offsets[i][0] is the time shift s (Z_{0,0}^T against Z_{0,s}^T).
CorrelationResult correlation_scan(const DisorderSpec& spec, int d, CorrelationMode mode,
                                   const std::vector<Point>& offsets, int t_proxy, std::size_t n, int workers);

// G(0, y) lambda / (1 - alpha_d lambda); Green function from the series route.
double spatial_covariance_limit(const DisorderSpec& spec, int d, const Point& y);
// sum_{i >= 0} q_{s + 2i}^0 lambda / (1 - alpha_d lambda) for even s.
double temporal_covariance_limit(const DisorderSpec& spec, int d, int s);

}  // namespace polymer
