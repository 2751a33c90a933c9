#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "polymer/error.hpp"
#include "polymer/evolve.hpp"
#include "polymer/experiments.hpp"
#include "polymer/partition.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_weak(const DisorderSpec& spec, int d) {
  const double m = weak_disorder_margin(spec, d);
  if (!(m < 1.0)) throw DomainError(fmt::format("alpha_d lambda = {} is not below 1", m));
}

double green_series(int d, const Point& y) { return green_value(d, y, 1e-9).value; }

double series_alpha(int d) { return green_series(d, Point(d)) - 1.0; }

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return !v.empty();
}

}  // namespace

std::vector<Point> factorization_grid(int d, int t, double sigma) {
  if (t < 1) throw DomainError("factorization grid needs t >= 1");
  std::vector<int> ms = {0, static_cast<int>(std::floor(std::sqrt(static_cast<double>(t)))),
                         static_cast<int>(std::floor(std::pow(static_cast<double>(t), sigma)))};
  for (int& m : ms) {
    if (((m - t) & 1) != 0) m = m == 0 ? 1 : m - 1;
  }
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::vector<Point> out;
  for (int m : ms) out.push_back(Point::axis(d, m));
  return out;
}

FactorizationResult factorization_scan(const DisorderSpec& spec, int d, const ScaleParams& p,
                                       const std::vector<int>& ladder, std::size_t n, int workers,
                                       int horizon_factor, int past_factor) {
  spec.validate();
  p.validate();
  require_weak(spec, d);
  if (horizon_factor < 1 || past_factor < 0) throw DomainError("factorization proxies need T1 >= t and s1 <= 0");
  FactorizationResult res;
  std::vector<double> sups;
  for (int t : ladder) {
    const std::vector<Point> ys = factorization_grid(d, t, p.sigma);
    std::vector<double> q;
    int reach = 0;
    for (const Point& y : ys) {
      q.push_back(transition_series(d, y, t).back());
      reach = std::max(reach, y.l1());
    }
    const int T1 = horizon_factor * t;
    const int s1 = -past_factor * t;
    const Region region{d, reach + std::max(T1, t - s1), s1, T1};
    const auto est = [&](std::uint64_t seed) {
      DisorderSpec s = spec;
      s.seed = seed;
      const DisorderField field(s, region);
      return delta_errors(field, ys, t, T1, s1, q);
    };
    const McSamples mc = McSamples::run(est, n, spec.seed, workers);
    res.complete = res.complete && mc.complete();
    double sup = 0;
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const auto [mean_abs, se_abs] = mc.stat([k](const double* r) { return std::fabs(r[k]); });
      const auto [mean, se] = mc.stat(k);
      (void)se;
      ScanRow row;
      row.experiment = "factorization";
      row.t = t;
      row.where = fmt::format("y={}", ys[k][0]);
      row.n = mc.n();
      row.mean = mean_abs;
      row.stderr_ = se_abs;
      row.reference = kNaN;
      row.extra = mean;
      res.rows.push_back(row);
      sup = std::max(sup, mean_abs);
      for (std::size_t i = 0; i < mc.n(); ++i) res.samples.push_back({t, ys[k][0], spec.seed + i, mc.at(i, k)});
    }
    res.sup.emplace_back(t, sup);
    sups.push_back(sup);
    if (!mc.complete()) break;
  }
  res.strictly_decreasing = res.complete && strictly_decreasing(sups);
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : res.sup) pts.emplace_back(t, v);
  if (pts.size() >= 3 && std::all_of(pts.begin(), pts.end(), [](auto& pt) { return pt.second > 0; })) {
    res.fit = rate_fit(pts);
  }
  return res;
}

ConvergenceResult convergence_rate_scan(const DisorderSpec& spec, int d, const std::vector<int>& ladder, int t_ref,
                                        std::size_t n, int workers) {
  spec.validate();
  require_weak(spec, d);
  if (ladder.empty() || *std::max_element(ladder.begin(), ladder.end()) >= t_ref) {
    throw DomainError("convergence scan needs every ladder time below T_ref");
  }
  ConvergenceResult res;
  const double lam = lambda_of(spec);
  res.theta_bound = std::min(0.5 * d - 1.0, -std::log(series_alpha(d) * lam));
  const std::vector<double> curve = chaos_moment_curve(spec, d, t_ref);
  const Region region{d, t_ref, 0, t_ref};
  // Row layout: Z^t for each ladder time, then Z^{T_ref}.
  const auto est = [&](std::uint64_t seed) {
    DisorderSpec s = spec;
    s.seed = seed;
    const DisorderField field(s, region);
    std::vector<double> z(ladder.size() + 1);
    const auto slice = forward_evolve(field, Point(d), 0, t_ref, [&](int j, const ParityGrid& g) {
      for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (ladder[k] == j) z[k] = cone_sum(g, Cone::ball(Point(d), j));
      }
    });
    z.back() = slice.total();
    return z;
  };
  const McSamples mc = McSamples::run(est, n, spec.seed, workers);
  res.complete = mc.complete();
  const std::size_t last = ladder.size();
  std::vector<double> exact;
  bool within = true;
  std::vector<std::pair<double, double>> exact_pts, mc_pts;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const int t = ladder[k];
    const auto [mean, se] = mc.stat([k, last](const double* r) {
      const double dz = r[k] - r[last];
      return dz * dz;
    });
    ScanRow row;
    row.experiment = "convergence";
    row.t = t;
    row.where = fmt::format("T={}", t_ref);
    row.n = mc.n();
    row.mean = mean;
    row.stderr_ = se;
    row.reference = curve[t_ref] - curve[t];
    row.extra = curve[t];
    res.rows.push_back(row);
    exact.push_back(row.reference);
    within = within && std::fabs(mean - row.reference) <= 4.0 * se;
    exact_pts.emplace_back(t, row.reference);
    mc_pts.emplace_back(t, mean);
  }
  res.exact_positive_decreasing =
      strictly_decreasing(exact) && std::all_of(exact.begin(), exact.end(), [](double v) { return v > 0; });
  res.mc_within_4se = within && res.complete;
  const auto positive = [](const auto& pts) {
    return std::all_of(pts.begin(), pts.end(), [](auto& pt) { return pt.second > 0; });
  };
  if (exact_pts.size() >= 3 && positive(exact_pts)) res.exact_fit = rate_fit(exact_pts);
  if (mc_pts.size() >= 3 && positive(mc_pts)) res.mc_fit = rate_fit(mc_pts);
  return res;
}

double spatial_covariance_limit(const DisorderSpec& spec, int d, const Point& y) {
  if (y.l1() & 1) return 0.0;
  const double lam = lambda_of(spec);
  const double alpha = series_alpha(d);
  return green_series(d, y) * lam / (1.0 - alpha * lam);
}

double temporal_covariance_limit(const DisorderSpec& spec, int d, int s) {
  if (s < 0) throw DomainError("temporal offset must be >= 0");
  if (s & 1) return 0.0;
  const double lam = lambda_of(spec);
  const double alpha = series_alpha(d);
  // sum_{i >= 0} q_{s + 2i}^0 = G(0, 0) - sum_{n < s} q_n^0
  double head = 0;
  if (s > 0) {
    const std::vector<double> q = transition_series(d, Point(d), s - 1);
    for (double v : q) head += v;
  }
  return (green_series(d, Point(d)) - head) * lam / (1.0 - alpha * lam);
}

CorrelationResult correlation_scan(const DisorderSpec& spec, int d, CorrelationMode mode,
                                   const std::vector<Point>& offsets, int t_proxy, std::size_t n, int workers) {
  spec.validate();
  require_weak(spec, d);
  if (offsets.empty()) throw DomainError("correlation scan needs offsets");
  CorrelationResult res;
  res.mode = mode;
  res.t_proxy = t_proxy;
  const Point zero(d);
  int reach = 0;
  bool odd = false;
  for (const Point& y : offsets) {
    if (y.dim() != d) throw DomainError("offset dimension mismatch");
    if (mode == CorrelationMode::kTemporal) {
      if (y[0] < 0 || y[0] > t_proxy) throw DomainError(fmt::format("temporal offset {} outside [0, T]", y[0]));
      if (y[0] & 1) throw DomainError(fmt::format("temporal offset {} is odd", y[0]));
    } else {
      reach = std::max(reach, y.l1());
      odd = odd || (y.l1() & 1);
    }
  }
  const Region region{d, reach + t_proxy, 0, t_proxy};
  std::function<std::vector<double>(std::uint64_t)> est;
  if (mode == CorrelationMode::kSpatial) {
    est = [&](std::uint64_t seed) {
      DisorderSpec s = spec;
      s.seed = seed;
      const DisorderField field(s, region);
      const Cone targets = Cone::ball(zero, reach);
      const ParityGrid even = point_to_plane_many(field, targets, 0, 0, t_proxy);
      ParityGrid odd_grid;
      if (odd) odd_grid = point_to_plane_many(field, targets, 1, 0, t_proxy);
      const double z0 = even.value(zero) - 1.0;
      std::vector<double> row(offsets.size());
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const Point& y = offsets[k];
        const double zy = ((y.l1() & 1) ? odd_grid.value(y) : even.value(y)) - 1.0;
        row[k] = z0 * zy;
      }
      return row;
    };
  } else {
    est = [&](std::uint64_t seed) {
      DisorderSpec s = spec;
      s.seed = seed;
      const DisorderField field(s, region);
      std::vector<double> zs(t_proxy + 1, 0.0);
      point_to_plane_many(field, Cone::ball(zero, 0), 0, 0, t_proxy,
                          [&](int j, const ParityGrid& g) { zs[j] = g.value(zero); });
      std::vector<double> row(offsets.size());
      for (std::size_t k = 0; k < offsets.size(); ++k) row[k] = (zs[0] - 1.0) * (zs[offsets[k][0]] - 1.0);
      return row;
    };
  }
  const McSamples mc = McSamples::run(est, n, spec.seed, workers);
  res.complete = mc.complete();
  res.n = mc.n();
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    CorrelationRow row;
    const auto [mean, se] = mc.stat(k);
    row.mc = mean;
    row.stderr_ = se;
    if (mode == CorrelationMode::kSpatial) {
      row.y = offsets[k];
      row.closed_form = spatial_covariance_limit(spec, d, row.y);
      row.exact_finite = replica_second_moment(spec, d, t_proxy, row.y) - 1.0;
      row.scale = std::pow(row.y.l2(), d - 2);
    } else {
      row.y = zero;
      row.s = offsets[k][0];
      row.closed_form = temporal_covariance_limit(spec, d, row.s);
      row.exact_finite = replica_temporal_moment(spec, d, row.s, t_proxy - row.s) - 1.0;
      row.scale = std::pow(static_cast<double>(row.s), 0.5 * d - 1.0);
    }
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace polymer
