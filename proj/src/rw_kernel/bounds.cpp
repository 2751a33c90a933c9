#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "polymer/error.hpp"
#include "polymer/evolve.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

double lclt_lower_bound(int t, const Point& y, double sigma_tilde, double c1, double c2) {
  if (t < 1) throw DomainError("lclt_lower_bound needs t >= 1");
  if (!(c1 > 0) || c2 < 0) throw DomainError("lclt_lower_bound needs c1 > 0 and c2 >= 0");
  if (!(sigma_tilde > 0.75 && sigma_tilde < 1)) throw DomainError("sigma_tilde must lie in (3/4, 1)");
  const int d = y.dim();
  const double y2 = y.l2() * y.l2();
  return c1 * std::pow(d / (2 * M_PI * t), d / 2.0) * std::exp(-d * y2 / (2.0 * t)) *
         std::exp(-c2 * std::pow(double(t), 4 * sigma_tilde - 3));
}

namespace {

// Minimum over parity-valid |y|_2 <= t^{0.8} of ln q_t^y - ln Gauss(t, y).
// Cells come from a grid evolution clipped to the cube of radius R; the
// clipping only removes paths that leave the cube.
double log_margin(const ParityGrid& g, int t) {
  const int d = g.dim();
  const double rmax = std::pow(double(t), 0.8);
  double worst = INFINITY;
  const double lg = (d / 2.0) * std::log(d / (2 * M_PI * t));
  g.for_each([&](const Point& y, double q) {
    if (y.l1() > t || y.l2() > rmax) return;
    const double y2 = y.l2() * y.l2();
    const double m = (q > 0 ? std::log(q) : -INFINITY) - (lg - d * y2 / (2.0 * t));
    worst = std::min(worst, m);
  });
  return worst;
}

}  // namespace

LcltFit lclt_fit_and_check(int d, double sigma_tilde, int fit_lo, int fit_hi, int check_hi) {
  if (!(1 <= fit_lo && fit_lo < fit_hi && fit_hi <= check_hi)) throw DomainError("lclt fit: bad ranges");
  const int R = std::min(check_hi, int(std::ceil(std::pow(double(check_hi), 0.8) * std::sqrt(double(d)))) + 10);
  ParityGrid g[2] = {ParityGrid(d, R, 0), ParityGrid(d, R, 1)};
  g[0].set(Point(d), 1.0);
  const double ex = 4 * sigma_tilde - 3;
  std::vector<double> xs, ms;
  LcltFit fit;
  for (int t = 1; t <= check_hi; ++t) {
    diffuse_step(g[(t - 1) & 1], g[t & 1], Cone::ball(Point(d), t));
    if (t < fit_lo) continue;
    if (t == fit_hi + 1) {
      // Line a - c2 x below every fitted point, x = t^{4 sigma_tilde - 3}:
      // slope from the end points, offset from the lowest point.
      const double c2 = std::max(0.0, (ms.front() - ms.back()) / (xs.back() - xs.front()));
      double a = INFINITY;
      for (std::size_t i = 0; i < xs.size(); ++i) a = std::min(a, ms[i] + c2 * xs[i]);
      fit.c1 = std::exp(a);
      fit.c2 = c2;
      fit.worst_log_margin = INFINITY;
    }
    const double m = log_margin(g[t & 1], t);
    const double x = std::pow(double(t), ex);
    if (t <= fit_hi) {
      xs.push_back(x);
      ms.push_back(m);
      continue;
    }
    // Held-out comparison, pair by pair.
    const double rmax = std::pow(double(t), 0.8);
    g[t & 1].for_each([&](const Point& y, double q) {
      if (y.l1() > t || y.l2() > rmax) return;
      const double b = lclt_lower_bound(t, y, sigma_tilde, fit.c1, fit.c2);
      ++fit.checked;
      if (b > q) ++fit.violations;
      fit.worst_log_margin = std::min(fit.worst_log_margin, std::log(q) - std::log(b));
    });
  }
  return fit;
}

double ratio_bound_argument(int t, int t2, const Point& z, const Point& z2) {
  const double dt = std::abs(t - t2);
  return z.l2() / t * ((z - z2).l2() + dt) + std::log(double(t)) * dt / t;
}

RatioReport ratio_bound_report(const KernelTable& table, int t, int t2, const Point& z, const Point& z2,
                               double c, double correction) {
  const double q = table.q(t, z);
  if (q == 0.0) throw DomainError(fmt::format("ratio_bound_report: q_{}^{} = 0", t, z.str()));
  RatioReport r;
  r.ratio = table.q(t2, z2) / q;
  r.bound = (1 + correction) * std::exp(c * ratio_bound_argument(t, t2, z, z2));
  r.holds = r.ratio <= r.bound;
  return r;
}

double lin_func_ratio(const KernelTable& table, int t, std::span<const double> phi) {
  const int d = table.dim();
  double mx = 0;
  CompensatedSum total;
  table.for_each(t, [&](const Point& y, double q) {
    if (q == 0.0) return;
    double e = 0;
    for (int k = 0; k < d; ++k) e += phi[k] * y[k];
    const double v = q * std::exp(e);
    mx = std::max(mx, v);
    total.add(v);
  });
  return std::pow(double(t), d / 2.0) * mx / total.value();
}

double composition_constant(int d) {
  if (d < 3) throw DomainError("composition constant needs d >= 3");
  return std::pow(2.0, d) * std::max(std::riemann_zeta(d / 2.0), 1.0 / (d / 2.0 - 1.0));
}

CompositionBound composition_sum(int t, int l, double M, int d) {
  if (t < 1 || l < 0 || !(M > 0) || d < 3) throw DomainError("composition_sum: need t >= 1, l >= 0, M > 0, d >= 3");
  CompositionBound cb{t, l, d, M, 0, 0, composition_constant(d)};
  const int m = std::max(1, int(std::ceil(M)));
  const double p = d / 2.0;
  // S_j(n): sum over compositions of n into j + 1 parts, each >= m.
  std::vector<long double> pw(std::size_t(t) + 1, 0.0L), cur(std::size_t(t) + 1, 0.0L);
  for (int n = 1; n <= t; ++n) pw[n] = std::pow(double(n), -p);
  for (int n = m; n <= t; ++n) cur[n] = pw[n];
  for (int j = 1; j <= l; ++j) {
    std::vector<long double> next(std::size_t(t) + 1, 0.0L);
    for (int n = 0; n <= t; ++n) {
      long double s = 0;
      for (int a = m; a <= n - m; ++a) s += cur[n - a] * pw[a];
      next[n] = s;
    }
    cur.swap(next);
  }
  cb.lhs = double(cur[t]);
  cb.rhs = std::pow(cb.c, l) * std::pow(M, -l * (p - 1)) * std::pow(double(t), -p);
  if (cb.lhs < 0 || cb.lhs > cb.rhs) {
    throw DomainError(fmt::format("composition_sum: lhs {} exceeds rhs {} at t={} l={} M={} d={}", cb.lhs, cb.rhs, t,
                                  l, M, d));
  }
  return cb;
}

}  // namespace polymer
