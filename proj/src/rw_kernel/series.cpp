#include <cmath>
#include <cstdlib>

#include <gsl/gsl_sf_zeta.h>

#include "polymer/error.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

namespace {

std::vector<long double> log_factorials(int n) {
  std::vector<long double> lf(std::size_t(n) + 1, 0.0L);
  for (int i = 1; i <= n; ++i) lf[i] = lf[i - 1] + std::log((long double)i);
  return lf;
}

// One-dimensional walk: P(S_n = y).
long double log_p1(const std::vector<long double>& lf, int n, int y) {
  y = std::abs(y);
  if (y > n || ((n - y) & 1)) return -INFINITY;
  return lf[n] - lf[(n + y) / 2] - lf[(n - y) / 2] - n * std::log(2.0L);
}

}  // namespace

std::vector<double> transition_series(int d, const Point& y, int n_max) {
  if (d < 1 || d > kMaxDim || y.dim() != d) throw DomainError("transition_series: bad dimension");
  if (n_max < 0) throw DomainError("transition_series: negative horizon");
  const auto lf = log_factorials(n_max);
  const std::size_t N = std::size_t(n_max) + 1;

  // Levels 1 and 2 in closed form; the planar walk is a pair of independent
  // one-dimensional walks in the rotated coordinates (y1 + y2, y1 - y2).
  std::vector<long double> cur(N, 0.0L);
  int level;
  if (d == 1) {
    for (int n = 0; n <= n_max; ++n) cur[n] = std::exp(log_p1(lf, n, y[0]));
    level = 1;
  } else {
    for (int n = 0; n <= n_max; ++n) {
      cur[n] = std::exp(log_p1(lf, n, y[0] + y[1]) + log_p1(lf, n, y[0] - y[1]));
    }
    level = 2;
  }
  for (int k = level + 1; k <= d; ++k) {
    // Each step moves along axis k with probability 1/k given the first k axes.
    const long double lp = std::log(1.0L / k), lq = std::log1p(-1.0L / k);
    std::vector<long double> lp1(N);
    for (int m = 0; m <= n_max; ++m) lp1[m] = log_p1(lf, m, y[k - 1]);
    std::vector<long double> next(N, 0.0L);
    const int yk = std::abs(y[k - 1]);
    for (int n = 0; n <= n_max; ++n) {
      long double acc = 0.0L;
      for (int m = yk; m <= n; m += 2) {
        const long double rest = cur[n - m];
        if (rest == 0.0L) continue;
        acc += std::exp(lf[n] - lf[m] - lf[n - m] + m * lp + (n - m) * lq + lp1[m]) * rest;
      }
      next[n] = acc;
    }
    cur.swap(next);
  }
  return {cur.begin(), cur.end()};
}

namespace {

// Solves the small dense system A x = b in place (partial pivoting).
std::vector<long double> solve_small(std::vector<std::vector<long double>> A, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(A[r][c]) > std::fabs(A[p][c])) p = r;
    }
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

double fitted_tail(std::span<const double> a, double p, int terms) {
  const int T = int(a.size()) - 1;
  std::vector<std::vector<long double>> A(terms, std::vector<long double>(terms));
  std::vector<long double> b(terms);
  for (int j = 0; j < terms; ++j) {
    const int t = T >> j;
    for (int k = 0; k < terms; ++k) A[j][k] = std::pow((long double)t, -(long double)k);
    b[j] = a[t] * std::pow((long double)t, (long double)p);
  }
  const auto c = solve_small(A, b);
  long double tail = 0;
  for (int k = 0; k < terms; ++k) tail += c[k] * gsl_sf_hzeta(p + k, T + 1.0);
  return double(tail);
}

}  // namespace

TailEstimate power_tail(std::span<const double> a, double p, int terms) {
  if (terms < 2) throw DomainError("power_tail needs at least two terms");
  if (p <= 1) throw DomainError("power_tail needs a summable power");
  const int T = int(a.size()) - 1;
  if ((T >> (terms - 1)) < 2) throw DomainError("power_tail: horizon too short for the fit");
  const double hi = fitted_tail(a, p, terms);
  const double lo = fitted_tail(a, p, terms - 1);
  return {hi, std::fabs(hi - lo)};
}

}  // namespace polymer
