#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_zeta.h>

#include "polymer/error.hpp"
#include "polymer/evolve.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

namespace {

constexpr int kTailTerms = 4;

double majorant(std::span<const double> a, double p) {
  const int T = int(a.size()) - 1;
  double c = 0;
  for (int t = 1; t <= T; ++t) c = std::max(c, std::pow(double(t), p) * a[t]);
  return c * gsl_sf_hzeta(p, T + 1.0);
}

}  // namespace

GreenResult green_value(int d, const Point& y, double tol, int horizon_budget) {
  if (d < 3) throw DomainError("green_value needs d >= 3");
  if (y.dim() != d) throw DomainError("green_value: point dimension mismatch");
  if (!(tol > 0)) throw DomainError("green_value: tolerance must be positive");
  GreenResult res;
  if (y.l1() & 1) return res;
  const double p = d / 2.0;
  const int start = std::max(512, 8 * (y.l1() * y.l1() / 4 + 1));
  for (int T = start;; T *= 2) {
    const auto q = transition_series(d, y, 2 * T);
    std::vector<double> a(std::size_t(T) + 1);
    CompensatedSum partial;
    for (int t = 0; t <= T; ++t) {
      a[t] = q[2 * t];
      partial.add(a[t]);
    }
    const auto tail = power_tail(a, p, kTailTerms);
    res.partial = partial.value();
    res.value = res.partial + tail.tail;
    res.error = tail.error;
    res.majorant_tail = majorant(a, p);
    res.horizon = 2 * T;
    if (res.error <= tol) return res;
    if (2 * T > horizon_budget) {
      throw ConvergenceError(fmt::format("green_value: tail error {:.3g} above tol {:.3g} at horizon {}",
                                         res.error, tol, 2 * T));
    }
  }
}

namespace {

struct BesselProduct {
  int d;
  int n[kMaxDim];
};

double bessel_integrand(double u, void* params) {
  const auto* bp = static_cast<const BesselProduct*>(params);
  double v = bp->d;
  for (int k = 0; k < bp->d; ++k) v *= gsl_sf_bessel_In_scaled(bp->n[k], u);
  return v;
}

}  // namespace

double green_integral(int d, const Point& y, double tol) {
  if (d < 3) throw DomainError("green_integral needs d >= 3");
  if (y.l1() & 1) return 0.0;
  BesselProduct bp{d, {}};
  for (int k = 0; k < d; ++k) bp.n[k] = std::abs(y[k]);
  gsl_function f{bessel_integrand, &bp};
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(2000);
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  CompensatedSum total;
  const double U = 1e6;
  double lo = 0.0, hi = 1.0;
  int status = 0;
  while (lo < U) {
    double r = 0, err = 0;
    status = gsl_integration_qag(&f, lo, std::min(hi, U), tol * 1e-2, 1e-14, 2000, GSL_INTEG_GAUSS61, ws, &r,
                                 &err);
    if (status && status != GSL_EROUND) break;
    status = 0;
    total.add(r);
    lo = hi;
    hi *= 2;
  }
  gsl_set_error_handler(old);
  gsl_integration_workspace_free(ws);
  if (status) throw ConvergenceError(fmt::format("green_integral: quadrature failed ({})", gsl_strerror(status)));

  // e^{-u} I_n(u) = (2 pi u)^{-1/2} (1 + a/u + b/u^2 + O(u^-3)) with
  // a = -(mu - 1)/8, b = (mu - 1)(mu - 9)/128, mu = 4 n^2.
  double A = 0, B = 0;
  for (int k = 0; k < d; ++k) {
    const double mu = 4.0 * bp.n[k] * bp.n[k];
    const double a = -(mu - 1) / 8.0;
    const double b = (mu - 1) * (mu - 9) / 128.0;
    B += b + A * a;
    A += a;
  }
  const double p = d / 2.0;
  const double tail = d * std::pow(2 * M_PI, -p) *
                      (std::pow(U, 1 - p) / (p - 1) + A * std::pow(U, -p) / p + B * std::pow(U, -p - 1) / (p + 1));
  total.add(tail);
  return total.value();
}

GreenResult alpha_d(int d, double tol, int direct_horizon) {
  if (d < 3) throw DomainError("alpha_d needs d >= 3");
  const double p = d / 2.0;
  for (int H = direct_horizon;; H *= 2) {
    const auto ref = transition_series(d, Point(d), 2 * H);
    std::vector<double> s(std::size_t(H) + 1);
    ParityGrid g[2] = {ParityGrid(d, H, 0), ParityGrid(d, H, 1)};
    g[0].set(Point(d), 1.0);
    s[0] = 1.0;
    CompensatedSum partial;
    for (int t = 1; t <= H; ++t) {
      diffuse_step(g[(t - 1) & 1], g[t & 1], Cone::ball(Point(d), t));
      s[t] = cone_sum_squares(g[t & 1], Cone::ball(Point(d), t));
      if (std::fabs(s[t] - ref[2 * t]) > 1e-14) {
        throw DomainError(fmt::format("alpha_d: sum of squares {} differs from q_{}^0 = {} at t = {}", s[t], 2 * t,
                                      ref[2 * t], t));
      }
      partial.add(s[t]);
    }
    const auto tail = power_tail(s, p, kTailTerms);
    GreenResult res;
    res.partial = partial.value();
    res.value = res.partial + tail.tail;
    res.error = tail.error;
    res.majorant_tail = majorant(s, p);
    res.horizon = H;
    if (res.error <= tol) return res;
    if (H >= 4 * direct_horizon) {
      throw ConvergenceError(fmt::format("alpha_d: tail error {:.3g} above tol {:.3g} at horizon {}", res.error,
                                         tol, H));
    }
  }
}

}  // namespace polymer
