#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "polymer/error.hpp"
#include "polymer/rw_kernel.hpp"

using namespace polymer;

namespace {

const KernelTable& table3() {
  static const KernelTable t(3, 40);
  return t;
}

// Walk enumeration for small t.
double enumerate_q(int d, int t, const Point& z) {
  const int moves = 2 * d;
  long long total = 0, hits = 0;
  std::vector<int> path(t, 0);
  for (;;) {
    Point p(d);
    for (int m : path) p[m / 2] += (m % 2) ? 1 : -1;
    ++total;
    hits += p == z;
    int i = 0;
    while (i < t && path[i] == moves - 1) path[i++] = 0;
    if (i == t) break;
    ++path[i];
  }
  return double(hits) / double(total);
}

}  // namespace

TEST_CASE("kernel values") {
  const auto& k = table3();
  CHECK(k.q(0, Point{0, 0, 0}) == 1.0);
  CHECK(k.q(1, Point{1, 0, 0}) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(k.q(2, Point{1, 1, 0}) == doctest::Approx(1.0 / 18).epsilon(1e-15));
  CHECK(k.q(2, Point{0, 0, 0}) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  for (int t = 0; t <= 4; ++t) {
    for (const Point& z : {Point{0, 0, 0}, Point{1, 0, 0}, Point{2, -1, 1}, Point{0, 2, 0}, Point{1, 1, 1}}) {
      CHECK(k.q(t, z) == doctest::Approx(enumerate_q(3, t, z)).epsilon(1e-14));
    }
  }
  CHECK(k.q(3, Point{2, 0, 0}) == 0.0);
  CHECK(k.q(3, Point{5, 0, 0}) == 0.0);
  CHECK(k.q(3, Point{2, 0, 2}) == 0.0);
  CHECK_THROWS_AS(k.q(41, Point{0, 0, 0}), DomainError);
}

TEST_CASE("kernel table invariants") {
  const auto& k = table3();
  for (int t = 0; t <= 40; ++t) {
    CHECK(std::fabs(k.sum(t) - 1.0) <= 1e-12);
    k.for_each(t, [&](const Point& z, double q) {
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      if (((z.l1() + t) & 1) || z.l1() > t) CHECK(q == 0.0);
    });
  }
  for (int t = 0; t <= 20; ++t) CHECK(std::fabs(k.sum_squares(t) - k.q(2 * t, Point{0, 0, 0})) <= 1e-14);
  // permutation and sign symmetry, exact
  for (int t : {7, 20, 33}) {
    k.for_each(t, [&](const Point& z, double q) {
      const Point perm{z[2], z[0], z[1]};
      const Point flip{-z[0], z[1], -z[2]};
      CHECK(k.q(t, perm) == q);
      CHECK(k.q(t, flip) == q);
    });
  }
}

TEST_CASE("kernel tables in other dimensions") {
  for (int d : {1, 2, 4, 5}) {
    const KernelTable k(d, d <= 2 ? 30 : 10);
    for (int t = 0; t <= k.t_max(); ++t) CHECK(std::fabs(k.sum(t) - 1.0) <= 1e-12);
    CHECK(k.q(1, Point::axis(d, 1, d - 1)) == doctest::Approx(1.0 / (2 * d)));
  }
  const KernelTable one(1, 10);
  CHECK(one.q(10, Point{0}) == doctest::Approx(252.0 / 1024).epsilon(1e-15));
}

TEST_CASE("binary cache round trip and header checks") {
  const KernelTable k(3, 12);
  std::stringstream ss;
  k.save(ss);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "PLKT");
  const KernelTable back = KernelTable::load(ss);
  CHECK(back.t_max() == 12);
  for (int t = 0; t <= 12; ++t) {
    const auto a = k.block(t), b = back.block(t);
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  std::string bad = bytes;
  bad[4] = 9;  // layout version
  std::stringstream bs(bad);
  CHECK_THROWS(KernelTable::load(bs));
  std::stringstream trunc(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS(KernelTable::load(trunc));
}

TEST_CASE("kernel CSV export lists nonzero cells") {
  const KernelTable k(3, 2);
  std::ostringstream os;
  k.write_csv(os, 1, 1);
  const std::string s = os.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 6);
}

TEST_CASE("series route matches the grid") {
  const auto& k = table3();
  for (const Point& y : {Point{0, 0, 0}, Point{3, 1, 0}, Point{2, 2, 2}, Point{-5, 0, 1}}) {
    const auto s = transition_series(3, y, 40);
    for (int t = 0; t <= 40; ++t) CHECK(s[t] == doctest::Approx(k.q(t, y)).epsilon(1e-13).scale(1e-300));
  }
  const auto s2 = transition_series(2, Point{1, 1}, 12);
  const KernelTable k2(2, 12);
  for (int t = 0; t <= 12; ++t) CHECK(s2[t] == doctest::Approx(k2.q(t, Point{1, 1})).epsilon(1e-13));
}

TEST_CASE("power tail extrapolation") {
  // a_t = t^{-3/2} (1 + 1/t) exactly; tail known through Hurwitz zeta.
  const int T = 256;
  std::vector<double> a(T + 1, 0.0);
  for (int t = 1; t <= T; ++t) a[t] = std::pow(t, -1.5) * (1 + 1.0 / t);
  const auto tail = power_tail(a, 1.5, 4);
  double ref = 0;
  for (long t = T + 1; t < 20000000; ++t) ref += std::pow(double(t), -1.5) * (1 + 1.0 / t);
  ref += 2.0 / std::sqrt(20000000.0 - 0.5);  // integral remainder of t^{-3/2}
  CHECK(tail.tail == doctest::Approx(ref).epsilon(1e-7));
  CHECK(tail.error < 1e-10);
  CHECK_THROWS_AS(power_tail(a, 1.0, 4), DomainError);
}

TEST_CASE("Green function and alpha_3") {
  const double watson = 1.5163860591519780;  // G_3(0), closed form via complete elliptic integrals
  const auto g = green_value(3, Point{0, 0, 0}, 1e-10);
  CHECK(g.value == doctest::Approx(watson).epsilon(1e-11));
  CHECK(green_integral(3, Point{0, 0, 0}) == doctest::Approx(watson).epsilon(1e-13));
  CHECK(g.partial >= 1.0 + 1.0 / 6);
  CHECK(green_value(3, Point{1, 0, 0}, 1e-9).value == 0.0);
  CHECK(green_integral(3, Point{2, 1, 0}) == 0.0);
  for (const Point& y : {Point{2, 0, 0}, Point{1, 1, 0}, Point{2, 2, 0}}) {
    CHECK(green_value(3, y, 1e-9).value == doctest::Approx(green_integral(3, y)).epsilon(1e-8));
  }
  const auto a = alpha_d(3, 1e-9, 192);
  CHECK(a.value == doctest::Approx(watson - 1).epsilon(1e-9));
  CHECK(a.partial >= 1.0 / 6);
  const auto a4 = alpha_d(4, 1.0, 32);
  CHECK(std::fabs(a4.value - (green_integral(4, Point(4)) - 1)) <= a4.error);
  CHECK_THROWS_AS(green_value(2, Point(2), 1e-6), DomainError);
}

TEST_CASE("lclt bound formula") {
  const Point z{0, 0, 0};
  CHECK(lclt_lower_bound(10, z, 0.85, 1, 0) == doctest::Approx(std::pow(3 / (20 * M_PI), 1.5)));
  double prev = 1;
  for (int r = 0; r < 6; ++r) {
    const double b = lclt_lower_bound(50, Point{r, 0, 0}, 0.85, 0.7, 0.1);
    CHECK(b < prev);
    prev = b;
  }
  CHECK_THROWS_AS(lclt_lower_bound(10, z, 0.7, 1, 0), DomainError);
  CHECK_THROWS_AS(lclt_lower_bound(0, z, 0.85, 1, 0), DomainError);
}

TEST_CASE("lclt fit on a short range holds on the held-out range") {
  const auto f = lclt_fit_and_check(3, 0.85, 20, 40, 60);
  CHECK(f.c1 > 0);
  CHECK(f.c2 >= 0);
  CHECK(f.checked > 0);
  CHECK(f.violations == 0);
}

TEST_CASE("tilt solver") {
  const auto s0 = tilt_solve(Point{0, 0, 0}, 10);
  CHECK(s0.residual == 0.0);
  for (double p : s0.phi) CHECK(p == 0.0);

  // scalar bisection on sinh(a) / (cosh(a) + 2) = 0.1
  double lo = 0, hi = 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::sinh(mid) / (std::cosh(mid) + 2) < 0.1 ? lo : hi) = mid;
  }
  const auto s = tilt_solve(Point{2, 0, 0}, 20);
  CHECK(s.phi[0] == doctest::Approx(lo).epsilon(1e-12));
  CHECK(std::fabs(s.phi[1]) < 1e-14);
  CHECK(std::fabs(s.phi[2]) < 1e-14);
  CHECK(s.residual <= 1e-12);

  const auto a = tilt_solve(Point{3, -1, 2}, 17), b = tilt_solve(Point{-3, 1, -2}, 17);
  for (int k = 0; k < 3; ++k) CHECK(a.phi[k] == doctest::Approx(-b.phi[k]).epsilon(1e-14));
  const auto f = tilt_map(a.phi);
  CHECK(f[0] == doctest::Approx(3.0 / 17).epsilon(1e-12));
  CHECK_THROWS_AS(tilt_solve(Point{19, 0, 0}, 20), DomainError);

  // continuity in z / t: adjacent z move phi by O(1 / t)
  const int t = 40;
  double worst = 0;
  for (int x = -6; x < 6; ++x) {
    const auto p = tilt_solve(Point{x, 1, 0}, t), q = tilt_solve(Point{x + 1, 1, 0}, t);
    double dn = 0;
    for (int k = 0; k < 3; ++k) dn += (p.phi[k] - q.phi[k]) * (p.phi[k] - q.phi[k]);
    worst = std::max(worst, std::sqrt(dn));
  }
  CHECK(worst * t < 4.0);
}

TEST_CASE("tilt calibration constants") {
  const auto c = calibrate_tilt(3, 500);
  CHECK(c.rho1 > 0);
  CHECK(c.rho2 > 0);
  // |z| <= rho1 t implies |phi| <= 1 and |phi| <= rho2 |z| / t on fresh points
  for (const Point& z : {Point{3, 1, 0}, Point{-2, 2, 1}, Point{0, 0, 4}}) {
    const int t = int(std::ceil(z.l2() / c.rho1)) + 1;
    const auto s = tilt_solve(z, t);
    double n = 0;
    for (double p : s.phi) n += p * p;
    CHECK(std::sqrt(n) <= 1.0);
    CHECK(std::sqrt(n) <= c.rho2 * z.l2() / t * (1 + 1e-9));
  }
}

TEST_CASE("tilted mass") {
  const auto& k = table3();
  const std::vector<double> zero = {0, 0, 0};
  CHECK(tilted_mass(zero, 17).closed == 1.0);
  const std::vector<double> a = {0.7, 0, 0};
  CHECK(tilted_mass(a, 12).closed == doctest::Approx(std::pow((std::cosh(0.7) + 2) / 3, 12)).epsilon(1e-14));
  const std::vector<double> r = {0.4, -0.5, 0.6};
  const auto m = tilted_mass(r, 12, &k);
  CHECK(m.rel_diff <= 1e-10);
  CHECK(std::isnan(tilted_mass(r, 12).lattice));
}

TEST_CASE("Fourier identity is exact") {
  const auto& k = table3();
  const std::vector<double> zero = {0, 0, 0};
  const auto c0 = fourier_identity_check(Point{0, 0, 0}, 0, zero, k);
  CHECK(c0.lhs == 1.0);
  CHECK(c0.rhs == doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<double> phi = {0.3, -0.8, 0.1};
  for (int t : {1, 5, 12}) {
    for (const Point& z : {Point{1, 0, 0}, Point{-1, 2, 2}, Point{3, -3, 1}}) {
      if ((z.l1() + t) & 1 || z.l1() > t) continue;
      const auto c = fourier_identity_check(z, t, phi, k);
      CHECK(std::fabs(c.lhs - c.rhs) <= 1e-10);
      CHECK(std::fabs(c.rhs_imag) <= 1e-10);
    }
  }
}

TEST_CASE("ratio bound sweep with a fitted constant") {
  const KernelTable k(3, 68);
  const auto same = ratio_bound_report(k, 20, 20, Point{2, 0, 0}, Point{2, 0, 0}, 0.0, 0.0);
  CHECK(same.ratio == 1.0);
  CHECK(same.holds);
  CHECK_THROWS_AS(ratio_bound_report(k, 20, 20, Point{1, 0, 0}, Point{1, 0, 0}, 1, 0), DomainError);
  // Fit c on the sweep around t = 60, z = (4, 2, 0), correction 0.1; then
  // the bound must hold everywhere on it.
  const int t = 60;
  const Point z{4, 2, 0};
  const double corr = 0.1;
  double c = 0;
  std::vector<std::pair<int, Point>> sweep;
  for (int dt = -8; dt <= 8; ++dt) {
    for (int a = -4; a <= 4; ++a) {
      for (int b = -4; b <= 4; ++b) {
        const Point z2{z[0] + a, z[1] + b, z[2] + ((a + b + dt) & 1)};
        if ((z2 - z).l2() > 8) continue;
        const double r = k.q(t + dt, z2) / k.q(t, z);
        const double arg = ratio_bound_argument(t, t + dt, z, z2);
        if (arg > 0 && r > 1 + corr) c = std::max(c, std::log(r / (1 + corr)) / arg);
        sweep.emplace_back(t + dt, z2);
      }
    }
  }
  CHECK(std::isfinite(c));
  c *= 1 + 1e-12;  // the maximizer itself sits on the bound
  for (const auto& [t2, z2] : sweep) CHECK(ratio_bound_report(k, t, t2, z, z2, c, corr).holds);
}

TEST_CASE("linear functional ratio stays bounded in t") {
  const KernelTable k(3, 64);
  const std::vector<std::vector<double>> phis = {{0, 0, 0}, {0.5, 0, 0}, {0.3, -0.4, 0.2}, {-0.6, 0.6, 0.5}};
  double early = 0, late = 0;
  for (const auto& phi : phis) {
    for (int t = 8; t <= 32; ++t) early = std::max(early, lin_func_ratio(k, t, phi));
    for (int t = 33; t <= 64; ++t) late = std::max(late, lin_func_ratio(k, t, phi));
  }
  CHECK(late <= 1.1 * early);
}

TEST_CASE("composition sums") {
  CHECK(composition_sum(4, 1, 1, 4).lhs == doctest::Approx(41.0 / 144).epsilon(1e-15));
  for (int t = 1; t <= 30; ++t) CHECK(composition_sum(t, 0, 1, 3).lhs == std::pow(double(t), -1.5));
  CHECK(composition_sum(5, 2, 2, 3).lhs == 0.0);  // t < M (l + 1)
  CHECK(composition_constant(3) == doctest::Approx(8 * std::riemann_zeta(1.5)));
  CHECK(composition_constant(4) == doctest::Approx(16 * std::riemann_zeta(2.0)));
  const auto b = composition_sum(40, 3, 2, 5);
  CHECK(b.lhs <= b.rhs);
  CHECK_THROWS_AS(composition_sum(0, 1, 1, 3), DomainError);
}
