#include <cmath>

#include "doctest.h"
#include "polymer/error.hpp"
#include "polymer/evolve.hpp"
#include "polymer/lattice.hpp"

using namespace polymer;

TEST_CASE("point arithmetic and norms") {
  const Point a{1, -2, 3}, b{0, 1, 1};
  CHECK((a + b) == Point{1, -1, 4});
  CHECK((a - b) == Point{1, -3, 2});
  CHECK((-a) == Point{-1, 2, -3});
  CHECK(a.l1() == 6);
  CHECK(a.l2() == doctest::Approx(std::sqrt(14.0)));
  CHECK(Point::axis(3, 4, 2) == Point{0, 0, 4});
  CHECK(a.parity() == 0);
  CHECK(b.str() == "(0,1,1)");
}

TEST_CASE("compensated sum keeps small terms") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-17);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-14).epsilon(1e-6));
}

TEST_CASE("cone membership is L1 distance to the box") {
  const Cone c{Point{0, 0, 0}, Point{2, 0, 0}, 1};
  CHECK(c.contains(Point{3, 0, 0}));
  CHECK(c.contains(Point{1, 1, 0}));
  CHECK_FALSE(c.contains(Point{3, 1, 0}));
  CHECK_FALSE(c.contains(Point{-1, 0, 1}));
  CHECK(c.grown().contains(Point{3, 1, 0}));
  CHECK_FALSE(c.shrunk().contains(Point{1, 1, 0}));
}

TEST_CASE("parity grid stores exactly one parity class") {
  for (int d : {1, 2, 3, 4}) {
    for (int P : {0, 1}) {
      ParityGrid g(d, 3, P);
      int stored = 0;
      g.for_each([&](const Point& u, double v) {
        CHECK(u.parity() == P);
        CHECK(v == 0.0);
        ++stored;
      });
      const int side = 7;
      const int cells = int(std::pow(side, d));
      // [-3, 3] has 3 even and 4 odd coordinates: even - odd cells = (-1)^d
      const int excess = (d & 1) ? -1 : 1;
      CHECK(stored == (cells + (P == 0 ? excess : -excess)) / 2);
      // every stored cell is addressable and distinct
      double k = 1;
      g.for_each([&](const Point& u, double) { g.set(u, k++); });
      k = 1;
      g.for_each([&](const Point& u, double) { CHECK(g.value(u) == k++); });
      CHECK(g.sum() == doctest::Approx(stored * (stored + 1) / 2.0));
      Point wrong(d);
      wrong[0] = 1 - P;
      CHECK(g.value(wrong) == 0.0);
      CHECK_THROWS_AS(g.set(wrong, 1.0), DomainError);
      CHECK(g.value(Point::axis(d, 4)) == 0.0);
    }
  }
}

TEST_CASE("memory budget rejects oversized grids") {
  const auto old = memory_budget();
  set_memory_budget(1 << 20);
  CHECK_THROWS_AS(ParityGrid(3, 200, 0), ResourceError);
  set_memory_budget(old);
}

namespace {

double brute(const ParityGrid& prev, const Point& u) {
  double s = 0;
  const int d = prev.dim();
  for (int k = 0; k < d; ++k) {
    for (int sgn : {-1, 1}) {
      Point v = u;
      v[k] -= sgn;
      s += prev.value(v);
    }
  }
  return s / (2.0 * d);
}

}  // namespace

TEST_CASE("diffusion step matches the brute-force average inside the cone") {
  for (int d : {1, 2, 3, 4}) {
    const int R = 5;
    ParityGrid prev(d, R, 0), next(d, R, 1);
    double k = 0.1;
    prev.for_each([&](const Point& u, double) {
      if (u.l1() <= 3) prev.set(u, k += 0.37);
    });
    const Cone cone = Cone::ball(Point(d), 4);
    next.for_each([&](const Point& u, double) { next.set(u, -7.0); });
    diffuse_step(prev, next, cone);
    next.for_each([&](const Point& u, double v) {
      if (cone.contains(u)) {
        CHECK(v == doctest::Approx(brute(prev, u)).epsilon(1e-15));
      } else {
        CHECK(v == -7.0);  // untouched
      }
    });
    CHECK(cone_sum(next, cone) == doctest::Approx(prev.sum()));
  }
}

TEST_CASE("a box cone is clipped to the cube") {
  const int d = 3, R = 4;
  ParityGrid prev(d, R, 1), next(d, R, 0);
  prev.for_each([&](const Point& u, double) { prev.set(u, 1.0); });
  const Cone cone{Point{-3, -3, -3}, Point{3, 3, 3}, 3};
  diffuse_step(prev, next, cone);
  next.for_each([&](const Point& u, double v) { CHECK(v == doctest::Approx(brute(prev, u))); });
  clear_outside(next, Cone::ball(Point(d), 2));
  next.for_each([&](const Point& u, double v) {
    if (u.l1() > 2) CHECK(v == 0.0);
  });
  CHECK(cone_sum_squares(next, Cone::ball(Point(d), 2)) == doctest::Approx(next.sum_squares()));
}
