#include <cmath>
#include <random>

#include "doctest.h"
#include "polymer/error.hpp"
#include "polymer/experiments.hpp"
#include "polymer/partition.hpp"
#include "polymer/rw_kernel.hpp"

using namespace polymer;

TEST_CASE("rate fit recovers an exact power law") {
  std::vector<std::pair<double, double>> pts;
  for (double t : {4.0, 8.0, 16.0, 32.0}) pts.emplace_back(t, 3.0 * std::pow(t, -0.7));
  const auto f = rate_fit(pts);
  CHECK(f.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.half_width < 1e-10);
  CHECK(f.excludes_zero());

  std::vector<std::pair<double, double>> flat = {{1, 2}, {2, 2}, {4, 2}};
  const auto g = rate_fit(flat);
  CHECK(std::fabs(g.slope) < 1e-14);
  CHECK(!g.excludes_zero());

  CHECK_THROWS_AS(rate_fit({{1, 1}, {2, 1}}), DomainError);
  CHECK_THROWS_AS(rate_fit({{1, 1}, {2, 0}, {3, 1}}), DomainError);
  CHECK_THROWS_AS(rate_fit({{2, 1}, {2, 3}, {2, 1}}), DomainError);
}

TEST_CASE("rate fit interval covers the true slope at the nominal rate") {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> noise(0.0, 0.1);
  int covered = 0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    std::vector<std::pair<double, double>> pts;
    for (double t : {2.0, 4.0, 8.0, 16.0, 32.0}) pts.emplace_back(t, std::exp(-0.5 * std::log(t) + noise(rng)));
    const auto f = rate_fit(pts);
    covered += std::fabs(f.slope + 0.5) <= f.half_width;
  }
  // 95% nominal; binomial sd about 0.5%
  CHECK(covered >= int(0.93 * trials));
  CHECK(covered <= int(0.97 * trials));
}

TEST_CASE("Monte Carlo runner") {
  const auto one = mc_expectation("one", [](std::uint64_t) { return 1.0; }, 50, 7, 3);
  CHECK(one.n == 50);
  CHECK(one.mean == 1.0);
  CHECK(one.stderr_ == 0.0);
  CHECK_THROWS_AS(mc_expectation("x", [](std::uint64_t) { return 1.0; }, 1, 0, 1), DomainError);

  const auto f = [](std::uint64_t seed) {
    std::mt19937_64 r(seed);
    return std::vector<double>{std::uniform_real_distribution<double>()(r), double(seed)};
  };
  const auto a = McSamples::run(f, 101, 40, 1);
  const auto b = McSamples::run(f, 101, 40, 4);
  CHECK(a.complete());
  CHECK(a.width() == 2);
  for (std::size_t i = 0; i < 101; ++i) {
    CHECK(a.at(i, 1) == double(40 + i));
    CHECK(a.at(i, 0) == b.at(i, 0));
  }
  CHECK(a.stat(0).first == b.stat(0).first);
  CHECK(a.stat(0).second == b.stat(0).second);
  CHECK(a.stat([](const double* r) { return r[1]; }).first == doctest::Approx(90.0));

  const auto bad = [](std::uint64_t seed) -> std::vector<double> {
    if (seed == 5) throw DomainError("boom");
    return {0.0};
  };
  CHECK_THROWS_AS(McSamples::run(bad, 10, 0, 2), DomainError);
}

TEST_CASE("covariance limits") {
  const DisorderSpec spec = DisorderSpec::rademacher(0.3, 0);
  CHECK(spatial_covariance_limit(spec, 3, Point{1, 0, 0}) == 0.0);
  CHECK(temporal_covariance_limit(spec, 3, 3) == 0.0);
  CHECK(temporal_covariance_limit(spec, 3, 0) ==
        doctest::Approx(spatial_covariance_limit(spec, 3, Point{0, 0, 0})).epsilon(1e-14));
  const double lam = lambda_of(spec);
  const double alpha = green_integral(3, Point{0, 0, 0}) - 1;
  const double factor = lam / (1 - alpha * lam);
  // sum over even n >= s of q_n^0 = G(0) - q_0 - q_2 at s = 4
  const auto q = transition_series(3, Point{0, 0, 0}, 2);
  CHECK(temporal_covariance_limit(spec, 3, 4) ==
        doctest::Approx((green_integral(3, Point{0, 0, 0}) - q[0] - q[2]) * factor).epsilon(1e-8));
  CHECK(spatial_covariance_limit(spec, 3, Point{2, 2, 0}) ==
        doctest::Approx(green_integral(3, Point{2, 2, 0}) * factor).epsilon(1e-8));
  CHECK_THROWS_AS(temporal_covariance_limit(spec, 3, -2), DomainError);
}

TEST_CASE("factorization grid") {
  const auto g = factorization_grid(3, 16, 0.8);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == Point{0, 0, 0});
  CHECK(g[1] == Point{4, 0, 0});
  CHECK(g[2] == Point{8, 0, 0});  // floor(16^0.8) = 9, moved to parity
  for (const auto& y : factorization_grid(3, 15, 0.8)) CHECK(((y.l1() + 15) & 1) == 0);
}

TEST_CASE("zero disorder scans vanish") {
  const DisorderSpec spec = DisorderSpec::rademacher(0.0, 3);
  const ScaleParams p;
  const auto fr = factorization_scan(spec, 3, p, {4, 6, 8}, 4, 1);
  for (const auto& r : fr.rows) CHECK(std::fabs(r.mean) <= 1e-13);
  const auto cr = correlation_scan(spec, 3, CorrelationMode::kSpatial, {Point{0, 0, 0}, Point{2, 0, 0}}, 6, 4, 1);
  for (const auto& r : cr.rows) {
    CHECK(std::fabs(r.mc) <= 1e-13);
    CHECK(r.closed_form == 0.0);
  }
}

TEST_CASE("scans do not depend on the worker count") {
  const DisorderSpec spec = DisorderSpec::rademacher(0.3, 17);
  const std::vector<Point> offs = {Point{0, 0, 0}, Point{1, 0, 0}, Point{2, 0, 0}};
  const auto a = correlation_scan(spec, 3, CorrelationMode::kSpatial, offs, 8, 40, 1);
  const auto b = correlation_scan(spec, 3, CorrelationMode::kSpatial, offs, 8, 40, 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].mc == b.rows[i].mc);
    CHECK(a.rows[i].stderr_ == b.rows[i].stderr_);
  }
  CHECK(a.rows[1].closed_form == 0.0);
  CHECK(a.rows[0].exact_finite == doctest::Approx(replica_second_moment(spec, 3, 8) - 1).epsilon(1e-15));

  const std::vector<Point> svals = {Point{0, 0, 0}, Point{2, 0, 0}};
  const auto t1 = correlation_scan(spec, 3, CorrelationMode::kTemporal, svals, 8, 30, 1);
  const auto t2 = correlation_scan(spec, 3, CorrelationMode::kTemporal, svals, 8, 30, 2);
  for (std::size_t i = 0; i < t1.rows.size(); ++i) CHECK(t1.rows[i].mc == t2.rows[i].mc);
  CHECK_THROWS_AS(correlation_scan(spec, 3, CorrelationMode::kTemporal, {Point{1, 0, 0}}, 8, 30, 1), DomainError);

  const auto c1 = convergence_rate_scan(spec, 3, {2, 4, 8}, 16, 30, 1);
  const auto c2 = convergence_rate_scan(spec, 3, {2, 4, 8}, 16, 30, 2);
  for (std::size_t i = 0; i < c1.rows.size(); ++i) {
    CHECK(c1.rows[i].mean == c2.rows[i].mean);
    CHECK(c1.rows[i].reference > 0);
  }
  CHECK(c1.exact_positive_decreasing);
}
