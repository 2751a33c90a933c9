#include <cmath>

#include <fmt/format.h>
#include <gsl/gsl_cdf.h>

#include "polymer/error.hpp"
#include "polymer/experiments.hpp"

namespace polymer {

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError(fmt::format("rate_fit needs >= 3 points, got {}", points.size()));
  const double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto& [t, v] : points) {
    if (!(t > 0) || !(v > 0) || !std::isfinite(v)) {
      throw DomainError(fmt::format("rate_fit needs positive finite points, got ({}, {})", t, v));
    }
    mx += std::log(t);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& [t, v] : points) {
    const double dx = std::log(t) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  if (sxx == 0) throw DomainError("rate_fit needs at least two distinct t");
  RateFit fit;
  fit.points = points;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (const auto& [t, v] : points) {
    const double r = std::log(v) - fit.intercept - fit.slope * std::log(t);
    sse += r * r;
  }
  const double dof = n - 2;
  const double se = std::sqrt(sse / dof / sxx);
  fit.half_width = gsl_cdf_tdist_Pinv(0.975, dof) * se;
  return fit;
}

}  // namespace polymer
