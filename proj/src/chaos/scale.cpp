#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "polymer/chaos.hpp"
#include "polymer/error.hpp"

namespace polymer {

void ScaleParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("scale parameters: " + what); };
  if (!(sigma > 0.75 && sigma < 1)) fail("sigma must lie in (3/4, 1)");
  if (!(sigma_tilde > sigma && sigma_tilde < 1)) fail("sigma_tilde must lie in (sigma, 1)");
  const double lo = (3 * sigma - 1) / 2;
  if (!(kappa1 > lo && kappa1 < sigma)) fail(fmt::format("kappa1 must lie in ({:.4g}, sigma)", lo));
  if (!(kappa2 > lo && kappa2 < sigma)) fail(fmt::format("kappa2 must lie in ({:.4g}, sigma)", lo));
  if (!(kappa1 < kappa2)) fail("kappa1 < kappa2 required");
  if (!(gap_exp > 0 && gap_exp < std::min(1 - sigma, kappa2 - kappa1))) {
    fail("gap_exp must lie in (0, min(1 - sigma, kappa2 - kappa1))");
  }
  if (!(xi1 > 0 && xi1 < xi2 && xi2 < gap_exp)) fail("0 < xi1 < xi2 < gap_exp required");
  if (theta_target && !(*theta_target > 0)) fail("theta_target must be positive");
}

int ScaleParams::t_kappa2() const {
  // t > 2 t^kappa2 is monotone in t, so the first t satisfying it works.
  int t = 1;
  while (!(std::pow(double(t), 1 - kappa2) > 2.0)) ++t;
  return t;
}

double k_of_t(const ScaleParams& p, int t) {
  const int T = p.t_kappa2();
  if (t <= T) return 0.0;
  const double k = std::pow(double(t - T), p.kappa1) - 1.0;
  return k >= 1.0 ? k : 0.0;
}

GapClass classify_gaps(const std::vector<int>& times, int t, const ScaleParams& p,
                       const std::optional<ThresholdOverride>& ov) {
  const int r = int(times.size());
  for (int j = 0; j < r; ++j) {
    if (times[j] < 0 || times[j] > t || (j > 0 && times[j] <= times[j - 1])) {
      throw DomainError("classify_gaps: times must be strictly increasing inside [0, t]");
    }
  }
  const double k = ov ? ov->k : k_of_t(p, t);
  if (r > k) throw DomainError(fmt::format("classify_gaps: order {} exceeds k(t) = {:.4g}", r, k));
  const double cut = ov ? ov->large_cut : std::pow(double(t), p.gap_exp);
  const double huge_cut = t - r * cut;

  GapClass gc;
  for (int j = 1; j <= r + 1; ++j) {
    const int lo = j == 1 ? 0 : times[j - 2];
    const int hi = j == r + 1 ? t : times[j - 1];
    const int g = hi - lo;
    if (g >= cut) ++gc.large_count;
    if (g >= huge_cut) {
      if (gc.huge_count++ == 0) {
        gc.kind = GapClass::kHugeAt;
        gc.m = j;
      }
    }
  }
  if (!ov) {
    if (gc.large_count < 1) throw std::logic_error("classify_gaps: no large gap");
    if (gc.huge_count > 1) throw std::logic_error("classify_gaps: two huge gaps");
    if (gc.kind == GapClass::kNoHuge && gc.large_count < 2) {
      throw std::logic_error("classify_gaps: no huge gap but fewer than two large gaps");
    }
  }
  return gc;
}

}  // namespace polymer
