// Runs the acceptance criteria (d = 3, Rademacher disorder, beta = 0.3) and
// prints one PASS/FAIL line per criterion. Arguments select criteria by
// number; no arguments runs all of them. POLYMER_WORKERS sets the pool size.
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "polymer/checks.hpp"
#include "polymer/simd/kernels.hpp"

using namespace polymer;

namespace {

constexpr int kDim = 3;
constexpr std::uint64_t kSeed = 1;

DisorderSpec spec() { return DisorderSpec::rademacher(0.3, kSeed); }

int workers() {
  if (const char* w = std::getenv("POLYMER_WORKERS")) return std::max(1, std::atoi(w));
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<CheckReport()> run;
};

void print_failures(const CheckReport& rep) {
  int shown = 0;
  for (const auto& r : rep.rows()) {
    if (!r.gating || r.pass) continue;
    if (shown++ == 5) {
      std::cout << "    ...\n";
      break;
    }
    std::cout << fmt::format("    fail {} [{}] lhs={:.6g} rhs={:.6g}\n", r.check, r.inputs, r.lhs, r.rhs);
  }
}

void print_notes(const CheckReport& rep) {
  for (const auto& r : rep.rows()) {
    if (!r.gating) std::cout << fmt::format("    note {} [{}] lhs={:.6g} rhs={:.6g}\n", r.check, r.inputs, r.lhs, r.rhs);
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  const int nw = workers();
  const DisorderSpec s = spec();
  ScaleParams p;

  const std::vector<Criterion> all = {
      {1, "kernel exactness", 10,
       [] { return kernel_exactness(KernelTable(kDim, 64), 64, 32); }},
      {2, "chaos/transfer-matrix equivalence", 60, [&] { return chaos_dp_equivalence(s, kDim, 6, 20); }},
      {3, "decomposition identities", 300,
       [&] {
         const std::vector<ThresholdOverride> ov = {{2, 1}, {3, 2}, {4, 2}, {8, 1}};
         return decomposition_identities(s, kDim, 8, p, ov, 2, 100000, kSeed);
       }},
      {4, "second-moment cross-oracle", 600, [&] { return second_moment_checks(s, kDim, 16, 16, 10000, nw); }},
      {5, "alpha_3 consistency", 10, [&] { return alpha_consistency(s, kDim, 1e-8); }},
      {6, "spatial covariance", 1800,
       [&] {
         const std::vector<Point> offs = {{0, 0, 0}, {2, 0, 0}, {1, 1, 0}, {4, 0, 0}, {2, 2, 0},
                                          {6, 0, 0}, {1, 0, 0}, {2, 1, 0}, {3, 0, 0}};
         return correlation_verdicts(correlation_scan(s, kDim, CorrelationMode::kSpatial, offs, 40, 20000, nw), 0.25);
       }},
      {7, "convergence rate", 1200,
       [&] { return convergence_verdicts(convergence_rate_scan(s, kDim, {4, 8, 16, 32}, 64, 4000, nw), 0.3); }},
      {8, "factorization decay", 1800,
       [&] { return factorization_verdicts(factorization_scan(s, kDim, p, {8, 16, 32, 48}, 1000, nw), -0.2); }},
      {9, "tilting and Fourier", 300,
       [] { return tilt_fourier_checks(KernelTable(kDim, 40), {10, 20, 40}, 0.2, 12); }},
      {10, "composition bound", 60,
       [] { return composition_checks(40, 3, {1, 2, 5}, {3, 4, 5}); }},
      {11, "LCLT lower bound", 300, [] { return lclt_checks(kDim, 0.85, 30, 100, 200); }},
  };

  std::cout << fmt::format("acceptance: d={} rademacher beta=0.3 seed={} workers={} simd={}\n", kDim, kSeed, nw,
                           simd::active_kernels().name);
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckReport rep;
    std::string error;
    try {
      rep = c.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool ok = error.empty() && rep.pass() && in_time;
    failed += !ok;
    std::string detail;
    if (!error.empty()) {
      detail = "error: " + error;
    } else if (const CheckRow* w = rep.worst()) {
      detail = fmt::format("{} [{}] lhs={:.6g} rhs={:.6g}", w->check, w->inputs, w->lhs, w->rhs);
    }
    std::cout << fmt::format("CRITERION {:2} {} {} ({:.1f}s of {:.0f}s{}) {}\n", c.id, ok ? "PASS" : "FAIL", c.name, secs,
                             c.budget_s, in_time ? "" : ", over budget", detail);
    print_failures(rep);
    print_notes(rep);
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
