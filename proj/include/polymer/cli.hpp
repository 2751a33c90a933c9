#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "polymer/chaos.hpp"
#include "polymer/disorder.hpp"

namespace polymer {

struct KernelSection {
  int t_max = 64;
  int square_t = 32;
  std::vector<int> tilt_times = {10, 20, 40};
  double tilt_speed = 0.2;
  int fourier_t_max = 12;
  int composition_t_max = 40;
  int composition_l_max = 3;
  std::vector<double> composition_M = {1, 2, 5};
  std::vector<int> composition_dims = {3, 4, 5};
  int lclt_fit_lo = 30;
  int lclt_fit_hi = 100;
  int lclt_check_hi = 200;  // 0 skips the check
  double alpha_tol = 1e-8;
};

struct IdentitySection {
  int chaos_t_max = 6;
  int chaos_seeds = 20;
  int decompose_t_max = 8;
  int decompose_seeds = 2;
  std::vector<ThresholdOverride> overrides = {{2, 1}, {3, 2}, {4, 2}};
  std::size_t random_vectors = 100000;
  int moment_tau_max = 16;
  int moment_tau_mc = 16;
  std::size_t moment_n = 10000;
};

struct ExperimentSection {
  std::vector<std::string> kinds = {"factorization", "convergence", "spatial"};
  std::vector<int> factorization_ladder = {8, 16, 32, 48};
  std::size_t factorization_n = 1000;
  int factorization_horizon = 2;  // T1 = horizon * t
  int factorization_past = 1;     // s1 = -past * t
  double factorization_slope_max = -0.2;
  std::vector<int> convergence_ladder = {4, 8, 16, 32};
  int convergence_t_ref = 64;
  std::size_t convergence_n = 4000;
  double convergence_theta_min = 0.3;
  int correlation_t_proxy = 40;
  std::size_t correlation_n = 20000;
  std::vector<Point> spatial_offsets;
  std::vector<int> temporal_offsets = {0, 2, 4, 8};
  double ratio_tol = 0.25;
};

struct RunConfig {
  int dim = 3;
  DisorderSpec disorder = DisorderSpec::rademacher(0.3, 1);
  ScaleParams scale;
  int workers = 1;
  std::size_t memory_mb = 4096;
  std::filesystem::path cache_dir;  // empty: <out>/cache
  KernelSection kernel;
  IdentitySection identity;
  ExperimentSection experiment;

  std::string canonical;  // sorted section.key=value lines
  std::string digest;     // SHA-256 of canonical, hex

  // Validates everything (ConfigError naming the violated constraint).
  void validate() const;
};

// INI text: [section] headers and key = value lines; '#' and ';' comments.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string sha256_hex(const std::string& data);

struct CliOptions {
  std::string subcommand;
  std::filesystem::path config;
  std::filesystem::path out = "out";
  int workers = 0;  // 0: from the config
  bool quiet = false;
};

enum ExitCode : int { kExitPass = 0, kExitVerdict = 1, kExitUsage = 2, kExitResource = 3 };

// Runs one subcommand; never throws. Errors become exit codes plus a JSON
// diagnostic (stderr and <out>/diagnostics.json when writable).
int run_cli(const CliOptions& opt);

}  // namespace polymer
