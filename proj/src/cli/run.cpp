#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <new>

#include <fmt/format.h>
#include "json.hpp"

#include "polymer/checks.hpp"
#include "polymer/cli.hpp"
#include "polymer/error.hpp"
#include "polymer/io.hpp"
#include "polymer/simd/kernels.hpp"

namespace polymer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  int workers;
  bool quiet;
};

void on_sigint(int) { cancel_flag().store(true); }

json config_json(const RunConfig& c) {
  json j = json::object();
  std::istringstream is(c.canonical);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    j[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return j;
}

json envelope(const Context& ctx, const std::string& sub) {
  return {{"schema_version", kSchemaVersion},
          {"tool", tool_version()},
          {"digest", ctx.cfg.digest},
          {"subcommand", sub},
          {"seed", ctx.cfg.disorder.seed},
          {"config", config_json(ctx.cfg)}};
}

void print_report(const Context& ctx, const std::string& group, const CheckReport& rep) {
  if (ctx.quiet) return;
  std::vector<std::string> order;
  std::map<std::string, CheckReport> by;
  for (const auto& r : rep.rows()) {
    if (!by.count(r.check)) order.push_back(r.check);
    if (r.gating) {
      by[r.check].add(r.check, r.inputs, r.lhs, r.rhs, r.pass);
    } else {
      by[r.check].note(r.check, r.inputs, r.lhs, r.rhs);
    }
  }
  for (const auto& name : order) {
    const CheckReport& sub = by[name];
    const CheckRow* w = sub.worst();
    const char* tag = !w ? "INFO" : (sub.pass() ? "PASS" : "FAIL");
    if (!w) w = &sub.rows().back();
    std::cout << fmt::format("{} {}/{} rows={} lhs={} rhs={} [{}]\n", tag, group, name, sub.rows().size(),
                             format_number(w->lhs), format_number(w->rhs), w->inputs);
  }
}

void finish(const Context& ctx, const std::string& sub, const CheckReport& rep, json extra) {
  json j = envelope(ctx, sub);
  j["checks"] = checks_json(rep);
  j["pass"] = rep.pass();
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_text(ctx.dir / (sub + ".json"), j.dump(2) + "\n");
}

KernelTable cached_table(const Context& ctx, int t_max) {
  const fs::path cache = ctx.cfg.cache_dir.empty() ? ctx.dir.parent_path() / "cache" : ctx.cfg.cache_dir;
  fs::create_directories(cache);
  const std::string key = sha256_hex(fmt::format("kernel d={} t_max={} layout={}", ctx.cfg.dim, t_max,
                                                 KernelTable::kLayoutVersion));
  const fs::path file = cache / fmt::format("kernel-{}.plkt", key.substr(0, 16));
  if (fs::exists(file)) {
    std::ifstream is(file, std::ios::binary);
    try {
      KernelTable t = KernelTable::load(is);
      if (t.dim() == ctx.cfg.dim && t.t_max() == t_max) return t;
    } catch (const Error&) {
      // rebuilt below
    }
  }
  KernelTable t(ctx.cfg.dim, t_max);
  const fs::path tmp = fs::path(file.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ResourceError(fmt::format("cannot write {}", tmp.string()));
    t.save(os);
  }
  fs::rename(tmp, file);
  return t;
}

int run_kernel(const Context& ctx) {
  const KernelSection& k = ctx.cfg.kernel;
  int need = std::max(k.t_max, 2 * k.square_t);
  for (int t : k.tilt_times) need = std::max(need, t);
  need = std::max(need, k.fourier_t_max);
  const KernelTable table = cached_table(ctx, need);
  CheckReport rep;
  const auto part = [&](const std::string& name, const CheckReport& r) {
    print_report(ctx, name, r);
    rep.append(r);
  };
  part("kernel", kernel_exactness(table, k.t_max, k.square_t));
  part("alpha", alpha_consistency(ctx.cfg.disorder, ctx.cfg.dim, k.alpha_tol));
  part("tilt", tilt_fourier_checks(table, k.tilt_times, k.tilt_speed, k.fourier_t_max));
  part("composition", composition_checks(k.composition_t_max, k.composition_l_max, k.composition_M, k.composition_dims));
  if (k.lclt_check_hi > 0) {
    part("lclt", lclt_checks(ctx.cfg.dim, ctx.cfg.scale.sigma_tilde, k.lclt_fit_lo, k.lclt_fit_hi, k.lclt_check_hi));
  }
  write_csv(ctx.dir / "kernel_checks.csv", checks_table(rep, "kernel_checks", ctx.cfg.digest));
  write_csv(ctx.dir / "kernel_table.csv", kernel_table_csv(table, std::min(table.t_max(), 8), ctx.cfg.digest));
  finish(ctx, "kernel", rep, {{"simd", simd::active_kernels().name}, {"table_t_max", table.t_max()}});
  return rep.pass() ? kExitPass : kExitVerdict;
}

int run_identity(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const IdentitySection& i = c.identity;
  CheckReport rep;
  const auto part = [&](const std::string& name, const CheckReport& r) {
    print_report(ctx, name, r);
    rep.append(r);
  };
  part("chaos", chaos_dp_equivalence(c.disorder, c.dim, i.chaos_t_max, i.chaos_seeds));
  part("decomposition", decomposition_identities(c.disorder, c.dim, i.decompose_t_max, c.scale, i.overrides,
                                                 i.decompose_seeds, i.random_vectors, c.disorder.seed));
  part("moments", second_moment_checks(c.disorder, c.dim, i.moment_tau_max, i.moment_tau_mc, i.moment_n, ctx.workers));
  const bool complete = !cancel_flag().load();
  CsvTable t = checks_table(rep, "identity_checks", c.digest);
  t.complete = complete;
  write_csv(ctx.dir / "identity_checks.csv", t);
  finish(ctx, "identity", rep, {{"complete", complete}});
  return rep.pass() && complete ? kExitPass : kExitVerdict;
}

int run_experiment(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ExperimentSection& e = c.experiment;
  CheckReport rep;
  json fits = json::object();
  bool complete = true;
  const auto part = [&](const std::string& name, const CheckReport& r) {
    print_report(ctx, name, r);
    rep.append(r);
  };
  for (const auto& kind : e.kinds) {
    if (cancel_flag().load()) {
      complete = false;
      break;
    }
    if (kind == "factorization") {
      const auto r = factorization_scan(c.disorder, c.dim, c.scale, e.factorization_ladder, e.factorization_n, ctx.workers,
                                        e.factorization_horizon, e.factorization_past);
      write_csv(ctx.dir / "factorization.csv", scan_table(r.rows, "factorization", c.digest, r.complete));
      write_csv(ctx.dir / "delta_samples.csv", delta_table(r.samples, c.digest, r.complete));
      part("factorization", factorization_verdicts(r, e.factorization_slope_max));
      fits["factorization"] = fit_json(r.fit);
      complete = complete && r.complete;
    } else if (kind == "convergence") {
      const auto r = convergence_rate_scan(c.disorder, c.dim, e.convergence_ladder, e.convergence_t_ref, e.convergence_n,
                                           ctx.workers);
      write_csv(ctx.dir / "convergence.csv", scan_table(r.rows, "convergence", c.digest, r.complete));
      part("convergence", convergence_verdicts(r, e.convergence_theta_min));
      fits["convergence_exact"] = fit_json(r.exact_fit);
      fits["convergence_mc"] = fit_json(r.mc_fit);
      fits["theta_bound"] = r.theta_bound;
      complete = complete && r.complete;
    } else {
      const bool spatial = kind == "spatial";
      std::vector<Point> offs;
      if (spatial) {
        offs = e.spatial_offsets;
      } else {
        for (int s : e.temporal_offsets) offs.push_back(Point::axis(c.dim, s));
      }
      const auto r = correlation_scan(c.disorder, c.dim, spatial ? CorrelationMode::kSpatial : CorrelationMode::kTemporal,
                                      offs, e.correlation_t_proxy, e.correlation_n, ctx.workers);
      const CsvTable t = correlation_table(r, c.digest);
      write_csv(ctx.dir / (t.kind + ".csv"), t);
      part(kind, correlation_verdicts(r, e.ratio_tol));
      complete = complete && r.complete;
    }
  }
  CsvTable t = checks_table(rep, "experiment_checks", c.digest);
  t.complete = complete;
  write_csv(ctx.dir / "experiment_checks.csv", t);
  finish(ctx, "experiment", rep, {{"complete", complete}, {"fits", fits}, {"kinds", e.kinds}});
  return rep.pass() && complete ? kExitPass : kExitVerdict;
}

double cell_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("'{}' is not a number", s));
  }
}

int run_report(const Context& ctx) {
  std::vector<fs::path> files;
  if (fs::is_directory(ctx.dir)) {
    for (const auto& ent : fs::directory_iterator(ctx.dir)) {
      if (ent.path().extension() == ".csv") files.push_back(ent.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError(fmt::format("no result CSVs under {}", ctx.dir.string()));
  json j = envelope(ctx, "report");
  json listing = json::array();
  json verdicts = json::object();
  json fits = json::object();
  bool pass = true, complete = true;
  for (const auto& f : files) {
    const CsvTable t = read_csv(f);
    if (t.digest != ctx.cfg.digest) {
      throw ConfigError(fmt::format("{} carries digest {}, config has {}", f.filename().string(), t.digest, ctx.cfg.digest));
    }
    listing.push_back({{"file", f.filename().string()}, {"kind", t.kind}, {"rows", t.rows.size()}, {"complete", t.complete}});
    complete = complete && t.complete;
    if (t.kind.size() > 7 && t.kind.substr(t.kind.size() - 7) == "_checks") {
      const std::size_t cp = t.column("pass"), cg = t.column("gating");
      std::size_t failures = 0;
      for (const auto& row : t.rows) failures += row[cg] == "1" && row[cp] != "1";
      const bool ok = failures == 0 && t.complete;
      verdicts[t.kind] = {{"pass", ok}, {"failures", failures}, {"rows", t.rows.size()}};
      pass = pass && ok;
    } else if (t.kind == "factorization") {
      std::map<int, double> sup;
      const std::size_t ct = t.column("t"), cm = t.column("mean");
      for (const auto& row : t.rows) {
        const int tt = std::stoi(row[ct]);
        sup[tt] = std::max(sup.count(tt) ? sup[tt] : 0.0, cell_number(row[cm]));
      }
      std::vector<std::pair<double, double>> pts;
      for (const auto& [tt, v] : sup) pts.emplace_back(tt, v);
      if (pts.size() >= 3) fits["factorization"] = fit_json(rate_fit(pts));
    } else if (t.kind == "convergence") {
      std::vector<std::pair<double, double>> ex, mc;
      const std::size_t ct = t.column("t"), cm = t.column("mean"), cr = t.column("reference");
      for (const auto& row : t.rows) {
        ex.emplace_back(std::stoi(row[ct]), cell_number(row[cr]));
        mc.emplace_back(std::stoi(row[ct]), cell_number(row[cm]));
      }
      if (ex.size() >= 3) {
        fits["convergence_exact"] = fit_json(rate_fit(ex));
        fits["convergence_mc"] = fit_json(rate_fit(mc));
      }
    }
  }
  const double lam = lambda_of(ctx.cfg.disorder);
  j["theta_band"] = {{"d_half_minus_one", 0.5 * ctx.cfg.dim - 1.0},
                     {"minus_log_alpha_lambda", -std::log(weak_disorder_margin(ctx.cfg.disorder, ctx.cfg.dim))},
                     {"lambda", lam}};
  j["files"] = listing;
  j["verdicts"] = verdicts;
  j["fits"] = fits;
  j["complete"] = complete;
  j["pass"] = pass;
  write_text(ctx.dir / "summary.json", j.dump(2) + "\n");
  if (!ctx.quiet) {
    for (auto& [k, v] : verdicts.items()) std::cout << fmt::format("{:4} {}\n", v["pass"].get<bool>() ? "PASS" : "FAIL", k);
  }
  return pass && complete ? kExitPass : kExitVerdict;
}

void diagnostic(const CliOptions& opt, const fs::path& dir, const std::string& kind, const std::string& msg, int code) {
  const json j = {{"schema_version", kSchemaVersion}, {"tool", tool_version()}, {"subcommand", opt.subcommand},
                  {"level", "error"},                {"kind", kind},            {"message", msg},
                  {"exit_code", code}};
  std::cerr << j.dump() << "\n";
  std::error_code ec;
  const fs::path target = dir.empty() ? opt.out : dir;
  fs::create_directories(target, ec);
  if (!ec) {
    try {
      write_text(target / "diagnostics.json", j.dump(2) + "\n");
    } catch (const std::exception&) {
      // stderr already has it
    }
  }
}

}  // namespace

int run_cli(const CliOptions& opt) {
  fs::path dir;
  try {
    static const std::vector<std::string> subs = {"kernel", "identity", "experiment", "report"};
    if (std::find(subs.begin(), subs.end(), opt.subcommand) == subs.end()) {
      throw ConfigError(fmt::format("unknown subcommand '{}'", opt.subcommand));
    }
    RunConfig cfg = load_config(opt.config);
    if (opt.workers < 0) throw ConfigError("--workers must be >= 1");
    const int workers = opt.workers > 0 ? opt.workers : cfg.workers;
    set_memory_budget(cfg.memory_mb << 20);
    dir = opt.out / cfg.digest.substr(0, 16);
    fs::create_directories(dir);
    std::signal(SIGINT, on_sigint);
    const Context ctx{cfg, dir, workers, opt.quiet};
    if (!opt.quiet) std::cout << fmt::format("{} {} digest={} out={}\n", tool_version(), opt.subcommand, cfg.digest, dir.string());
    if (opt.subcommand == "kernel") return run_kernel(ctx);
    if (opt.subcommand == "identity") return run_identity(ctx);
    if (opt.subcommand == "experiment") return run_experiment(ctx);
    return run_report(ctx);
  } catch (const ConfigError& e) {
    diagnostic(opt, dir, e.kind(), e.what(), kExitUsage);
    return kExitUsage;
  } catch (const ResourceError& e) {
    diagnostic(opt, dir, e.kind(), e.what(), kExitResource);
    return kExitResource;
  } catch (const std::bad_alloc&) {
    diagnostic(opt, dir, "resource", "allocation failed", kExitResource);
    return kExitResource;
  } catch (const fs::filesystem_error& e) {
    diagnostic(opt, dir, "resource", e.what(), kExitResource);
    return kExitResource;
  } catch (const DomainError& e) {
    diagnostic(opt, dir, e.kind(), e.what(), kExitUsage);
    return kExitUsage;
  } catch (const Error& e) {
    diagnostic(opt, dir, e.kind(), e.what(), kExitVerdict);
    return kExitVerdict;
  } catch (const std::exception& e) {
    diagnostic(opt, dir, "internal", e.what(), kExitVerdict);
    return kExitVerdict;
  }
}

}  // namespace polymer
