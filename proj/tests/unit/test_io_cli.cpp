#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "polymer/cli.hpp"
#include "polymer/error.hpp"
#include "polymer/io.hpp"

using namespace polymer;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# unit test run
[run]
dim = 3
seed = 5
[disorder]
family = rademacher
beta = 0.3
[experiment]
kinds = convergence,spatial
convergence_ladder = 2,4,6
convergence_t_ref = 10
convergence_n = 40
convergence_theta_min = 0
correlation_t_proxy = 6
correlation_n = 40
temporal_offsets = 0,2
spatial_offsets = 0:0:0,2:0:0,4:0:0,6:0:0
ratio_tol = 100
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("polymer_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int run(const std::string& sub, const fs::path& config, const fs::path& out, int workers = 0) {
  CliOptions o;
  o.subcommand = sub;
  o.config = config;
  o.out = out;
  o.workers = workers;
  o.quiet = true;
  return run_cli(o);
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig c = parse_config(kSmall);
  CHECK(c.dim == 3);
  CHECK(c.disorder.seed == 5);
  CHECK(c.experiment.spatial_offsets.size() == 4);
  CHECK(c.experiment.spatial_offsets[1] == Point{2, 0, 0});
  CHECK(c.digest.size() == 64);
  CHECK(c.canonical.find("experiment.convergence_n=40") != std::string::npos);

  CHECK(config_error("[run]\ndim = 5\n").find("dim") != std::string::npos);
  CHECK(config_error("[run]\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(config_error("[scale]\nkappa1 = 0.77\nkappa2 = 0.75\n").find("kappa1 < kappa2") != std::string::npos);
  CHECK(config_error("[disorder]\nfamily = gaussian\nbeta = 1.5\n").find("weak") != std::string::npos);
  CHECK(config_error("[experiment]\nconvergence_ladder = 8,4,16\n").find("ascending") != std::string::npos);
  CHECK(config_error("[experiment]\ntemporal_offsets = 0,3\n").find("even") != std::string::npos);
  CHECK(config_error("[run]\ndim = three\n").size() > 0);
}

TEST_CASE("config digest") {
  const RunConfig a = parse_config(kSmall);
  // comments, ordering, spacing and worker count do not matter
  std::string text = kSmall;
  text.replace(text.find("seed = 5\n"), 9, "workers = 7\n# same seed\nseed=5\n");
  const RunConfig b = parse_config(text);
  CHECK(a.digest == b.digest);
  const RunConfig c = parse_config(std::string(kSmall) + "[kernel]\nt_max = 20\n");
  CHECK(a.digest != c.digest);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3, 1e-300, -2.5e17, 0.0, 123456789.0}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(HUGE_VAL) == "inf");
  CHECK(format_number(-HUGE_VAL) == "-inf");
}

TEST_CASE("CSV round trip and rejection") {
  const fs::path dir = scratch("csv");
  CsvTable t;
  t.schema = kSchemaVersion;
  t.tool = tool_version();
  t.digest = "abc123";
  t.kind = "demo";
  t.complete = false;
  t.columns = {"a", "b"};
  t.rows = {{"1", "x"}, {"2.5", "y"}};
  write_csv(dir / "t.csv", t);
  const std::string text = slurp(dir / "t.csv");
  CHECK(text.rfind("# schema=1 tool=polymer-lab/", 0) == 0);
  CHECK(text.find("status=incomplete") != std::string::npos);
  const CsvTable back = read_csv(dir / "t.csv");
  CHECK(back.schema == 1);
  CHECK(back.digest == "abc123");
  CHECK(back.kind == "demo");
  CHECK(!back.complete);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b") == 1);
  CHECK_THROWS_AS(back.column("c"), ConfigError);

  write_file(dir / "empty.csv", "");
  CHECK_THROWS(read_csv(dir / "empty.csv"));
  write_file(dir / "noheader.csv", "a,b\n1,2\n");
  CHECK_THROWS(read_csv(dir / "noheader.csv"));
  std::string v2 = text;
  v2.replace(v2.find("schema=1"), 8, "schema=2");
  write_file(dir / "v2.csv", v2);
  CHECK_THROWS_AS(read_csv(dir / "v2.csv"), ConfigError);
  write_file(dir / "ragged.csv", text + "3\n");
  CHECK_THROWS(read_csv(dir / "ragged.csv"));
  CHECK_THROWS(read_csv(dir / "missing.csv"));
}

TEST_CASE("kernel table export") {
  const KernelTable k(3, 4);
  const CsvTable t = kernel_table_csv(k, 2, "d");
  CHECK(t.kind == "kernel_table");
  CHECK(t.columns == std::vector<std::string>{"t", "z1", "z2", "z3", "q"});
  CHECK(t.rows.size() == 1 + 6 + 19);
  double total = 0;
  for (const auto& r : t.rows) total += r[0] == "2" ? std::stod(r[4]) : 0.0;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("check tables") {
  CheckReport rep;
  rep.le("bound", "t=1, y=0", 0.5, 1.0);
  rep.le("bound", "t=2", 2.0, 1.0);
  rep.note("info", "x", 3.0, 0.0);
  CHECK(!rep.pass());
  const CsvTable t = checks_table(rep, "demo_checks", "d");
  CHECK(t.rows.size() == 3);
  CHECK(t.rows[0][t.column("inputs")].find(',') == std::string::npos);
  CHECK(t.rows[1][t.column("pass")] == "0");
  CHECK(t.rows[2][t.column("gating")] == "0");
  const auto j = checks_json(rep);
  CHECK(j.dump().find("bound") != std::string::npos);
}

TEST_CASE("command line runs") {
  const fs::path dir = scratch("cli");
  const fs::path cfg = write_file(dir / "small.conf", kSmall);
  const std::string tag = parse_config(kSmall).digest.substr(0, 16);

  SUBCASE("usage errors") {
    CHECK(run("experiment", dir / "absent.conf", dir / "o") == kExitUsage);
    const fs::path bad = write_file(dir / "bad.conf", "[scale]\nkappa1 = 0.77\nkappa2 = 0.75\n");
    CHECK(run("kernel", bad, dir / "o") == kExitUsage);
    const auto diag = nlohmann::json::parse(slurp(dir / "o" / "diagnostics.json"));
    CHECK(diag["exit_code"] == 2);
    CHECK(diag["message"].get<std::string>().find("kappa1 < kappa2") != std::string::npos);
    CHECK(run("nonsense", cfg, dir / "o") == kExitUsage);
    CHECK(run("report", cfg, dir / "empty") == kExitUsage);
  }

  SUBCASE("reruns are byte identical across worker counts") {
    const int code = run("experiment", cfg, dir / "w1", 1);
    CHECK((code == kExitPass || code == kExitVerdict));
    CHECK(run("experiment", cfg, dir / "w2", 2) == code);
    int compared = 0;
    for (const auto& e : fs::directory_iterator(dir / "w1" / tag)) {
      if (e.path().extension() != ".csv" && e.path().extension() != ".json") continue;
      CHECK(slurp(e.path()) == slurp(dir / "w2" / tag / e.path().filename()));
      ++compared;
    }
    CHECK(compared >= 4);

    const int rc = run("report", cfg, dir / "w1", 1);
    const auto s = nlohmann::json::parse(slurp(dir / "w1" / tag / "summary.json"));
    CHECK(rc == (s["pass"] == true ? kExitPass : kExitVerdict));
    CHECK(s["schema_version"] == kSchemaVersion);
    CHECK(s["digest"] == parse_config(kSmall).digest);
    CHECK(s["subcommand"] == "report");
    CHECK(s["complete"] == true);
    CHECK(s.contains("theta_band"));
    CHECK(s["verdicts"].contains("experiment_checks"));

    // fits in the summary equal a fresh fit of the CSV columns
    const CsvTable conv = read_csv(dir / "w1" / tag / "convergence.csv");
    std::vector<std::pair<double, double>> ex;
    for (const auto& row : conv.rows) {
      ex.emplace_back(std::stod(row[conv.column("t")]), std::stod(row[conv.column("reference")]));
    }
    const RateFit f = rate_fit(ex);
    CHECK(s["fits"]["convergence_exact"]["slope"].get<double>() == doctest::Approx(f.slope).epsilon(1e-15));

    // another config's report refuses these files
    const fs::path other = write_file(dir / "other.conf", std::string(kSmall) + "[kernel]\nt_max = 20\n");
    fs::create_directories(dir / "mixed");
    fs::copy(dir / "w1" / tag, dir / "mixed" / parse_config(slurp(other)).digest.substr(0, 16),
             fs::copy_options::recursive);
    CHECK(run("report", other, dir / "mixed") == kExitUsage);
  }

  SUBCASE("a passing run reports pass") {
    std::string text = kSmall;
    text.replace(text.find("convergence,spatial"), 19, "convergence");
    const fs::path conv = write_file(dir / "conv.conf", text);
    const std::string ctag = parse_config(text).digest.substr(0, 16);
    CHECK(run("experiment", conv, dir / "c") == kExitPass);
    CHECK(run("report", conv, dir / "c") == kExitPass);
    const auto s = nlohmann::json::parse(slurp(dir / "c" / ctag / "summary.json"));
    CHECK(s["pass"] == true);
    CHECK(s["verdicts"]["experiment_checks"]["failures"] == 0);
  }
}
