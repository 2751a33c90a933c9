#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "polymer/cli.hpp"
#include "polymer/error.hpp"
#include "polymer/io.hpp"

namespace polymer {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& v);

template <>
double parse_value<double>(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
  return x;
}

template <>
long long parse_value<long long>(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
  return x;
}

// Reads known keys, remembering which were consumed.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    used_.insert(section + "." + key);
    return trim(*v);
  }
  void number(const std::string& s, const std::string& k, double& out) {
    if (auto v = raw(s, k)) out = parse_value<double>(s + "." + k, *v);
  }
  template <class I>
  void integer(const std::string& s, const std::string& k, I& out) {
    if (auto v = raw(s, k)) {
      const long long x = parse_value<long long>(s + "." + k, *v);
      if (x < static_cast<long long>(std::numeric_limits<I>::min()) ||
          (x > 0 && static_cast<unsigned long long>(x) > static_cast<unsigned long long>(std::numeric_limits<I>::max()))) {
        throw ConfigError(fmt::format("{}.{}: {} out of range", s, k, x));
      }
      out = static_cast<I>(x);
    }
  }
  void ints(const std::string& s, const std::string& k, std::vector<int>& out) {
    if (auto v = raw(s, k)) {
      out.clear();
      for (const auto& item : split_list(*v, ',')) out.push_back(static_cast<int>(parse_value<long long>(s + "." + k, item)));
    }
  }
  void numbers(const std::string& s, const std::string& k, std::vector<double>& out) {
    if (auto v = raw(s, k)) {
      out.clear();
      for (const auto& item : split_list(*v, ',')) out.push_back(parse_value<double>(s + "." + k, item));
    }
  }
  void words(const std::string& s, const std::string& k, std::vector<std::string>& out) {
    if (auto v = raw(s, k)) out = split_list(*v, ',');
  }
  void unknown_keys() const {
    for (const auto& [sec, child] : tree_) {
      if (child.empty() && !child.data().empty()) throw ConfigError(fmt::format("key '{}' outside any section", sec));
      for (const auto& [key, _] : child) {
        if (!used_.count(sec + "." + key)) throw ConfigError(fmt::format("unknown config key {}.{}", sec, key));
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

std::string point_text(const Point& p) {
  std::string s;
  for (int k = 0; k < p.dim(); ++k) s += (k ? ":" : "") + std::to_string(p[k]);
  return s;
}

// Every effective setting except workers and paths, which do not change outputs.
std::string canonical_text(const RunConfig& c) {
  std::vector<std::string> lines;
  const auto add = [&](const std::string& k, const std::string& v) { lines.push_back(k + "=" + v); };
  add("run.dim", std::to_string(c.dim));
  add("run.seed", std::to_string(c.disorder.seed));
  add("run.memory_mb", std::to_string(c.memory_mb));
  add("disorder.family", family_name(c.disorder.family));
  add("disorder.beta", format_number(c.disorder.beta));
  if (c.disorder.family == Family::kUniform) add("disorder.half_width", format_number(c.disorder.half_width));
  if (c.disorder.family == Family::kFiniteSupport) {
    add("disorder.values", join_numbers(c.disorder.values));
    add("disorder.weights", join_numbers(c.disorder.weights));
  }
  const ScaleParams& p = c.scale;
  add("scale.sigma", format_number(p.sigma));
  add("scale.sigma_tilde", format_number(p.sigma_tilde));
  add("scale.kappa1", format_number(p.kappa1));
  add("scale.kappa2", format_number(p.kappa2));
  add("scale.gap_exp", format_number(p.gap_exp));
  add("scale.xi1", format_number(p.xi1));
  add("scale.xi2", format_number(p.xi2));
  if (p.theta_target) add("scale.theta_target", format_number(*p.theta_target));
  const KernelSection& k = c.kernel;
  add("kernel.t_max", std::to_string(k.t_max));
  add("kernel.square_t", std::to_string(k.square_t));
  add("kernel.tilt_times", join_ints(k.tilt_times));
  add("kernel.tilt_speed", format_number(k.tilt_speed));
  add("kernel.fourier_t_max", std::to_string(k.fourier_t_max));
  add("kernel.composition_t_max", std::to_string(k.composition_t_max));
  add("kernel.composition_l_max", std::to_string(k.composition_l_max));
  add("kernel.composition_M", join_numbers(k.composition_M));
  add("kernel.composition_dims", join_ints(k.composition_dims));
  add("kernel.lclt_fit_lo", std::to_string(k.lclt_fit_lo));
  add("kernel.lclt_fit_hi", std::to_string(k.lclt_fit_hi));
  add("kernel.lclt_check_hi", std::to_string(k.lclt_check_hi));
  add("kernel.alpha_tol", format_number(k.alpha_tol));
  const IdentitySection& i = c.identity;
  add("identity.chaos_t_max", std::to_string(i.chaos_t_max));
  add("identity.chaos_seeds", std::to_string(i.chaos_seeds));
  add("identity.decompose_t_max", std::to_string(i.decompose_t_max));
  add("identity.decompose_seeds", std::to_string(i.decompose_seeds));
  std::string ov;
  for (std::size_t j = 0; j < i.overrides.size(); ++j) {
    ov += (j ? "," : "") + format_number(i.overrides[j].k) + ":" + format_number(i.overrides[j].large_cut);
  }
  add("identity.overrides", ov);
  add("identity.random_vectors", std::to_string(i.random_vectors));
  add("identity.moment_tau_max", std::to_string(i.moment_tau_max));
  add("identity.moment_tau_mc", std::to_string(i.moment_tau_mc));
  add("identity.moment_n", std::to_string(i.moment_n));
  const ExperimentSection& e = c.experiment;
  std::string kinds;
  for (std::size_t j = 0; j < e.kinds.size(); ++j) kinds += (j ? "," : "") + e.kinds[j];
  add("experiment.kinds", kinds);
  add("experiment.factorization_ladder", join_ints(e.factorization_ladder));
  add("experiment.factorization_n", std::to_string(e.factorization_n));
  add("experiment.factorization_horizon", std::to_string(e.factorization_horizon));
  add("experiment.factorization_past", std::to_string(e.factorization_past));
  add("experiment.factorization_slope_max", format_number(e.factorization_slope_max));
  add("experiment.convergence_ladder", join_ints(e.convergence_ladder));
  add("experiment.convergence_t_ref", std::to_string(e.convergence_t_ref));
  add("experiment.convergence_n", std::to_string(e.convergence_n));
  add("experiment.convergence_theta_min", format_number(e.convergence_theta_min));
  add("experiment.correlation_t_proxy", std::to_string(e.correlation_t_proxy));
  add("experiment.correlation_n", std::to_string(e.correlation_n));
  std::string offs;
  for (std::size_t j = 0; j < e.spatial_offsets.size(); ++j) offs += (j ? "," : "") + point_text(e.spatial_offsets[j]);
  add("experiment.spatial_offsets", offs);
  add("experiment.temporal_offsets", join_ints(e.temporal_offsets));
  add("experiment.ratio_tol", format_number(e.ratio_tol));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::vector<Point> default_offsets(int d) {
  std::vector<Point> out;
  for (int m : {0, 1, 2, 3, 4, 6}) out.push_back(Point::axis(d, m));
  Point p(d);
  p[0] = 1;
  p[1] = 1;
  out.push_back(p);
  p[0] = 2;
  p[1] = 2;
  out.push_back(p);
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool ascending_positive(const std::vector<int>& v) {
  if (v.empty() || v.front() < 1) return false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) return false;
  }
  return true;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw ResourceError("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void RunConfig::validate() const {
  require(dim >= 3 && dim <= 4, fmt::format("run.dim = {}: the simulator supports d in {{3, 4}}", dim));
  require(workers >= 1, "run.workers must be >= 1");
  require(memory_mb >= 16, "run.memory_mb must be >= 16");
  try {
    disorder.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("disorder: ") + e.what());
  }
  scale.validate();
  const double margin = weak_disorder_margin(disorder, dim);
  require(margin < 1.0, fmt::format("weak disorder: alpha_d lambda = {:.6g} must be < 1", margin));

  const KernelSection& k = kernel;
  require(k.t_max >= 0 && k.square_t >= 0, "kernel.t_max and kernel.square_t must be >= 0");
  require(k.tilt_speed > 0 && k.tilt_speed * std::sqrt(double(dim)) < kTiltMaxSpeed,
          "kernel.tilt_speed must be positive and keep |z|_1 / t below the Newton region");
  for (int t : k.tilt_times) require(t >= 1, "kernel.tilt_times must be >= 1");
  require(k.fourier_t_max >= 0, "kernel.fourier_t_max must be >= 0");
  require(k.composition_t_max >= 1 && k.composition_l_max >= 0, "kernel.composition ranges must be positive");
  for (double M : k.composition_M) require(M > 0, "kernel.composition_M must be positive");
  for (int d : k.composition_dims) require(d >= 3 && d <= 6, "kernel.composition_dims must lie in [3, 6]");
  require(k.lclt_check_hi == 0 || (k.lclt_fit_lo >= 1 && k.lclt_fit_lo < k.lclt_fit_hi && k.lclt_fit_hi < k.lclt_check_hi),
          "kernel.lclt: need 1 <= fit_lo < fit_hi < check_hi");
  require(k.alpha_tol > 0, "kernel.alpha_tol must be positive");

  const IdentitySection& i = identity;
  require(i.chaos_t_max >= 0 && i.chaos_t_max <= 12, "identity.chaos_t_max must lie in [0, 12]");
  require(i.chaos_seeds >= 1 && i.decompose_seeds >= 1, "identity seed counts must be >= 1");
  require(i.decompose_t_max >= 2 && i.decompose_t_max <= 12, "identity.decompose_t_max must lie in [2, 12]");
  for (const auto& o : i.overrides) require(o.k >= 1 && o.large_cut >= 1, "identity.overrides need k >= 1 and cut >= 1");
  require(i.moment_tau_max >= 0 && i.moment_tau_mc >= 0, "identity moment horizons must be >= 0");
  require(i.moment_n >= 2, "identity.moment_n must be >= 2");

  const ExperimentSection& e = experiment;
  for (const auto& kind : e.kinds) {
    require(kind == "factorization" || kind == "convergence" || kind == "spatial" || kind == "temporal",
            fmt::format("experiment.kinds: unknown kind '{}'", kind));
  }
  require(ascending_positive(e.factorization_ladder), "experiment.factorization_ladder must be ascending and positive");
  require(e.factorization_n >= 2 && e.convergence_n >= 2 && e.correlation_n >= 2, "sample counts must be >= 2");
  require(e.factorization_horizon >= 1 && e.factorization_past >= 0, "factorization proxies need horizon >= 1, past >= 0");
  require(ascending_positive(e.convergence_ladder), "experiment.convergence_ladder must be ascending and positive");
  require(e.convergence_t_ref > e.convergence_ladder.back(), "experiment.convergence_t_ref must exceed the ladder");
  require(e.correlation_t_proxy >= 1, "experiment.correlation_t_proxy must be >= 1");
  for (const Point& y : e.spatial_offsets) require(y.dim() == dim, "experiment.spatial_offsets: dimension mismatch");
  for (int s : e.temporal_offsets) {
    require(s >= 0 && s <= e.correlation_t_proxy && s % 2 == 0,
            "experiment.temporal_offsets must be even and inside [0, correlation_t_proxy]");
  }
  require(e.ratio_tol > 0, "experiment.ratio_tol must be positive");
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  RunConfig c;
  Reader r(tree);
  r.integer("run", "dim", c.dim);
  r.integer("run", "seed", c.disorder.seed);
  r.integer("run", "workers", c.workers);
  r.integer("run", "memory_mb", c.memory_mb);
  if (auto v = r.raw("run", "cache_dir")) c.cache_dir = *v;

  if (auto v = r.raw("disorder", "family")) {
    try {
      c.disorder.family = parse_family(*v);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("disorder.family: ") + e.what());
    }
  }
  r.number("disorder", "beta", c.disorder.beta);
  r.number("disorder", "half_width", c.disorder.half_width);
  r.numbers("disorder", "values", c.disorder.values);
  r.numbers("disorder", "weights", c.disorder.weights);

  r.number("scale", "sigma", c.scale.sigma);
  r.number("scale", "sigma_tilde", c.scale.sigma_tilde);
  r.number("scale", "kappa1", c.scale.kappa1);
  r.number("scale", "kappa2", c.scale.kappa2);
  r.number("scale", "gap_exp", c.scale.gap_exp);
  r.number("scale", "xi1", c.scale.xi1);
  r.number("scale", "xi2", c.scale.xi2);
  if (r.raw("scale", "theta_target")) {
    double th = 0;
    r.number("scale", "theta_target", th);
    c.scale.theta_target = th;
  }

  KernelSection& k = c.kernel;
  r.integer("kernel", "t_max", k.t_max);
  r.integer("kernel", "square_t", k.square_t);
  r.ints("kernel", "tilt_times", k.tilt_times);
  r.number("kernel", "tilt_speed", k.tilt_speed);
  r.integer("kernel", "fourier_t_max", k.fourier_t_max);
  r.integer("kernel", "composition_t_max", k.composition_t_max);
  r.integer("kernel", "composition_l_max", k.composition_l_max);
  r.numbers("kernel", "composition_M", k.composition_M);
  r.ints("kernel", "composition_dims", k.composition_dims);
  r.integer("kernel", "lclt_fit_lo", k.lclt_fit_lo);
  r.integer("kernel", "lclt_fit_hi", k.lclt_fit_hi);
  r.integer("kernel", "lclt_check_hi", k.lclt_check_hi);
  r.number("kernel", "alpha_tol", k.alpha_tol);

  IdentitySection& i = c.identity;
  r.integer("identity", "chaos_t_max", i.chaos_t_max);
  r.integer("identity", "chaos_seeds", i.chaos_seeds);
  r.integer("identity", "decompose_t_max", i.decompose_t_max);
  r.integer("identity", "decompose_seeds", i.decompose_seeds);
  if (auto v = r.raw("identity", "overrides")) {
    i.overrides.clear();
    for (const auto& item : split_list(*v, ',')) {
      const auto parts = split_list(item, ':');
      if (parts.size() != 2) throw ConfigError(fmt::format("identity.overrides: '{}' is not k:cut", item));
      i.overrides.push_back({parse_value<double>("identity.overrides", parts[0]),
                             parse_value<double>("identity.overrides", parts[1])});
    }
  }
  r.integer("identity", "random_vectors", i.random_vectors);
  r.integer("identity", "moment_tau_max", i.moment_tau_max);
  r.integer("identity", "moment_tau_mc", i.moment_tau_mc);
  r.integer("identity", "moment_n", i.moment_n);

  ExperimentSection& e = c.experiment;
  r.words("experiment", "kinds", e.kinds);
  r.ints("experiment", "factorization_ladder", e.factorization_ladder);
  r.integer("experiment", "factorization_n", e.factorization_n);
  r.integer("experiment", "factorization_horizon", e.factorization_horizon);
  r.integer("experiment", "factorization_past", e.factorization_past);
  r.number("experiment", "factorization_slope_max", e.factorization_slope_max);
  r.ints("experiment", "convergence_ladder", e.convergence_ladder);
  r.integer("experiment", "convergence_t_ref", e.convergence_t_ref);
  r.integer("experiment", "convergence_n", e.convergence_n);
  r.number("experiment", "convergence_theta_min", e.convergence_theta_min);
  r.integer("experiment", "correlation_t_proxy", e.correlation_t_proxy);
  r.integer("experiment", "correlation_n", e.correlation_n);
  if (auto v = r.raw("experiment", "spatial_offsets")) {
    for (const auto& item : split_list(*v, ',')) {
      const auto parts = split_list(item, ':');
      if (static_cast<int>(parts.size()) != c.dim) {
        throw ConfigError(fmt::format("experiment.spatial_offsets: '{}' needs {} coordinates", item, c.dim));
      }
      Point p(c.dim);
      for (int a = 0; a < c.dim; ++a) p[a] = static_cast<int>(parse_value<long long>("experiment.spatial_offsets", parts[a]));
      e.spatial_offsets.push_back(p);
    }
  } else if (c.dim >= 2) {
    e.spatial_offsets = default_offsets(c.dim);
  }
  r.ints("experiment", "temporal_offsets", e.temporal_offsets);
  r.number("experiment", "ratio_tol", e.ratio_tol);
  r.unknown_keys();

  c.validate();
  c.canonical = canonical_text(c);
  c.digest = sha256_hex(c.canonical);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace polymer
