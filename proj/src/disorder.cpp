#include "polymer/disorder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "polymer/error.hpp"
#include "polymer/rw_kernel.hpp"
#include "polymer/simd/kernels.hpp"

namespace polymer {

std::string family_name(Family f) {
  switch (f) {
    case Family::kRademacher: return "rademacher";
    case Family::kGaussian: return "gaussian";
    case Family::kUniform: return "uniform";
    case Family::kFiniteSupport: return "finite";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "rademacher") return Family::kRademacher;
  if (name == "gaussian") return Family::kGaussian;
  if (name == "uniform") return Family::kUniform;
  if (name == "finite") return Family::kFiniteSupport;
  throw ConfigError(fmt::format("unknown disorder family '{}'", name));
}

DisorderSpec DisorderSpec::rademacher(double beta, std::uint64_t seed) {
  DisorderSpec s;
  s.family = Family::kRademacher;
  s.beta = beta;
  s.seed = seed;
  return s;
}

DisorderSpec DisorderSpec::gaussian(double beta, std::uint64_t seed) {
  DisorderSpec s = rademacher(beta, seed);
  s.family = Family::kGaussian;
  return s;
}

DisorderSpec DisorderSpec::uniform(double a, double beta, std::uint64_t seed) {
  DisorderSpec s = rademacher(beta, seed);
  s.family = Family::kUniform;
  s.half_width = a;
  return s;
}

DisorderSpec DisorderSpec::finite(std::vector<double> values, std::vector<double> weights, double beta,
                                  std::uint64_t seed) {
  DisorderSpec s = rademacher(beta, seed);
  s.family = Family::kFiniteSupport;
  s.values = std::move(values);
  s.weights = std::move(weights);
  return s;
}

void DisorderSpec::validate() const {
  if (!std::isfinite(beta) || beta < 0) throw DomainError("beta must be finite and >= 0");
  if (family == Family::kUniform && !(half_width > 0 && std::isfinite(half_width))) {
    throw DomainError("uniform half width must be positive");
  }
  if (family == Family::kFiniteSupport) {
    if (values.empty() || values.size() != weights.size()) {
      throw DomainError("finite support needs matching nonempty values and weights");
    }
    double total = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || !(weights[i] >= 0)) throw DomainError("invalid finite support atom");
      total += weights[i];
    }
    if (std::fabs(total - 1.0) > 1e-12) throw DomainError(fmt::format("weights sum to {}, not 1", total));
  }
}

double c_beta(const DisorderSpec& spec, int multiplier) {
  spec.validate();
  const double b = multiplier * spec.beta;
  switch (spec.family) {
    case Family::kRademacher: return std::cosh(b);
    case Family::kGaussian: return std::exp(0.5 * b * b);
    case Family::kUniform: {
      const double x = b * spec.half_width;
      return x == 0 ? 1.0 : std::sinh(x) / x;
    }
    case Family::kFiniteSupport: {
      double s = 0;
      for (std::size_t i = 0; i < spec.values.size(); ++i) s += spec.weights[i] * std::exp(b * spec.values[i]);
      return s;
    }
  }
  return 1.0;
}

double lambda_of(const DisorderSpec& spec) {
  double lam;
  if (spec.family == Family::kRademacher) {
    spec.validate();
    lam = std::tanh(spec.beta) * std::tanh(spec.beta);
  } else if (spec.family == Family::kGaussian) {
    spec.validate();
    lam = std::expm1(spec.beta * spec.beta);
  } else {
    const double c1 = c_beta(spec, 1);
    lam = c_beta(spec, 2) / (c1 * c1) - 1.0;
  }
  if (lam < -1e-14) throw DomainError(fmt::format("negative lambda {}", lam));
  return std::max(lam, 0.0);
}

double weak_disorder_margin(const DisorderSpec& spec, int d) {
  if (d < 3) throw DomainError("weak disorder margin needs d >= 3");
  static std::mutex mu;
  static std::map<int, double> alpha_cache;
  double alpha;
  {
    std::lock_guard lock(mu);
    auto it = alpha_cache.find(d);
    if (it == alpha_cache.end()) it = alpha_cache.emplace(d, green_value(d, Point(d), 1e-10).value - 1.0).first;
    alpha = it->second;
  }
  return alpha * lambda_of(spec);
}

double word_to_xi(const DisorderSpec& spec, std::uint64_t word) {
  switch (spec.family) {
    case Family::kRademacher:
      return (word >> 63) ? 1.0 : -1.0;
    case Family::kGaussian:
      return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * word_to_open_unit(word));
    case Family::kUniform:
      return spec.half_width * (2.0 * word_to_open_unit(word) - 1.0);
    case Family::kFiniteSupport: {
      const double u = word_to_open_unit(word);
      double acc = 0;
      for (std::size_t i = 0; i + 1 < spec.values.size(); ++i) {
        acc += spec.weights[i];
        if (u < acc) return spec.values[i];
      }
      return spec.values.back();
    }
  }
  return 0.0;
}

bool Region::contains(const Point& x, int t) const {
  if (t < t0 || t > t1) return false;
  for (int k = 0; k < dim; ++k) {
    if (x[k] < -radius || x[k] > radius) return false;
  }
  return true;
}

bool Region::covers(const Point& x, int reach, int s, int t) const {
  if (s < t0 || t > t1) return false;
  for (int k = 0; k < dim; ++k) {
    if (x[k] - reach < -radius || x[k] + reach > radius) return false;
  }
  return true;
}

namespace {

Philox4x32::Counter cell_counter(const Point& x, int t) {
  const int d = x.dim();
  return {std::uint32_t(x[0]), std::uint32_t(d > 1 ? x[1] : 0), std::uint32_t(d > 2 ? x[2] : 0),
          std::uint32_t(t)};
}

Philox4x32::Key cell_key(std::uint64_t seed, const Point& x) {
  return philox_key(seed, std::uint32_t(x.dim() > 3 ? x[3] : 0));
}

}  // namespace

DisorderField::DisorderField(const DisorderSpec& spec, const Region& region) : spec_(spec), region_(region) {
  spec_.validate();
  if (region.dim < 1 || region.dim > 4) throw DomainError("disorder fields support 1 <= d <= 4");
  if (region.radius < 0 || region.t1 < region.t0) throw DomainError("empty disorder region");
  cb_ = c_beta(spec_, 1);
  w_plus_ = std::exp(spec_.beta) / cb_;
  w_minus_ = std::exp(-spec_.beta) / cb_;
}

DisorderField DisorderField::materialized(const DisorderSpec& spec, const Region& region) {
  DisorderField f(spec, region);
  std::size_t cells = std::size_t(region.t1 - region.t0 + 1);
  for (int k = 0; k < region.dim; ++k) cells *= std::size_t(2 * region.radius + 1);
  check_allocation(cells * sizeof(double), "materialized disorder field");
  f.stored_.resize(cells);
  Point x(region.dim);
  for (int t = region.t0; t <= region.t1; ++t) {
    for (int k = 0; k < region.dim; ++k) x[k] = -region.radius;
    for (;;) {
      f.stored_[f.offset(x, t)] = word_to_xi(spec, philox_word(cell_counter(x, t), cell_key(spec.seed, x)));
      int k = 0;
      for (; k < region.dim; ++k) {
        if (++x[k] <= region.radius) break;
        x[k] = -region.radius;
      }
      if (k >= region.dim) break;
    }
  }
  return f;
}

std::size_t DisorderField::offset(const Point& x, int t) const {
  const std::size_t side = std::size_t(2 * region_.radius + 1);
  std::size_t o = std::size_t(t - region_.t0);
  for (int k = region_.dim - 1; k >= 0; --k) o = o * side + std::size_t(x[k] + region_.radius);
  return o;
}

void DisorderField::require(const Point& x, int t) const {
  if (x.dim() != region_.dim) throw DomainError("point dimension does not match the field");
  if (!region_.contains(x, t)) {
    throw RegionError(fmt::format("cell {} at time {} outside the disorder region", x.str(), t));
  }
}

double DisorderField::xi(const Point& x, int t) const {
  require(x, t);
  if (is_materialized()) return stored_[offset(x, t)];
  return word_to_xi(spec_, philox_word(cell_counter(x, t), cell_key(spec_.seed, x)));
}

double DisorderField::pin_value(double xi, Pin pin) const {
  const double w = std::exp(spec_.beta * xi) / cb_;
  return pin == Pin::kWeight ? w : w - 1.0;
}

double DisorderField::h(const Point& x, int t) const { return pin_value(xi(x, t), Pin::kNoise); }

void DisorderField::fill_row(const Point& first, int t, std::size_t n, Pin pin, double* out) const {
  if (n == 0) return;
  Point last = first;
  last[0] += 2 * int(n - 1);
  require(first, t);
  require(last, t);
  if (is_materialized()) {
    Point x = first;
    for (std::size_t i = 0; i < n; ++i, x[0] += 2) out[i] = pin_value(stored_[offset(x, t)], pin);
    return;
  }
  thread_local std::vector<std::uint64_t> words;
  words.resize(n);
  const auto c = cell_counter(first, t);
  simd::active_kernels().philox_row(cell_key(spec_.seed, first), std::int32_t(c[0]), 2, c[1], c[2], c[3], n,
                                    words.data());
  if (spec_.family == Family::kRademacher) {
    const double up = pin == Pin::kWeight ? w_plus_ : w_plus_ - 1.0;
    const double down = pin == Pin::kWeight ? w_minus_ : w_minus_ - 1.0;
    for (std::size_t i = 0; i < n; ++i) out[i] = (words[i] >> 63) ? up : down;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = pin_value(word_to_xi(spec_, words[i]), pin);
}

void DisorderField::set_xi(const Point& x, int t, double value) {
  if (!is_materialized()) throw DomainError("set_xi needs a materialized field");
  require(x, t);
  stored_[offset(x, t)] = value;
}

void DisorderField::fill_slab(int t, double value) {
  if (!is_materialized()) throw DomainError("fill_slab needs a materialized field");
  if (t < region_.t0 || t > region_.t1) throw RegionError("slab outside the disorder region");
  const std::size_t per = stored_.size() / std::size_t(region_.t1 - region_.t0 + 1);
  std::fill_n(stored_.begin() + std::ptrdiff_t(per * std::size_t(t - region_.t0)), per, value);
}

namespace {

constexpr char kFieldMagic[4] = {'P', 'L', 'D', 'F'};
constexpr std::uint32_t kFieldVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "binary formats assume little endian");
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw DomainError("truncated disorder dump");
  return v;
}

}  // namespace

void DisorderField::dump(std::ostream& os) const {
  os.write(kFieldMagic, 4);
  put<std::uint32_t>(os, kFieldVersion);
  put<std::int32_t>(os, region_.dim);
  put<std::int32_t>(os, region_.radius);
  put<std::int32_t>(os, region_.t0);
  put<std::int32_t>(os, region_.t1);
  put<std::uint32_t>(os, std::uint32_t(spec_.family));
  put<double>(os, spec_.beta);
  put<std::uint64_t>(os, spec_.seed);
  put<double>(os, spec_.half_width);
  put<std::uint32_t>(os, std::uint32_t(spec_.values.size()));
  for (double v : spec_.values) put<double>(os, v);
  for (double w : spec_.weights) put<double>(os, w);
  if (is_materialized()) {
    for (double v : stored_) put<double>(os, v);
  } else {
    const DisorderField m = materialized(spec_, region_);
    for (double v : m.stored_) put<double>(os, v);
  }
}

DisorderField DisorderField::load(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kFieldMagic, 4) != 0) throw DomainError("not a disorder dump");
  if (get<std::uint32_t>(is) != kFieldVersion) throw DomainError("unsupported disorder dump version");
  Region r;
  r.dim = get<std::int32_t>(is);
  r.radius = get<std::int32_t>(is);
  r.t0 = get<std::int32_t>(is);
  r.t1 = get<std::int32_t>(is);
  DisorderSpec s;
  s.family = Family(get<std::uint32_t>(is));
  s.beta = get<double>(is);
  s.seed = get<std::uint64_t>(is);
  s.half_width = get<double>(is);
  const auto nv = get<std::uint32_t>(is);
  s.values.resize(nv);
  s.weights.resize(nv);
  for (auto& v : s.values) v = get<double>(is);
  for (auto& w : s.weights) w = get<double>(is);
  DisorderField f(s, r);
  std::size_t cells = std::size_t(r.t1 - r.t0 + 1);
  for (int k = 0; k < r.dim; ++k) cells *= std::size_t(2 * r.radius + 1);
  check_allocation(cells * sizeof(double), "materialized disorder field");
  f.stored_.resize(cells);
  for (auto& v : f.stored_) v = get<double>(is);
  return f;
}

}  // namespace polymer
