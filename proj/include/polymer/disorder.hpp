#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polymer/lattice.hpp"
#include "polymer/philox.hpp"

namespace polymer {

enum class Family { kRademacher, kGaussian, kUniform, kFiniteSupport };

std::string family_name(Family f);
Family parse_family(const std::string& name);

struct DisorderSpec {
  Family family = Family::kRademacher;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double half_width = 1.0;      // kUniform: xi ~ U(-a, a)
  std::vector<double> values;   // kFiniteSupport
  std::vector<double> weights;  // kFiniteSupport, summing to 1

  static DisorderSpec rademacher(double beta, std::uint64_t seed = 0);
  static DisorderSpec gaussian(double beta, std::uint64_t seed = 0);
  static DisorderSpec uniform(double a, double beta, std::uint64_t seed = 0);
  static DisorderSpec finite(std::vector<double> values, std::vector<double> weights, double beta,
                             std::uint64_t seed = 0);

  void validate() const;
};

// <exp(multiplier * beta * xi)>
double c_beta(const DisorderSpec& spec, int multiplier = 1);
// c(2 beta) / c(beta)^2 - 1 = <h^2>
double lambda_of(const DisorderSpec& spec);
// alpha_d * lambda; weak disorder requires a value below 1.
double weak_disorder_margin(const DisorderSpec& spec, int d);

// Maps one 64-bit cell word to a sample of xi.
double word_to_xi(const DisorderSpec& spec, std::uint64_t word);

// Space box [-radius, radius]^dim times the time interval [t0, t1].
struct Region {
  int dim = 3;
  int radius = 0;
  int t0 = 0;
  int t1 = 0;

  bool contains(const Point& x, int t) const;
  // Every point within L1 distance `reach` of x at times [s, t].
  bool covers(const Point& x, int reach, int s, int t) const;
};

enum class Pin {
  kWeight,  // 1 + h
  kNoise,   // h
};

// A realization of xi on a region. Values are pure functions of
// (seed, x, t): cell (x, t) consumes the Philox output for counter
// (x1, x2, x3, t) under key (seed, x4). A materialized field stores xi
// explicitly (for replay and for hand-constructed environments).
class DisorderField {
 public:
  DisorderField(const DisorderSpec& spec, const Region& region);

  static DisorderField materialized(const DisorderSpec& spec, const Region& region);

  const DisorderSpec& spec() const { return spec_; }
  const Region& region() const { return region_; }
  int dim() const { return region_.dim; }
  bool is_materialized() const { return !stored_.empty(); }

  double xi(const Point& x, int t) const;
  double h(const Point& x, int t) const;
  // 1 + h = exp(beta xi) / c(beta) > 0
  double weight(const Point& x, int t) const { return 1.0 + h(x, t); }

  // out[i] = pin value at (first + 2 i e_1, t) for i < n; the cells must lie
  // inside the region.
  void fill_row(const Point& first, int t, std::size_t n, Pin pin, double* out) const;

  // Materialized fields only.
  void set_xi(const Point& x, int t, double xi);
  void fill_slab(int t, double xi);

  // Binary replay format, see docs/formats.md.
  void dump(std::ostream& os) const;
  static DisorderField load(std::istream& is);

 private:
  std::size_t offset(const Point& x, int t) const;
  double pin_value(double xi, Pin pin) const;
  void require(const Point& x, int t) const;

  DisorderSpec spec_;
  Region region_;
  double cb_ = 1.0;
  double w_plus_ = 1.0, w_minus_ = 1.0;  // Rademacher fast path
  std::vector<double> cum_;              // finite support
  std::vector<double> stored_;
};

}  // namespace polymer
