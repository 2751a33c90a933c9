#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace polymer {

inline constexpr int kMaxDim = 6;

// A point of Z^d, 1 <= d <= kMaxDim.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<int> coords);

  // value * e_{axis}
  static Point axis(int dim, int value, int axis = 0);

  int dim() const { return dim_; }
  int operator[](int k) const { return c_[k]; }
  int& operator[](int k) { return c_[k]; }

  int l1() const;
  double l2() const;
  int parity() const { return l1() & 1; }

  Point operator-() const;
  friend Point operator+(Point a, const Point& b);
  friend Point operator-(Point a, const Point& b);
  friend bool operator==(const Point& a, const Point& b);

  std::string str() const;

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> c_{};
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Points within L1 distance `radius` of the axis-aligned box [lo, hi].
// A single point is the box lo == hi.
struct Cone {
  Point lo;
  Point hi;
  int radius = 0;

  static Cone ball(const Point& center, int radius) { return {center, center, radius}; }
  bool contains(const Point& u) const;
  Cone shrunk() const { return {lo, hi, radius - 1}; }
  Cone grown() const { return {lo, hi, radius + 1}; }
};

// Process-wide limit on the size of a single dense allocation (grids,
// kernel tables, materialized fields). Exceeding it raises ResourceError.
void set_memory_budget(std::size_t bytes);
std::size_t memory_budget();
void check_allocation(std::size_t bytes, const char* what);

// Values on one parity class {u : |u|_1 = parity mod 2} of the cube
// [-R, R]^d, stored without the cells of the other class.
//
// Layout: rows are indexed by (u_2, ..., u_d) in [-R-1, R+1]^{d-1}; the
// outermost rows are zero guards. Each row holds R + 2 slots; slot 0 is a
// zero guard and slot k + 1 holds u_1 = 2k + e - R, where
// e = (parity - (u_2 + ... + u_d) + R) mod 2.
class ParityGrid {
 public:
  ParityGrid() = default;
  ParityGrid(int dim, int radius, int parity);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int parity() const { return parity_; }

  std::size_t row_count() const { return rows_; }
  std::size_t row_length() const { return row_len_; }
  std::size_t row_stride(int axis) const { return strides_[axis]; }

  // Row index for u_2..u_d, each in [-R-1, R+1].
  std::size_t row_index(const Point& u) const;
  // Slot offset e of a row whose coordinate sum (u_2 + ... + u_d) is `s`.
  int row_shift(int s) const;

  // Pointer to slot k = 0 of a row; index -1 is the guard.
  double* row(std::size_t r) { return data_.data() + r * row_len_ + 1; }
  const double* row(std::size_t r) const { return data_.data() + r * row_len_ + 1; }

  bool holds(const Point& u) const;  // inside the cube and on this parity class
  double value(const Point& u) const;  // zero when !holds(u)
  void set(const Point& u, double v);

  void clear();
  double sum() const;
  double sum_squares() const;
  void scale(double a);
  // this += a * other (same shape and parity)
  void add_scaled(const ParityGrid& other, double a);
  double dot(const ParityGrid& other) const;

  // Visits every stored cell of the class (including zeros) as f(u, value).
  template <class F>
  void for_each(F&& f) const;

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

 private:
  int dim_ = 0;
  int radius_ = 0;
  int parity_ = 0;
  std::size_t row_len_ = 0;
  std::size_t rows_ = 0;
  std::array<std::size_t, kMaxDim> strides_{};
  std::vector<double> data_;
};

inline int mod2(int v) { return v & 1; }

template <class F>
void ParityGrid::for_each(F&& f) const {
  const int R = radius_;
  Point u(dim_);
  for (int k = 1; k < dim_; ++k) u[k] = -R;
  for (;;) {
    int s = 0;
    for (int k = 1; k < dim_; ++k) s += u[k];
    const int e = row_shift(s);
    const double* r = row(row_index(u));
    for (int k = 0; 2 * k + e - R <= R; ++k) {
      u[0] = 2 * k + e - R;
      f(static_cast<const Point&>(u), r[k]);
    }
    int k = 1;
    for (; k < dim_; ++k) {
      if (++u[k] <= R) break;
      u[k] = -R;
    }
    if (k >= dim_) break;
  }
}

}  // namespace polymer
