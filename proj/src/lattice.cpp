#include "polymer/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numeric>

#include <fmt/format.h>

#include "polymer/error.hpp"

namespace polymer {

Point::Point(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw DomainError(fmt::format("dimension {} not in [1, {}]", dim, kMaxDim));
}

Point::Point(std::initializer_list<int> coords) : Point(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Point Point::axis(int dim, int value, int axis) {
  Point p(dim);
  p[axis] = value;
  return p;
}

int Point::l1() const {
  int s = 0;
  for (int k = 0; k < dim_; ++k) s += std::abs(c_[k]);
  return s;
}

double Point::l2() const {
  double s = 0;
  for (int k = 0; k < dim_; ++k) s += double(c_[k]) * c_[k];
  return std::sqrt(s);
}

Point Point::operator-() const {
  Point p(*this);
  for (int k = 0; k < dim_; ++k) p.c_[k] = -c_[k];
  return p;
}

Point operator+(Point a, const Point& b) {
  for (int k = 0; k < a.dim_; ++k) a.c_[k] += b.c_[k];
  return a;
}

Point operator-(Point a, const Point& b) {
  for (int k = 0; k < a.dim_; ++k) a.c_[k] -= b.c_[k];
  return a;
}

bool operator==(const Point& a, const Point& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

std::string Point::str() const {
  std::string s = "(";
  for (int k = 0; k < dim_; ++k) s += fmt::format("{}{}", k ? "," : "", c_[k]);
  return s + ")";
}

bool Cone::contains(const Point& u) const {
  int dist = 0;
  for (int k = 0; k < u.dim(); ++k) {
    if (u[k] < lo[k]) dist += lo[k] - u[k];
    else if (u[k] > hi[k]) dist += u[k] - hi[k];
  }
  return dist <= radius;
}

namespace {
std::atomic<std::size_t> g_budget{std::size_t(4) << 30};
}

void set_memory_budget(std::size_t bytes) { g_budget = bytes; }
std::size_t memory_budget() { return g_budget; }

void check_allocation(std::size_t bytes, const char* what) {
  if (bytes > g_budget) {
    throw ResourceError(fmt::format("{} needs {} bytes, budget is {}", what, bytes, std::size_t(g_budget)));
  }
}

ParityGrid::ParityGrid(int dim, int radius, int parity)
    : dim_(dim), radius_(radius), parity_(parity & 1) {
  if (dim < 1 || dim > kMaxDim) throw DomainError(fmt::format("dimension {} not in [1, {}]", dim, kMaxDim));
  if (radius < 0) throw DomainError("negative grid radius");
  row_len_ = std::size_t(radius) + 2;
  const std::size_t side = 2 * std::size_t(radius) + 3;
  rows_ = 1;
  for (int k = 1; k < dim; ++k) {
    strides_[k] = rows_;
    rows_ *= side;
  }
  check_allocation(rows_ * row_len_ * sizeof(double), "parity grid");
  data_.assign(rows_ * row_len_, 0.0);
}

std::size_t ParityGrid::row_index(const Point& u) const {
  std::size_t r = 0;
  for (int k = 1; k < dim_; ++k) r += std::size_t(u[k] + radius_ + 1) * strides_[k];
  return r;
}

int ParityGrid::row_shift(int s) const { return mod2(parity_ - s + radius_); }

bool ParityGrid::holds(const Point& u) const {
  for (int k = 0; k < dim_; ++k) {
    if (u[k] < -radius_ || u[k] > radius_) return false;
  }
  return mod2(u.l1()) == parity_;
}

double ParityGrid::value(const Point& u) const {
  if (!holds(u)) return 0.0;
  int s = 0;
  for (int k = 1; k < dim_; ++k) s += u[k];
  const int e = row_shift(s);
  return row(row_index(u))[(u[0] + radius_ - e) / 2];
}

void ParityGrid::set(const Point& u, double v) {
  if (!holds(u)) throw DomainError(fmt::format("point {} not stored in this grid", u.str()));
  int s = 0;
  for (int k = 1; k < dim_; ++k) s += u[k];
  const int e = row_shift(s);
  row(row_index(u))[(u[0] + radius_ - e) / 2] = v;
}

void ParityGrid::clear() { std::fill(data_.begin(), data_.end(), 0.0); }

double ParityGrid::sum() const {
  CompensatedSum acc;
  for (double v : data_) acc.add(v);
  return acc.value();
}

double ParityGrid::sum_squares() const {
  CompensatedSum acc;
  for (double v : data_) acc.add(v * v);
  return acc.value();
}

void ParityGrid::scale(double a) {
  for (double& v : data_) v *= a;
}

void ParityGrid::add_scaled(const ParityGrid& other, double a) {
  if (other.data_.size() != data_.size() || other.parity_ != parity_) throw DomainError("grid shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * other.data_[i];
}

double ParityGrid::dot(const ParityGrid& other) const {
  if (other.data_.size() != data_.size() || other.parity_ != parity_) throw DomainError("grid shape mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < data_.size(); ++i) acc.add(data_[i] * other.data_[i]);
  return acc.value();
}

}  // namespace polymer
