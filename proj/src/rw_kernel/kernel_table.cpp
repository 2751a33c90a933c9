#include <algorithm>
#include <bit>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "polymer/error.hpp"
#include "polymer/evolve.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

std::size_t KernelTable::block_rows(int t) const {
  std::size_t rows = 1;
  for (int k = 1; k < d_; ++k) rows *= std::size_t(2 * t + 1);
  return rows;
}

KernelTable::KernelTable(int d, int t_max) : d_(d), t_max_(t_max) {
  if (d < 1 || d > kMaxDim) throw DomainError(fmt::format("dimension {} not in [1, {}]", d, kMaxDim));
  if (t_max < 0) throw DomainError("negative horizon");
  offsets_.resize(std::size_t(t_max) + 2);
  offsets_[0] = 0;
  for (int t = 0; t <= t_max; ++t) offsets_[t + 1] = offsets_[t] + block_rows(t) * std::size_t(t + 1);
  check_allocation(offsets_.back() * sizeof(double), "kernel table");

  ParityGrid grid[2] = {ParityGrid(d, t_max, 0), ParityGrid(d, t_max, 1)};
  check_allocation(2 * grid[0].raw().size() * sizeof(double), "kernel table work grids");
  data_.assign(offsets_.back(), 0.0);
  grid[0].set(Point(d), 1.0);

  const Point origin(d);
  for (int t = 0; t <= t_max; ++t) {
    const ParityGrid& g = grid[t & 1];
    if (t > 0) diffuse_step(grid[(t - 1) & 1], grid[t & 1], Cone::ball(origin, t));
    // Copy rows of the work grid into block t.
    double* out = data_.data() + offsets_[t];
    Point z(d);
    for (int k = 1; k < d; ++k) z[k] = -t;
    std::size_t r = 0;
    for (;;) {
      int s = 0;
      for (int k = 1; k < d; ++k) s += z[k];
      const int e = s & 1;
      const int eg = g.row_shift(s);
      const int shift = (e - t + t_max - eg) / 2;
      const double* src = g.row(g.row_index(z)) + shift;
      for (int k = 0; 2 * k + e - t <= t; ++k) out[r * std::size_t(t + 1) + std::size_t(k)] = src[k];
      ++r;
      int k = 1;
      for (; k < d; ++k) {
        if (++z[k] <= t) break;
        z[k] = -t;
      }
      if (k >= d) break;
    }
    // Make the symmetry group act exactly: every cell takes the value of its
    // representative with sorted absolute coordinates.
    double* blk = data_.data() + offsets_[t];
    for_each(t, [&](const Point& u, double) {
      Point c(d);
      for (int k = 0; k < d; ++k) c[k] = std::abs(u[k]);
      std::sort(&c[0], &c[0] + d, std::greater<int>());
      blk[index(t, u) - offsets_[t]] = data_[index(t, c)];
    });
  }
}

std::size_t KernelTable::index(int t, const Point& z) const {
  const std::size_t side = std::size_t(2 * t + 1);
  std::size_t r = 0;
  int s = 0;
  for (int k = d_ - 1; k >= 1; --k) {
    r = r * side + std::size_t(z[k] + t);
    s += z[k];
  }
  const int e = s & 1;
  return offsets_[t] + r * std::size_t(t + 1) + std::size_t((z[0] + t - e) / 2);
}

double KernelTable::q(int t, const Point& z) const {
  if (t < 0 || t > t_max_) throw DomainError(fmt::format("time {} outside table horizon {}", t, t_max_));
  if (z.dim() != d_) throw DomainError("point dimension does not match the table");
  if (z.l1() > t || ((z.l1() ^ t) & 1)) return 0.0;
  return data_[index(t, z)];
}

std::span<const double> KernelTable::block(int t) const {
  if (t < 0 || t > t_max_) throw DomainError(fmt::format("time {} outside table horizon {}", t, t_max_));
  return {data_.data() + offsets_[t], offsets_[t + 1] - offsets_[t]};
}

double KernelTable::sum(int t) const {
  CompensatedSum acc;
  for (double v : block(t)) acc.add(v);
  return acc.value();
}

double KernelTable::sum_squares(int t) const {
  CompensatedSum acc;
  for (double v : block(t)) acc.add(v * v);
  return acc.value();
}

namespace {
constexpr char kTableMagic[4] = {'P', 'L', 'K', 'T'};
static_assert(std::endian::native == std::endian::little, "binary formats assume little endian");
}  // namespace

void KernelTable::save(std::ostream& os) const {
  os.write(kTableMagic, 4);
  const std::uint32_t version = kLayoutVersion;
  const std::int32_t d = d_, tm = t_max_;
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&d), 4);
  os.write(reinterpret_cast<const char*>(&tm), 4);
  os.write(reinterpret_cast<const char*>(data_.data()), std::streamsize(data_.size() * sizeof(double)));
}

KernelTable KernelTable::load(std::istream& is) {
  char magic[4];
  std::uint32_t version = 0;
  std::int32_t d = 0, tm = 0;
  if (!is.read(magic, 4) || std::memcmp(magic, kTableMagic, 4) != 0) throw DomainError("not a kernel table cache");
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&d), 4);
  is.read(reinterpret_cast<char*>(&tm), 4);
  if (!is || version != kLayoutVersion) throw DomainError("unsupported kernel table layout");
  if (d < 1 || d > kMaxDim || tm < 0) throw DomainError("corrupt kernel table header");
  KernelTable k;
  k.d_ = d;
  k.t_max_ = tm;
  k.offsets_.resize(std::size_t(tm) + 2);
  for (int t = 0; t <= tm; ++t) k.offsets_[t + 1] = k.offsets_[t] + k.block_rows(t) * std::size_t(t + 1);
  check_allocation(k.offsets_.back() * sizeof(double), "kernel table");
  k.data_.resize(k.offsets_.back());
  if (!is.read(reinterpret_cast<char*>(k.data_.data()), std::streamsize(k.data_.size() * sizeof(double)))) {
    throw DomainError("truncated kernel table cache");
  }
  return k;
}

void KernelTable::write_csv(std::ostream& os, int t_lo, int t_hi) const {
  os << "t";
  for (int k = 0; k < d_; ++k) os << ",z" << (k + 1);
  os << ",q\n";
  for (int t = std::max(t_lo, 0); t <= std::min(t_hi, t_max_); ++t) {
    for_each(t, [&](const Point& z, double v) {
      if (v == 0.0) return;
      os << t;
      for (int k = 0; k < d_; ++k) os << ',' << z[k];
      os << ',' << fmt::format("{:.17g}", v) << '\n';
    });
  }
}

}  // namespace polymer
