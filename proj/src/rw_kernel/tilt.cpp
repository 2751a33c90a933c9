#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "polymer/error.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

std::vector<double> tilt_map(std::span<const double> phi) {
  double S = 0;
  for (double x : phi) S += std::cosh(x);
  std::vector<double> f(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) f[k] = std::sinh(phi[k]) / S;
  return f;
}

namespace {

double sup_residual(std::span<const double> phi, const std::vector<double>& v) {
  const auto f = tilt_map(phi);
  double r = 0;
  for (std::size_t k = 0; k < v.size(); ++k) r = std::max(r, std::fabs(f[k] - v[k]));
  return r;
}

}  // namespace

TiltState tilt_solve(const Point& z, int t, double tol) {
  if (t < 1) throw DomainError("tilt_solve needs t >= 1");
  const int d = z.dim();
  if (double(z.l1()) > kTiltMaxSpeed * t) {
    throw DomainError(fmt::format("tilt_solve: |z|_1 / t = {:.4f} outside the accepted region (<= {})",
                                  double(z.l1()) / t, kTiltMaxSpeed));
  }
  std::vector<double> v(d), phi(d, 0.0);
  for (int k = 0; k < d; ++k) v[k] = double(z[k]) / t;
  TiltState st{z, t, phi, sup_residual(phi, v), 0};
  Eigen::MatrixXd J(d, d);
  Eigen::VectorXd r(d);
  while (st.residual > tol) {
    if (++st.iterations > 200) {
      throw ConvergenceError(fmt::format("tilt_solve: residual {:.3g} after 200 iterations", st.residual));
    }
    double S = 0;
    for (double x : phi) S += std::cosh(x);
    const auto f = tilt_map(phi);
    for (int k = 0; k < d; ++k) {
      r[k] = f[k] - v[k];
      for (int m = 0; m < d; ++m) {
        J(k, m) = (k == m ? std::cosh(phi[k]) / S : 0.0) - std::sinh(phi[k]) * std::sinh(phi[m]) / (S * S);
      }
    }
    const Eigen::VectorXd step = J.partialPivLu().solve(r);
    double damp = 1.0;
    std::vector<double> trial(d);
    double res = 0;
    for (;;) {
      for (int k = 0; k < d; ++k) trial[k] = phi[k] - damp * step[k];
      res = sup_residual(trial, v);
      if (res < st.residual || damp < 1e-12) break;
      damp *= 0.5;
    }
    if (!(res < st.residual)) {
      if (st.residual <= 1e-15) break;
      throw ConvergenceError(fmt::format("tilt_solve: stalled at residual {:.3g}", st.residual));
    }
    phi = trial;
    st.residual = res;
  }
  if (st.residual > tol) throw ConvergenceError("tilt_solve: tolerance not reached");
  st.phi = phi;
  return st;
}

TiltCalibration calibrate_tilt(int d, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TiltCalibration cal{INFINITY, 0.0};
  std::vector<double> phi(d);
  for (int i = 0; i < samples; ++i) {
    double n2 = 0;
    for (auto& x : phi) {
      x = normal(rng);
      n2 += x * x;
    }
    for (auto& x : phi) x /= std::sqrt(n2);
    const auto f = tilt_map(phi);
    double fn = 0;
    for (double x : f) fn += x * x;
    cal.rho1 = std::min(cal.rho1, std::sqrt(fn));
    // phi scaled to radius s in (0, 1]: |phi| / |F(phi)|
    for (double s : {0.05, 0.25, 0.5, 0.75, 1.0}) {
      std::vector<double> p(phi);
      for (auto& x : p) x *= s;
      const auto g = tilt_map(p);
      double gn = 0;
      for (double x : g) gn += x * x;
      cal.rho2 = std::max(cal.rho2, s / std::sqrt(gn));
    }
  }
  return cal;
}

TiltedMass tilted_mass(std::span<const double> phi, int t, const KernelTable* table) {
  if (t < 0) throw DomainError("tilted_mass needs t >= 0");
  const int d = int(phi.size());
  double base = 0;
  for (double x : phi) base += std::cosh(x);
  base /= d;
  TiltedMass m;
  m.closed = std::pow(base, t);
  m.lattice = NAN;
  if (!table) return m;
  if (table->dim() != d) throw DomainError("tilted_mass: table dimension mismatch");
  CompensatedSum acc;
  table->for_each(t, [&](const Point& y, double q) {
    if (q == 0.0) return;
    double e = 0;
    for (int k = 0; k < d; ++k) e += phi[k] * y[k];
    acc.add(q * std::exp(e));
  });
  m.lattice = acc.value();
  m.rel_diff = std::fabs(m.lattice - m.closed) / m.closed;
  if (m.rel_diff > 1e-10) {
    throw DomainError(fmt::format("tilted_mass: lattice sum {} differs from closed form {}", m.lattice, m.closed));
  }
  return m;
}

namespace {

using cplx = std::complex<double>;

cplx ipow(cplx b, int e) {
  cplx r = 1.0;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

// Phi(theta) = d^{-1} sum_j cosh(phi_j + i theta_j)
cplx char_fn(std::span<const double> phi, const double* theta) {
  cplx s = 0;
  for (std::size_t j = 0; j < phi.size(); ++j) s += std::cosh(cplx(phi[j], theta[j]));
  return s / double(phi.size());
}

}  // namespace

FourierCheck fourier_identity_check(const Point& z, int t, std::span<const double> phi, const KernelTable& table) {
  const int d = z.dim();
  if (int(phi.size()) != d) throw DomainError("fourier_identity_check: dimension mismatch");
  FourierCheck fc;
  double e = 0;
  for (int k = 0; k < d; ++k) e += phi[k] * z[k];
  fc.lhs = table.q(t, z) * std::exp(e);
  const int N = 2 * t + 2;
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= std::size_t(N);
  check_allocation(cells * sizeof(cplx), "Fourier quadrature grid");
  std::vector<int> m(d, 0);
  double theta[kMaxDim];
  cplx acc = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    double dot = 0;
    for (int k = 0; k < d; ++k) {
      theta[k] = 2 * M_PI * m[k] / N;
      dot += theta[k] * z[k];
    }
    acc += ipow(char_fn(phi, theta), t) * std::polar(1.0, -dot);
    for (int k = 0; k < d; ++k) {
      if (++m[k] < N) break;
      m[k] = 0;
    }
  }
  acc /= double(cells);
  fc.rhs = acc.real();
  fc.rhs_imag = acc.imag();
  return fc;
}

void fourier_identity_grid(int d, int t, std::span<const double> phi, std::vector<double>& re,
                           std::vector<double>& im) {
  if (int(phi.size()) != d) throw DomainError("fourier_identity_grid: dimension mismatch");
  const int N = 2 * t + 2;
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= std::size_t(N);
  check_allocation(2 * cells * sizeof(cplx), "Fourier quadrature grid");
  std::vector<cplx> a(cells);
  {
    std::vector<int> m(d, 0);
    double theta[kMaxDim];
    for (std::size_t c = 0; c < cells; ++c) {
      for (int k = 0; k < d; ++k) theta[k] = 2 * M_PI * m[k] / N;
      a[c] = ipow(char_fn(phi, theta), t);
      for (int k = 0; k < d; ++k) {
        if (++m[k] < N) break;
        m[k] = 0;
      }
    }
  }
  // Inverse transform along each axis; index j stands for z = j - t (mod N).
  std::vector<cplx> tw(std::size_t(N) * N);
  for (int j = 0; j < N; ++j) {
    for (int m = 0; m < N; ++m) tw[std::size_t(j) * N + m] = std::polar(1.0, -2 * M_PI * double((j - t) * m % N) / N);
  }
  std::vector<cplx> b(cells), line(N);
  std::size_t stride = 1;
  for (int axis = 0; axis < d; ++axis) {
    for (std::size_t base = 0; base < cells; ++base) {
      if ((base / stride) % N != 0) continue;
      for (int m = 0; m < N; ++m) line[m] = a[base + std::size_t(m) * stride];
      for (int j = 0; j < N; ++j) {
        cplx s = 0;
        for (int m = 0; m < N; ++m) s += tw[std::size_t(j) * N + m] * line[m];
        b[base + std::size_t(j) * stride] = s / double(N);
      }
    }
    a.swap(b);
    stride *= std::size_t(N);
  }
  // Keep z in [-t, t]^d, i.e. j in [0, 2t] per axis.
  const int side = 2 * t + 1;
  std::size_t out_cells = 1;
  for (int k = 0; k < d; ++k) out_cells *= std::size_t(side);
  re.assign(out_cells, 0.0);
  im.assign(out_cells, 0.0);
  std::vector<int> j(d, 0);
  for (std::size_t c = 0; c < out_cells; ++c) {
    std::size_t src = 0, s = 1;
    for (int k = 0; k < d; ++k) {
      src += std::size_t(j[k]) * s;
      s *= std::size_t(N);
    }
    re[c] = a[src].real();
    im[c] = a[src].imag();
    for (int k = 0; k < d; ++k) {
      if (++j[k] < side) break;
      j[k] = 0;
    }
  }
}

}  // namespace polymer
