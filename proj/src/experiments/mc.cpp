#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "polymer/error.hpp"
#include "polymer/experiments.hpp"
#include "polymer/lattice.hpp"

namespace polymer {

std::atomic<bool>& cancel_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

McSamples McSamples::run(const Estimator& f, std::size_t n, std::uint64_t seed, int workers) {
  if (n < 2) throw DomainError("Monte-Carlo run needs n >= 2");
  McSamples out;
  // Index 0 fixes the row width; it also runs on the calling thread so
  // errors surface before the pool starts.
  const std::vector<double> first = f(seed);
  if (first.empty()) throw DomainError("estimator returned no values");
  out.width_ = first.size();
  check_allocation(n * out.width_ * sizeof(double), "Monte-Carlo samples");
  out.data_.assign(n * out.width_, 0.0);
  std::copy(first.begin(), first.end(), out.data_.begin());
  std::vector<char> done(n, 0);
  done[0] = 1;

  std::atomic<std::size_t> next{1};
  std::mutex err_mu;
  std::exception_ptr error;
  const auto work = [&] {
    for (;;) {
      if (cancel_flag().load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        const std::vector<double> v = f(seed + i);
        if (v.size() != out.width_) throw DomainError("estimator returned rows of varying width");
        std::copy(v.begin(), v.end(), out.data_.begin() + i * out.width_);
        done[i] = 1;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(n - 1)));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int k = 0; k < pool; ++k) threads.emplace_back(work);
    for (auto& th : threads) th.join();
  }
  if (error) std::rethrow_exception(error);
  // Only the completed prefix is reported.
  out.done_ = 0;
  while (out.done_ < n && done[out.done_]) ++out.done_;
  out.complete_ = out.done_ == n;
  return out;
}

std::pair<double, double> McSamples::stat(const std::function<double(const double*)>& g) const {
  if (done_ == 0) return {std::nan(""), std::nan("")};
  CompensatedSum s;
  for (std::size_t i = 0; i < done_; ++i) s.add(g(&data_[i * width_]));
  const double mean = s.value() / static_cast<double>(done_);
  if (done_ < 2) return {mean, std::nan("")};
  CompensatedSum ss;
  for (std::size_t i = 0; i < done_; ++i) {
    const double r = g(&data_[i * width_]) - mean;
    ss.add(r * r);
  }
  const double var = ss.value() / static_cast<double>(done_ - 1);
  return {mean, std::sqrt(var / static_cast<double>(done_))};
}

std::pair<double, double> McSamples::stat(std::size_t k) const {
  return stat([k](const double* row) { return row[k]; });
}

EstimatorReport mc_expectation(const std::string& name, const std::function<double(std::uint64_t)>& f,
                               std::size_t n, std::uint64_t seed, int workers) {
  const McSamples s = McSamples::run([&](std::uint64_t sd) { return std::vector<double>{f(sd)}; }, n, seed, workers);
  const auto [mean, se] = s.stat(0);
  EstimatorReport r;
  r.name = name;
  r.n = s.n();
  r.mean = mean;
  r.stderr_ = se;
  r.seed = seed;
  return r;
}

}  // namespace polymer
