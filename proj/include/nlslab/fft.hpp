#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "nlslab/grid.hpp"

namespace nlslab::fft {

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (dimension, n, direction), in place and
// unaligned so that any std::vector<std::complex<double>> buffer can be used.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int d, std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(d, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[3] = {static_cast<int>(n), static_cast<int>(n), static_cast<int>(n)};
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= n;
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_dft(d, dims, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized in-place DFT, sum_j a_j exp(-2 pi i j k / n), FFT ordering.
inline void forward_raw(const Grid& g, std::span<cplx> data) {
  auto plan = detail::PlanCache::instance().get(g.dimension(), g.points_per_axis(), FFTW_FORWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

/// Unnormalized in-place inverse DFT (no 1/N factor), FFT ordering.
inline void backward_raw(const Grid& g, std::span<cplx> data) {
  auto plan = detail::PlanCache::instance().get(g.dimension(), g.points_per_axis(), FFTW_BACKWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

/// |xi|^2 for each entry in FFT ordering.
inline std::vector<double> xi_squared_fft_order(const Grid& g) {
  const std::size_t n = g.points_per_axis();
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) {
    long k = i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
    double xi = g.frequency_spacing() * static_cast<double>(k);
    axis[i] = xi * xi;
  }
  std::vector<double> out(g.size());
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    auto idx = g.unflatten(flat);
    double s = 0.0;
    for (int a = 0; a < g.dimension(); ++a) s += axis[idx[a]];
    out[flat] = s;
  }
  return out;
}

}  // namespace nlslab::fft
