#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>

#include "renorm/grid.hpp"

namespace renorm::detail {

/// Process-wide cache of FFTW plans keyed by (dim, n, direction).
///
/// Planning goes through a mutex because the FFTW planner is not reentrant;
/// execution uses the new-array interface and is safe to call concurrently.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

  fftw_plan plan(const Grid& grid, int sign) {
    const auto key = std::make_tuple(grid.dim(), grid.n(), sign);
    std::scoped_lock lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* buf = fftw_alloc_complex(grid.size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = grid.dim() == 1 ? fftw_plan_dft_1d(grid.n(), buf, buf, sign, flags)
                                  : fftw_plan_dft_2d(grid.n(), grid.n(), buf, buf, sign, flags);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

  ~FftPlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  FftPlanCache() = default;
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

/// In-place unnormalized transform of `data` (length grid.size()).
inline void fft_inplace(const Grid& grid, std::span<std::complex<double>> data, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(FftPlanCache::instance().plan(grid, sign), ptr, ptr);
}

}  // namespace renorm::detail
