#ifndef SNLS_DETAIL_FFT_HPP
#define SNLS_DETAIL_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>

namespace snls::detail {

// Process-wide FFTW plan cache. Planning is serialized; execution goes through
// the new-array interface, which FFTW documents as thread-safe. Plans are made
// with FFTW_ESTIMATE so results are deterministic run to run.
class PlanCache {
public:
  enum class Kind { Dft3d, DftLastAxis, Dst2, Dst3, Dct3 };
  using Key = std::tuple<Kind, std::size_t, std::size_t, std::size_t, int>;

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  fftw_plan get(Kind kind, std::size_t n0, std::size_t n1, std::size_t n2, int sign) {
    const Key key{kind, n0, n1, n2, sign};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_plan p = make(kind, n0, n1, n2, sign);
    plans_.emplace(key, p);
    return p;
  }

private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  static fftw_plan make(Kind kind, std::size_t n0, std::size_t n1, std::size_t n2, int sign) {
    constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const std::size_t total = n0 * n1 * n2;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan p = nullptr;
    switch (kind) {
    case Kind::Dft3d:
      p = fftw_plan_dft_3d(static_cast<int>(n0), static_cast<int>(n1), static_cast<int>(n2), buf,
                           buf, sign, flags);
      break;
    case Kind::DftLastAxis: {
      // n0 contiguous transforms of length n1.
      int n = static_cast<int>(n1);
      p = fftw_plan_many_dft(1, &n, static_cast<int>(n0), buf, nullptr, 1, n, buf, nullptr, 1, n,
                             sign, flags);
      break;
    }
    case Kind::Dst2:
    case Kind::Dst3:
    case Kind::Dct3: {
      // Real and imaginary parts of n0 interleaved complex samples.
      int n = static_cast<int>(n0);
      const fftw_r2r_kind k = kind == Kind::Dst2   ? FFTW_RODFT10
                              : kind == Kind::Dst3 ? FFTW_RODFT01
                                                   : FFTW_REDFT01;
      auto* d = reinterpret_cast<double*>(buf);
      p = fftw_plan_many_r2r(1, &n, 2, d, nullptr, 2, 1, d, nullptr, 2, 1, &k, flags);
      break;
    }
    }
    fftw_free(buf);
    return p;
  }

  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(std::span<std::complex<double>> s) {
  return reinterpret_cast<fftw_complex*>(s.data());
}

/// Unnormalized in-place 3D DFT (sign -1 forward, +1 backward).
inline void dft3d(std::span<std::complex<double>> data, std::size_t n0, std::size_t n1,
                  std::size_t n2, int sign) {
  auto plan = PlanCache::instance().get(PlanCache::Kind::Dft3d, n0, n1, n2, sign);
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

/// Unnormalized in-place DFTs along the contiguous last axis of an (rows x n) array.
inline void dft_last_axis(std::span<std::complex<double>> data, std::size_t rows, std::size_t n,
                          int sign) {
  auto plan = PlanCache::instance().get(PlanCache::Kind::DftLastAxis, rows, n, 1, sign);
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

/// In-place real-to-real transform applied separately to real and imaginary parts.
inline void r2r(std::span<std::complex<double>> data, PlanCache::Kind kind) {
  auto plan = PlanCache::instance().get(kind, data.size(), 1, 1, 0);
  auto* d = reinterpret_cast<double*>(data.data());
  fftw_execute_r2r(plan, d, d);
}

} // namespace snls::detail

#endif
