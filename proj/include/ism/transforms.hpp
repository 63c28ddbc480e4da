/// @file transforms.hpp
/// @brief RAII wrappers over FFTW's 2D real-to-real DCT-I / DST-I plans.

#pragma once

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <vector>

namespace ism::detail {

/// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// A 2D real-to-real transform of an (n_slow x n_fast) row-major array.
/// Planned with FFTW_ESTIMATE so results are reproducible run to run.
class R2RPlan {
 public:
  R2RPlan() = default;
  R2RPlan(int n_slow, int n_fast, fftw_r2r_kind kind) : n_slow_(n_slow), n_fast_(n_fast) {
    std::vector<double> scratch(static_cast<std::size_t>(n_slow) * static_cast<std::size_t>(n_fast));
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_r2r_2d(n_slow, n_fast, scratch.data(), scratch.data(), kind, kind,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_ == nullptr) throw std::runtime_error("FFTW failed to create a transform plan");
  }
  R2RPlan(const R2RPlan&) = delete;
  R2RPlan& operator=(const R2RPlan&) = delete;
  R2RPlan(R2RPlan&& o) noexcept { *this = std::move(o); }
  R2RPlan& operator=(R2RPlan&& o) noexcept {
    if (this != &o) {
      reset();
      plan_ = o.plan_;
      n_slow_ = o.n_slow_;
      n_fast_ = o.n_fast_;
      o.plan_ = nullptr;
    }
    return *this;
  }
  ~R2RPlan() { reset(); }

  /// In-place unnormalized transform.
  void execute(double* data) const { fftw_execute_r2r(plan_, data, data); }

  int n_slow() const { return n_slow_; }
  int n_fast() const { return n_fast_; }

 private:
  void reset() {
    if (plan_ != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
      plan_ = nullptr;
    }
  }

  fftw_plan plan_ = nullptr;
  int n_slow_ = 0;
  int n_fast_ = 0;
};

}  // namespace ism::detail
