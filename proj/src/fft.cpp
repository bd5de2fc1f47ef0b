#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace fracground::detail {

namespace {

// The FFTW planner is not re-entrant.
std::mutex planner_mutex;

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FftPlan::FftPlan(int dim, int n) : dim_(dim), n_(n) {
  size_ = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  Spectrum a(size_), b(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex);
  if (dim == 1) {
    forward_plan_ = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    backward_plan_ = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  } else {
    forward_plan_ = fftw_plan_dft_2d(n, n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    backward_plan_ =
        fftw_plan_dft_2d(n, n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  }
  if (!forward_plan_ || !backward_plan_) throw NumericalError("FFTW planning failed");
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

std::shared_ptr<const FftPlan> FftPlan::get(const Grid& grid) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(cache_mutex);
  auto key = std::make_pair(grid.dim(), grid.points_per_axis());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const FftPlan> plan(new FftPlan(grid.dim(), grid.points_per_axis()));
  cache.emplace(key, plan);
  return plan;
}

Spectrum FftPlan::forward(const Field& u) const {
  Spectrum in(size_);
  for (std::size_t i = 0; i < size_; ++i) in[i] = u[i];
  return forward(in);
}

Spectrum FftPlan::forward(const Spectrum& in) const {
  Spectrum tmp(in);
  Spectrum out(size_);
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(tmp.data()), as_fftw(out.data()));
  return out;
}

Spectrum FftPlan::inverse(Spectrum in) const {
  Spectrum out(size_);
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(in.data()), as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto& z : out) z *= scale;
  return out;
}

}  // namespace fracground::detail
