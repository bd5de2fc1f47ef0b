#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "fracground/grid.hpp"

namespace fracground::detail {

using Spectrum = std::vector<std::complex<double>>;

/// Unnormalized forward / inverse DFT pair for one grid shape.
///
/// forward: uhat_k = sum_j u_j exp(-2 pi i k j / n); inverse divides by n^N.
/// Plans are created once per shape and shared; execution is thread-safe.
class FftPlan {
 public:
  static std::shared_ptr<const FftPlan> get(const Grid& grid);

  Spectrum forward(const Field& u) const;
  Spectrum forward(const Spectrum& in) const;
  /// Inverse transform including the 1/n^N factor.
  Spectrum inverse(Spectrum in) const;

  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

 private:
  FftPlan(int dim, int n);
  int dim_;
  int n_;
  std::size_t size_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace fracground::detail
