#pragma once

#include <complex>
#include <vector>

#include "fracground/grid.hpp"

namespace fracground {

/// Discrete Fourier coefficients in FFT slot order (row-major, axis 0 slowest).
using Spectrum = std::vector<std::complex<double>>;

/// Unnormalized DFT: uhat_m = sum_j u_j exp(-2 pi i m j / n).
///
/// With this convention a lattice plane wave is an exact eigenfunction of
/// every multiplier, and sum symbol |uhat|^2 * h^N / n^N equals the L^2
/// pairing <m(D) u, u>; all norms in the library are defined through it.
Spectrum spectrum(const Field& u);

/// Inverse of `spectrum`, returning the real part. `max_imag`, when given,
/// receives the largest discarded imaginary component.
Field real_inverse(const Grid& grid, Spectrum coeffs, double* max_imag = nullptr);

/// Frequency vector of flat spectrum slot `idx`.
Point frequency_of(const Grid& grid, std::size_t idx);
/// Slot holding -xi for slot `idx`. Returns false for slots touching the
/// unpaired Nyquist index -n/2.
bool paired_slot(const Grid& grid, std::size_t idx, std::size_t& mirror);

/// d/dx_axis by the multiplier i xi (Nyquist coefficient dropped).
Field spectral_derivative(const Field& u, int axis);

/// out(x) = u(x - a) via the phase multiplier exp(-i xi.a).
Field spectral_shift(const Field& u, const Point& a);

/// Trigonometric interpolant of a field, evaluable off-grid.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const Field& u);

  double value(const Point& x) const;
  /// Gradient and Hessian (row-major N x N) at x.
  void derivatives(const Point& x, Point& grad, std::vector<double>& hess) const;

 private:
  Grid grid_;
  Spectrum coeffs_;
};

/// Maximum of the trigonometric interpolant near the largest node value,
/// by Newton iteration on its gradient. Returns the node itself when the
/// local Hessian is not negative definite.
Point spectral_argmax(const Field& u);

/// Group average over the reflections x_i -> -x_i (and, for N = 2, the axis
/// swap) about the origin node: the lattice stand-in for radial symmetry.
Field symmetrize_about_origin(const Field& u);

}  // namespace fracground
