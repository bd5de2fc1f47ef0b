#pragma once

#include <vector>

#include "fracground/grid.hpp"
#include "fracground/spectral.hpp"

namespace fracground {

/// The fractional Laplacian (-Delta)^s on a periodic grid, as the Fourier
/// multiplier |xi|^{2s}. Immutable; safe to share across threads.
class FracLapOperator {
 public:
  FracLapOperator(const Grid& grid, double s);

  double s() const { return s_; }
  const Grid& grid() const { return grid_; }
  /// |xi|^{2s} per spectrum slot (FFT order). Zero at xi = 0.
  const std::vector<double>& symbol() const { return symbol_; }

 private:
  Grid grid_;
  double s_;
  std::vector<double> symbol_;
};

/// (-Delta)^s u. Throws on grid mismatch or non-finite input.
Field apply_flap_spectral(const FracLapOperator& op, const Field& u);

/// ((-Delta)^s + shift)^{-1} u, shift > 0.
Field apply_resolvent(const FracLapOperator& op, const Field& u, double shift);

/// ||u||^2_{D^{s,2}} = <(-Delta)^s u, u>_{L^2}, computed in frequency space.
double dsquare_seminorm(const FracLapOperator& op, const Field& u);

/// <u, w>_{D^{s,2}}
double dsquare_inner(const FracLapOperator& op, const Field& u, const Field& w);

/// ||u||^2_{H^s} = ||u||^2_{L^2} + ||u||^2_{D^{s,2}}
double hs_norm_squared(const FracLapOperator& op, const Field& u);

// ---------------------------------------------------------------------------
// Real-space singular-integral form (one dimension only). This path shares
// nothing with the multiplier above and serves as its oracle.

struct QuadratureOptions {
  /// Add the contribution of |y| > outer_cut using the periodic extension of u
  /// (exact constant part plus `far_periods` box lengths integrated directly).
  bool far_field = true;
  int far_periods = 64;
};

/// cns * int (2u(x) - u(x+y) - u(x-y)) / |y|^{1+2s} dy at grid node x.
///
/// The annulus inner_cut <= |y| <= outer_cut is integrated with node-aligned
/// trapezoid sums plus an Euler-Maclaurin end correction; |y| < inner_cut
/// uses the Taylor model 2u(x)-u(x+y)-u(x-y) ~ -u''(x) y^2 with u'' from a
/// fourth-order finite difference. inner_cut and outer_cut are rounded to
/// whole nodes.
double apply_flap_quadrature(const Field& u, double s, const Point& x, double inner_cut,
                             double outer_cut, double cns,
                             const QuadratureOptions& opts = {});

struct Calibration {
  double cns;
  double relative_misfit;  ///< ||c q - a|| / ||a|| at the fitted c
};

/// Least-squares constant c matching the quadrature (c = 1, then scaled) to
/// the multiplier on cos(k1 x), k1 the lowest nonzero lattice frequency.
Calibration calibrate_cns(double s, const Grid& grid, double inner_cut_nodes = 2,
                          int sample_nodes = 32);

}  // namespace fracground
