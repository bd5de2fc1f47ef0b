#pragma once

#include "fracground/frac_lap.hpp"
#include "fracground/grid.hpp"
#include "fracground/potential.hpp"

namespace fracground {

/// True iff 1 < p < (N+2s)/(N-2s) when N > 2s, or p > 1 when N <= 2s.
bool check_subcritical(int dim, double s, double p);

/// One instance of eps^{2s}(-Delta)^s u + V u = u^p, seen in the frame
/// x -> eps x + x0 where it reads (-Delta)^s v + V(eps x + x0) v = v^p.
class ProblemParams {
 public:
  /// Throws ConfigError when the exponent is not subcritical or any field is
  /// out of range.
  static ProblemParams make(int dim, double s, double p, double eps, Point x0, Potential potential);

  int dim() const { return dim_; }
  double s() const { return s_; }
  double p() const { return p_; }
  double eps() const { return eps_; }
  const Point& x0() const { return x0_; }
  const Potential& potential() const { return potential_; }

  ProblemParams with_eps(double eps) const;
  ProblemParams with_x0(Point x0) const;

 private:
  ProblemParams(int dim, double s, double p, double eps, Point x0, Potential potential);
  int dim_;
  double s_;
  double p_;
  double eps_;
  Point x0_;
  Potential potential_;
};

bool check_subcritical(const ProblemParams& params);

/// V(eps x + x0); equals V(x0) when eps = 0.
double rescaled_potential(const ProblemParams& params, const Point& x);

/// u^q on nonnegative entries; entries at or below 1e-30 map to 0.
Field positive_power(const Field& u, double q);

/// Rescaled-frame problem bound to a grid: caches V_eps on the nodes.
class RescaledModel {
 public:
  RescaledModel(const ProblemParams& params, const FracLapOperator& op);

  const ProblemParams& params() const { return params_; }
  const FracLapOperator& op() const { return op_; }
  const Grid& grid() const { return op_.grid(); }
  const Field& potential_samples() const { return vsamples_; }
  double mean_potential() const { return vmean_; }

  /// (-Delta)^s u + V_eps u
  Field apply_h(const Field& u) const;
  /// <u, w>_eps = <u, w>_{D^{s,2}} + int V_eps u w
  double eps_inner(const Field& u, const Field& w) const;
  double eps_norm2(const Field& u) const;
  double lp1_norm(const Field& u) const;
  double quotient(const Field& u) const;
  Field el_residual(const Field& u, double nu) const;
  double energy(const Field& u, double nu) const;

 private:
  ProblemParams params_;
  FracLapOperator op_;
  Field vsamples_;
  double vmean_;
};

/// ||u||^2_eps / ||u||^2_{L^{p+1}}. Throws on the zero field.
double rayleigh_quotient(const Field& u, const ProblemParams& params, const FracLapOperator& op);

/// 1/2 ||u||^2_eps - nu/(p+1) int |u|^{p+1}
double energy_J(const Field& u, double nu, const ProblemParams& params, const FracLapOperator& op);

/// (-Delta)^s u + V_eps u - nu u^p. Throws if u has negative entries.
Field el_residual(const Field& u, double nu, const ProblemParams& params, const FracLapOperator& op);

/// u_eps(x) = v((x - x0)/eps) sampled on `target` by (bi)linear interpolation.
///
/// Throws when the target spacing cannot resolve the dilated profile or when
/// more than 1e-4 of the L^2 mass of v falls outside the target box.
Field frame_transfer(const Field& v, const ProblemParams& params, const Grid& target);

/// eps^{N(1-p)/(1+p)} (eps^{2s} ||u||^2_{D^{s,2}} + int V u^2) / ||u||^2_{L^{p+1}},
/// the physical-frame quotient whose minimizers are the u_eps.
double physical_quotient(const Field& u, const ProblemParams& params, const FracLapOperator& op);

}  // namespace fracground
