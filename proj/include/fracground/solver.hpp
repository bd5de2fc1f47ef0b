#pragma once

#include <cstdint>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "fracground/model.hpp"

namespace fracground {

enum class InitKind { gaussian_bump, random_positive, warm_start };

std::string_view to_string(InitKind k);
InitKind parse_init_kind(std::string_view name);

struct SolverConfig {
  int max_iters = 5000;
  double step = 1.0;
  double tol_residual = 1e-6;
  double tol_stall = 1e-12;
  InitKind init_kind = InitKind::gaussian_bump;
  std::uint64_t rng_seed = 0;
  bool refine = false;
  /// Restrict iterates to fields symmetric about the origin node (the
  /// radial class on the lattice).
  bool radial_class = false;
  /// Target relative residual of the second-order stage.
  double refine_tol = 1e-11;
  int refine_max_steps = 12;
  /// Initial field for InitKind::warm_start.
  std::optional<Field> warm_start;

  void validate() const;
};

struct SolveResult {
  Field minimizer;             ///< >= 0, ||.||_{L^{p+1}} = 1
  double nu = 0.0;             ///< quotient of the minimizer
  double residual_l2 = 0.0;    ///< ||EL residual||_{L^2} / ||u||_{L^2}
  int iters = 0;               ///< descent iterations
  int refine_steps = 0;
  bool converged = false;
  std::vector<double> energy_trace{};  ///< quotient after each accepted descent step
  /// "converged", "stalled", "max_iters", "cancelled", "refine_fallback", ...
  std::string status{};
  /// Relative L^2 size of the symmetrization correction (ground_state_constant).
  double symmetry_correction = 0.0;
  bool symmetry_flag = false;
};

/// Strictly positive starting field.
Field init_field(const Grid& grid, InitKind kind, std::uint64_t seed,
                 const std::optional<Field>& warm = std::nullopt);

/// Preconditioned projected descent for nu(V_eps) = inf ||u||^2_eps / ||u||^2_{p+1}
/// on the sphere ||u||_{L^{p+1}} = 1, followed by `newton_refine` when
/// cfg.refine is set. Never fabricates a minimizer: failure to converge is
/// reported through `converged` and `status`.
SolveResult minimize_rayleigh(const ProblemParams& params, const FracLapOperator& op,
                              const SolverConfig& cfg, std::stop_token stop = {});

/// Damped Newton on the stationarity system with the second variation
/// applied matrix-free and inverted by preconditioned MINRES.
SolveResult newton_refine(const Field& u0, const ProblemParams& params, const FracLapOperator& op,
                          double nu0, const SolverConfig& cfg);

/// Ground state of the constant-potential problem nu(lambda), recentered so
/// its maximum sits at the origin and symmetrized about it.
SolveResult ground_state_constant(double lambda, int dim, double s, double p, const Grid& grid,
                                  const SolverConfig& cfg);

}  // namespace fracground
