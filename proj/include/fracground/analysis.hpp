#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fracground/model.hpp"
#include "fracground/solver.hpp"

namespace fracground {

// ---------------------------------------------------------------------------
// Maximizer

struct Maximizer {
  Point point;                  ///< refined location
  std::size_t node = 0;         ///< argmax node (lowest flat index on ties)
  bool multiple = false;        ///< plateau: non-adjacent nodes within 1e-12 of the max
  std::vector<Point> others;    ///< the competing nodes when `multiple`
};

/// Argmax node refined by a least-squares quadratic over its 3^N neighborhood.
Maximizer locate_maximizer(const Field& u);

// ---------------------------------------------------------------------------
// Criticality identity  int d_i V(eps x + x0) v^2 dx = 0

/// Components of int d_iV(eps x + x0) v^2, each divided by
/// ||grad V||_inf ||v||^2_{L^2}; the sup is taken over the image of the box.
/// Exactly zero for constant potentials.
std::vector<double> criticality_residual(const Field& v, const ProblemParams& params);

// ---------------------------------------------------------------------------
// Decay

struct DecayFit {
  double slope = 0.0;
  double r2_stat = 0.0;
  int bins = 0;
  /// Local slopes of the first and last thirds of the bins disagree by more
  /// than 10%: the tail is not a power law.
  bool non_power_law = false;
};

/// Least-squares slope of log u against log |x| over radial bin averages in
/// [r1, r2] (|x| measured from the origin). Requires r2 <= 0.8 L, u > 0 on
/// the window and at least 8 populated bins.
DecayFit decay_fit(const Field& u, double r1, double r2, int bins = 16);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepReport {
  std::vector<double> eps_list;         ///< strictly decreasing
  std::vector<double> nu_list;
  std::vector<Point> maximizer_list;    ///< physical frame
  std::vector<double> decay_slope_list;
  std::vector<double> criticality_list; ///< Euclidean norm of the normalized identity
  std::vector<double> profile_gap_list; ///< H^s distance to the limit profile
  std::vector<bool> converged_flags;

  void validate() const;
};

struct TrendVerdict {
  bool pass = false;
  std::vector<double> gaps;       ///< |nu_eps - nu_limit| per entry (NaN when excluded)
  std::vector<std::size_t> used;  ///< indices of converged entries
  std::string message;
};

/// |nu(V_eps) - nu_limit| must be non-increasing over converged entries and
/// the last gap below `threshold`.
TrendVerdict nu_convergence(const SweepReport& report, double nu_limit, double threshold);

/// True iff the converged entries of `values` strictly decrease.
TrendVerdict strictly_decreasing(const SweepReport& report, const std::vector<double>& values,
                                 const std::string& what);

// ---------------------------------------------------------------------------
// Profile comparison

struct ProfileGap {
  double gap = 0.0;
  Point shift;               ///< location of the maximum of v
  bool wrap_ambiguous = false;
};

/// ||v(. + shift) - U||_{H^s} with `shift` the spectrally refined maximizer of v.
ProfileGap profile_gap(const Field& v, const Field& U, const FracLapOperator& op);

/// v moved so that its maximum sits at the origin.
Field align_to_origin(const Field& v, Point* shift = nullptr);

// ---------------------------------------------------------------------------
// Orthogonality relations at the constant-potential ground state

struct OrthogonalityReport {
  /// Gram matrix of {U, d_1U, ..., d_NU} in <.,.>_0, normalized to unit diagonal.
  Eigen::MatrixXd gram;
  /// int U^p d_iU / (||U^p|| ||d_iU||)
  std::vector<double> up_du;
  /// int U^{p-1} d_iU d_jU normalized, i != j (N = 2 only)
  double up1_cross = 0.0;
  double max_offdiag() const;
};

OrthogonalityReport orthogonality_diagnostics(const Field& U, const FracLapOperator& op, double lambda,
                                              double p);

// ---------------------------------------------------------------------------
// Second variation

/// span{U_a, d_iU_a} and the eps-inner product used to project onto its
/// orthogonal complement W_eps.
class ProjectionBasis {
 public:
  ProjectionBasis(const Field& base, const RescaledModel& model);

  const Field& base() const { return vectors_.front(); }
  const std::vector<Field>& vectors() const { return vectors_; }
  double gram_condition() const { return condition_; }
  /// v minus its eps-orthogonal projection onto the span.
  Field project_out(const Field& v) const;

 private:
  const RescaledModel* model_;
  std::vector<Field> vectors_;
  Eigen::MatrixXd gram_;
  Eigen::LDLT<Eigen::MatrixXd> solver_;
  double condition_ = 0.0;
};

/// J''(U, nu)[v, w] = <v, w>_eps - p nu int U^{p-1} v w
double second_variation(const RescaledModel& model, const Field& U, double nu, const Field& v,
                        const Field& w);

struct CoercivityReport {
  double min_quotient = 0.0;         ///< smallest J''[v,v]/||v||^2_eps found on W_eps
  double probe_min = 0.0;            ///< over the random probes only
  double power_estimate = 0.0;       ///< after the power iteration
  double power_change = 0.0;         ///< |last - previous| estimate of the power iteration
  double neg_direction_value = 0.0;  ///< J''[U,U]/||U||^2_eps
  double gram_condition = 0.0;
};

/// Random probes projected onto W_eps plus 50 power steps on the compact part
/// of J'' to estimate its minimum there.
CoercivityReport coercivity_check(const Field& U_a, double nu, const ProblemParams& params,
                                  const FracLapOperator& op, int n_probe, std::uint64_t seed,
                                  int power_steps = 50);

// ---------------------------------------------------------------------------
// Uniqueness

struct UniquenessReport {
  double max_pairwise_gap = 0.0;
  bool all_converged = false;
  std::vector<SolveResult> runs;
  bool unique(double threshold = 1e-5) const { return all_converged && max_pairwise_gap <= threshold; }
};

/// k solves from random_positive seeds seed, seed+1, ...; each result is
/// aligned by its maximizer and compared pairwise in H^s.
UniquenessReport multistart_uniqueness(const ProblemParams& params, const FracLapOperator& op, int k,
                                       std::uint64_t seed, const SolverConfig& base_cfg);

}  // namespace fracground
