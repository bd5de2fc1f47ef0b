#pragma once

#include <vector>

#include "fracground/analysis.hpp"

namespace fracground {

struct SweepOptions {
  SolverConfig solver;
  /// Radial decay window in the rescaled frame; r2 <= 0 selects [0.3 L, 0.7 L].
  double decay_r1 = 0.0;
  double decay_r2 = 0.0;
  /// Concurrent solves; <= 0 reads FRACGROUND_THREADS (default: hardware threads).
  int threads = 0;
};

struct SweepEntry {
  SolveResult solve;
  Point maximizer_rescaled;
  Point maximizer;           ///< x0 + eps * maximizer_rescaled
  bool maximizer_multiple = false;
  double decay_slope = 0.0;  ///< NaN when the fit was not possible
  std::vector<double> criticality;
  double criticality_norm = 0.0;
  ProfileGap gap;
  Field aligned;             ///< v_eps moved so its maximum sits at the origin
};

struct SweepOutcome {
  SweepReport report;
  std::vector<SweepEntry> entries;
  SolveResult limit;         ///< U~ for lambda = inf V
  double nu_limit = 0.0;
};

/// Worker count from FRACGROUND_THREADS, falling back to the hardware count.
int sweep_threads();

/// One solve plus diagnostics per eps (run concurrently), aggregated in
/// eps_list order. Results do not depend on the number of workers.
SweepOutcome run_eps_sweep(const ProblemParams& base, const std::vector<double>& eps_list, const Grid& grid,
                           const SweepOptions& opt);

struct MaximizerRate {
  bool pass = false;
  double C = 0.0;                 ///< max d/eps over the two finest entries
  std::vector<double> distances;  ///< physical distance to the well minimum
  std::string message;
};

/// Physical maximizer distance to `target` bounded by C eps, with the finest
/// entry within two physical grid spacings of its prediction C eps.
MaximizerRate maximizer_rate(const SweepReport& report, const Point& target, double rescaled_spacing);

}  // namespace fracground
