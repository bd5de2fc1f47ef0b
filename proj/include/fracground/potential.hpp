#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fracground/grid.hpp"

namespace fracground {

enum class PotentialFamily { constant, smooth_well, radial_decreasing, double_well };

std::string_view to_string(PotentialFamily f);
PotentialFamily parse_potential_family(std::string_view name);

/// Smooth potentials bounded away from zero with bounded derivatives up to
/// order two:
///   constant           V = lambda                          params {lambda}
///   smooth_well        V = 1 + r^2/(1+r^2), r = |x - c|     params {c_1..c_N} (empty = origin)
///   radial_decreasing  V = 1 + 1/(1+|x|^2)                 params {}
///   double_well        V = 1 + (|x|^2-a^2)^2/(1+|x|^4)     params {a}
class Potential {
 public:
  Potential(PotentialFamily family, std::vector<double> params);

  static Potential constant(double lambda) { return {PotentialFamily::constant, {lambda}}; }

  PotentialFamily family() const { return family_; }
  const std::vector<double>& params() const { return params_; }

  double operator()(const Point& x) const;
  Point gradient(const Point& x) const;
  /// inf over R^N (attained or not).
  double infimum() const;
  /// A global minimum point when one exists and is unique.
  bool unique_minimizer(int dim, Point& where) const;
  /// Checks the parameter list against the dimension.
  void validate(int dim) const;

 private:
  PotentialFamily family_;
  std::vector<double> params_;
};

}  // namespace fracground
