#include "fracground/potential.hpp"

#include <cmath>

namespace fracground {

std::string_view to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::constant: return "constant";
    case PotentialFamily::smooth_well: return "smooth_well";
    case PotentialFamily::radial_decreasing: return "radial_decreasing";
    case PotentialFamily::double_well: return "double_well";
  }
  return "?";
}

PotentialFamily parse_potential_family(std::string_view name) {
  for (auto f : {PotentialFamily::constant, PotentialFamily::smooth_well,
                 PotentialFamily::radial_decreasing, PotentialFamily::double_well})
    if (to_string(f) == name) return f;
  throw ConfigError("unknown potential family '" + std::string(name) +
                    "' (expected constant, smooth_well, radial_decreasing or double_well)");
}

Potential::Potential(PotentialFamily family, std::vector<double> params)
    : family_(family), params_(std::move(params)) {
  switch (family_) {
    case PotentialFamily::constant:
      if (params_.size() != 1 || !(params_[0] > 0.0))
        throw ConfigError("constant potential needs one positive parameter lambda");
      break;
    case PotentialFamily::smooth_well:
      if (params_.size() > 2) throw ConfigError("smooth_well takes the well center (N values)");
      break;
    case PotentialFamily::radial_decreasing:
      if (!params_.empty()) throw ConfigError("radial_decreasing takes no parameters");
      break;
    case PotentialFamily::double_well:
      if (params_.size() != 1 || !std::isfinite(params_[0]))
        throw ConfigError("double_well needs one parameter a");
      break;
  }
}

void Potential::validate(int dim) const {
  if (family_ == PotentialFamily::smooth_well && !params_.empty() &&
      static_cast<int>(params_.size()) != dim)
    throw ConfigError("smooth_well center has " + std::to_string(params_.size()) +
                      " coordinates but dim = " + std::to_string(dim));
}

namespace {

double center(const std::vector<double>& p, int d) {
  return d < static_cast<int>(p.size()) ? p[d] : 0.0;
}

}  // namespace

double Potential::operator()(const Point& x) const {
  switch (family_) {
    case PotentialFamily::constant: return params_[0];
    case PotentialFamily::smooth_well: {
      double r2 = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double t = x[d] - center(params_, static_cast<int>(d));
        r2 += t * t;
      }
      return 1.0 + r2 / (1.0 + r2);
    }
    case PotentialFamily::radial_decreasing: {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      return 1.0 + 1.0 / (1.0 + r2);
    }
    case PotentialFamily::double_well: {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      const double a2 = params_[0] * params_[0];
      return 1.0 + (r2 - a2) * (r2 - a2) / (1.0 + r2 * r2);
    }
  }
  return 0.0;
}

Point Potential::gradient(const Point& x) const {
  Point g(x.size(), 0.0);
  switch (family_) {
    case PotentialFamily::constant: break;
    case PotentialFamily::smooth_well: {
      double r2 = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double t = x[d] - center(params_, static_cast<int>(d));
        r2 += t * t;
      }
      // d/dr2 [r2/(1+r2)] = 1/(1+r2)^2
      const double f = 2.0 / ((1.0 + r2) * (1.0 + r2));
      for (std::size_t d = 0; d < x.size(); ++d) g[d] = f * (x[d] - center(params_, static_cast<int>(d)));
      break;
    }
    case PotentialFamily::radial_decreasing: {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      const double f = -2.0 / ((1.0 + r2) * (1.0 + r2));
      for (std::size_t d = 0; d < x.size(); ++d) g[d] = f * x[d];
      break;
    }
    case PotentialFamily::double_well: {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      const double a2 = params_[0] * params_[0];
      const double num = (r2 - a2) * (r2 - a2);
      const double den = 1.0 + r2 * r2;
      // d/dr2 of num/den
      const double dr2 = (2.0 * (r2 - a2) * den - num * 2.0 * r2) / (den * den);
      for (std::size_t d = 0; d < x.size(); ++d) g[d] = 2.0 * x[d] * dr2;
      break;
    }
  }
  return g;
}

double Potential::infimum() const {
  return family_ == PotentialFamily::constant ? params_[0] : 1.0;
}

bool Potential::unique_minimizer(int dim, Point& where) const {
  if (family_ != PotentialFamily::smooth_well) return false;
  where.assign(dim, 0.0);
  for (int d = 0; d < dim; ++d) where[d] = center(params_, d);
  return true;
}

}  // namespace fracground
