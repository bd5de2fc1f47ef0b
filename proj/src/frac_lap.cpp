#include "fracground/frac_lap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace fracground {

using detail::FftPlan;

Spectrum spectrum(const Field& u) { return FftPlan::get(u.grid)->forward(u); }

Field real_inverse(const Grid& grid, Spectrum coeffs, double* max_imag) {
  Spectrum back = FftPlan::get(grid)->inverse(std::move(coeffs));
  Field out(grid);
  double leak = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i) {
    out[i] = back[i].real();
    leak = std::max(leak, std::abs(back[i].imag()));
  }
  if (max_imag) *max_imag = leak;
  return out;
}

Point frequency_of(const Grid& grid, std::size_t idx) {
  const int n = grid.points_per_axis();
  if (grid.dim() == 1) return {grid.frequency(static_cast<int>(idx))};
  return {grid.frequency(static_cast<int>(idx / n)), grid.frequency(static_cast<int>(idx % n))};
}

bool paired_slot(const Grid& grid, std::size_t idx, std::size_t& mirror) {
  const int n = grid.points_per_axis();
  auto reflect = [n](int m) { return (n - m) % n; };
  if (grid.dim() == 1) {
    const int m = static_cast<int>(idx);
    if (m == n / 2) return false;
    mirror = grid.flat(reflect(m));
    return true;
  }
  const int m0 = static_cast<int>(idx / n), m1 = static_cast<int>(idx % n);
  if (m0 == n / 2 || m1 == n / 2) return false;
  mirror = grid.flat(reflect(m0), reflect(m1));
  return true;
}

namespace {

bool touches_nyquist(const Grid& grid, std::size_t idx) {
  const int n = grid.points_per_axis();
  if (grid.dim() == 1) return static_cast<int>(idx) == n / 2;
  return static_cast<int>(idx / n) == n / 2 || static_cast<int>(idx % n) == n / 2;
}

}  // namespace

Field spectral_derivative(const Field& u, int axis) {
  const Grid& g = u.grid;
  if (axis < 0 || axis >= g.dim()) throw ConfigError("spectral_derivative: axis out of range");
  Spectrum c = spectrum(u);
  const int n = g.points_per_axis();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const int m = g.dim() == 1 ? static_cast<int>(i)
                               : (axis == 0 ? static_cast<int>(i / n) : static_cast<int>(i % n));
    if (m == n / 2) {
      c[i] = 0.0;
      continue;
    }
    c[i] *= std::complex<double>(0.0, g.frequency(m));
  }
  return real_inverse(g, std::move(c));
}

Field spectral_shift(const Field& u, const Point& a) {
  const Grid& g = u.grid;
  Spectrum c = spectrum(u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Point xi = frequency_of(g, i);
    double phase = 0.0;
    for (int d = 0; d < g.dim(); ++d) phase += xi[d] * a.at(d);
    if (touches_nyquist(g, i))
      c[i] *= std::cos(phase);
    else
      c[i] *= std::polar(1.0, -phase);
  }
  return real_inverse(g, std::move(c));
}

TrigInterpolant::TrigInterpolant(const Field& u) : grid_(u.grid), coeffs_(spectrum(u)) {
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (auto& z : coeffs_) z *= scale;
}

double TrigInterpolant::value(const Point& x) const {
  const double L = grid_.half_width();
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const Point xi = frequency_of(grid_, i);
    double phase = 0.0;
    for (int d = 0; d < grid_.dim(); ++d) phase += xi[d] * (x[d] + L);
    acc += (coeffs_[i] * std::polar(1.0, phase)).real();
  }
  return acc;
}

void TrigInterpolant::derivatives(const Point& x, Point& grad, std::vector<double>& hess) const {
  const int N = grid_.dim();
  const double L = grid_.half_width();
  grad.assign(N, 0.0);
  hess.assign(N * N, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const Point xi = frequency_of(grid_, i);
    double phase = 0.0;
    for (int d = 0; d < N; ++d) phase += xi[d] * (x[d] + L);
    const std::complex<double> term = coeffs_[i] * std::polar(1.0, phase);
    // d/dx_a -> i xi_a ; d2/dx_a dx_b -> -xi_a xi_b
    for (int a = 0; a < N; ++a) {
      grad[a] += (std::complex<double>(0.0, xi[a]) * term).real();
      for (int b = 0; b < N; ++b) hess[a * N + b] -= xi[a] * xi[b] * term.real();
    }
  }
}

Point spectral_argmax(const Field& u) {
  const Grid& g = u.grid;
  const int N = g.dim();
  std::size_t best = 0;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] > u[best]) best = i;
  const Point start = g.node(best);
  TrigInterpolant interp(u);
  Point x = start, grad;
  std::vector<double> hess;
  for (int it = 0; it < 30; ++it) {
    interp.derivatives(x, grad, hess);
    Point step(N);
    if (N == 1) {
      if (!(hess[0] < 0.0)) return start;
      step[0] = -grad[0] / hess[0];
    } else {
      const double det = hess[0] * hess[3] - hess[1] * hess[2];
      if (!(hess[0] < 0.0 && det > 0.0)) return start;
      step[0] = -(hess[3] * grad[0] - hess[1] * grad[1]) / det;
      step[1] = -(-hess[2] * grad[0] + hess[0] * grad[1]) / det;
    }
    double len = 0.0;
    for (int d = 0; d < N; ++d) {
      x[d] += step[d];
      len = std::max(len, std::abs(step[d]));
    }
    for (int d = 0; d < N; ++d)
      if (std::abs(x[d] - start[d]) > g.spacing()) return start;
    if (len < 1e-14 * std::max(1.0, g.half_width())) break;
  }
  return x;
}

Field symmetrize_about_origin(const Field& u) {
  const Grid& g = u.grid;
  const int n = g.points_per_axis();
  auto mirror = [n](int j) { return (n - j) % n; };
  Field out(g);
  if (g.dim() == 1) {
    for (int j = 0; j < n; ++j) out[j] = 0.5 * (u[j] + u[mirror(j)]);
    return out;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int ra = mirror(a), rb = mirror(b);
      const double acc = u[g.flat(a, b)] + u[g.flat(ra, b)] + u[g.flat(a, rb)] + u[g.flat(ra, rb)] +
                         u[g.flat(b, a)] + u[g.flat(rb, a)] + u[g.flat(b, ra)] + u[g.flat(rb, ra)];
      out[g.flat(a, b)] = acc / 8.0;
    }
  return out;
}

FracLapOperator::FracLapOperator(const Grid& grid, double s) : grid_(grid), s_(s) {
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("fractional order s must lie in (0, 1]");
  symbol_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point xi = frequency_of(grid, i);
    double r2 = 0.0;
    for (double c : xi) r2 += c * c;
    // s = 1 must give |xi|^2 exactly.
    symbol_[i] = s == 1.0 ? r2 : (r2 == 0.0 ? 0.0 : std::pow(r2, s));
  }
}

namespace {

Field apply_multiplier(const Field& u, const std::vector<double>& mult, const char* where) {
  require_finite(u, where);
  Spectrum c = spectrum(u);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= mult[i];
  double leak = 0.0;
  Field out = real_inverse(u.grid, std::move(c), &leak);
  const double scale = std::max(max_abs(out), max_abs(u));
  if (leak > 1e-10 * scale && leak > 1e-300)
    throw NumericalError(std::string(where) + ": imaginary leakage above tolerance");
  return out;
}

void require_op_grid(const FracLapOperator& op, const Field& u, const char* where) {
  if (!(op.grid() == u.grid)) throw ConfigError(std::string(where) + ": grid mismatch");
}

}  // namespace

Field apply_flap_spectral(const FracLapOperator& op, const Field& u) {
  require_op_grid(op, u, "apply_flap_spectral");
  return apply_multiplier(u, op.symbol(), "apply_flap_spectral");
}

Field apply_resolvent(const FracLapOperator& op, const Field& u, double shift) {
  require_op_grid(op, u, "apply_resolvent");
  if (!(shift > 0.0)) throw ConfigError("apply_resolvent: shift must be positive");
  std::vector<double> inv(op.symbol().size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / (op.symbol()[i] + shift);
  return apply_multiplier(u, inv, "apply_resolvent");
}

double dsquare_inner(const FracLapOperator& op, const Field& u, const Field& w) {
  require_op_grid(op, u, "dsquare_inner");
  require_op_grid(op, w, "dsquare_inner");
  const Spectrum a = spectrum(u);
  const Spectrum b = spectrum(w);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += op.symbol()[i] * (a[i] * std::conj(b[i])).real();
  const Grid& g = u.grid;
  return acc * g.cell_measure() / static_cast<double>(g.size());
}

double dsquare_seminorm(const FracLapOperator& op, const Field& u) {
  require_op_grid(op, u, "dsquare_seminorm");
  const Spectrum a = spectrum(u);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += op.symbol()[i] * std::norm(a[i]);
  const Grid& g = u.grid;
  return acc * g.cell_measure() / static_cast<double>(g.size());
}

double hs_norm_squared(const FracLapOperator& op, const Field& u) {
  return inner_l2(u, u) + dsquare_seminorm(op, u);
}

}  // namespace fracground
