#include <cmath>
#include <numbers>

#include "fracground/frac_lap.hpp"

namespace fracground {

namespace {

// Node-aligned kernel weights (k h)^{-1-2s} for k = 0..kmax.
struct Kernel {
  double s;
  double h;
  std::vector<double> w;

  Kernel(double s_, double h_, std::size_t kmax) : s(s_), h(h_), w(kmax + 1, 0.0) {
    for (std::size_t k = 1; k <= kmax; ++k) w[k] = std::pow(static_cast<double>(k) * h, -1.0 - 2.0 * s);
  }
};

// Trapezoid over nodes k = a..b of f(k) with the first Euler-Maclaurin end
// correction, derivatives by one-sided second-order differences.
template <class F>
double trapezoid(F&& f, long a, long b, double h) {
  double sum = 0.5 * (f(a) + f(b));
  for (long k = a + 1; k < b; ++k) sum += f(k);
  sum *= h;
  if (b - a >= 2) {
    const double da = (-3.0 * f(a) + 4.0 * f(a + 1) - f(a + 2)) / (2.0 * h);
    const double db = (3.0 * f(b) - 4.0 * f(b - 1) + f(b - 2)) / (2.0 * h);
    sum -= h * h / 12.0 * (db - da);
  }
  return sum;
}

double quadrature_at(const Field& u, const Kernel& ker, long j, long inner_nodes, long outer_nodes,
                     const QuadratureOptions& opts) {
  const long n = u.grid.points_per_axis();
  const double h = ker.h;
  const double s = ker.s;
  auto at = [&](long k) {
    long r = k % n;
    return u[static_cast<std::size_t>(r < 0 ? r + n : r)];
  };
  const double uj = at(j);

  // Both half-lines contribute equally, hence the factor 2 throughout.
  auto second_diff = [&](long k) { return (2.0 * uj - at(j + k) - at(j - k)) * ker.w[k]; };
  double total = 2.0 * trapezoid(second_diff, inner_nodes, outer_nodes, h);

  const double delta = inner_nodes * h;
  const double upp =
      (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * uj + 16.0 * at(j - 1) - at(j - 2)) / (12.0 * h * h);
  total += 2.0 * (-upp) * std::pow(delta, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);

  if (opts.far_field) {
    const double R = outer_nodes * h;
    total += 2.0 * uj * std::pow(R, -2.0 * s) / s;
    const long far_end = outer_nodes + static_cast<long>(opts.far_periods) * n;
    auto images = [&](long k) { return (at(j + k) + at(j - k)) * ker.w[k]; };
    total -= 2.0 * trapezoid(images, outer_nodes, far_end, h);
    double mean = 0.0;
    for (double x : u.values) mean += x;
    mean /= static_cast<double>(n);
    const double RM = far_end * h;
    total -= 2.0 * (2.0 * mean) * std::pow(RM, -2.0 * s) / (2.0 * s);
  }
  return total;
}

struct Cuts {
  long inner;
  long outer;
};

Cuts resolve_cuts(const Grid& g, double inner_cut, double outer_cut) {
  const double h = g.spacing();
  if (!(inner_cut > 0.0 && inner_cut < outer_cut && outer_cut <= g.half_width() * (1 + 1e-12)))
    throw ConfigError("apply_flap_quadrature: need 0 < inner_cut < outer_cut <= L");
  Cuts c{std::max(1L, std::lround(inner_cut / h)), std::lround(outer_cut / h)};
  if (c.outer - c.inner < 2) throw ConfigError("apply_flap_quadrature: annulus spans fewer than 2 nodes");
  return c;
}

void require_quadrature_domain(const Grid& g, double s) {
  if (g.dim() != 1) throw ConfigError("apply_flap_quadrature: only N = 1 is supported by the oracle");
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("apply_flap_quadrature: s must lie in (0, 1)");
}

}  // namespace

double apply_flap_quadrature(const Field& u, double s, const Point& x, double inner_cut,
                             double outer_cut, double cns, const QuadratureOptions& opts) {
  const Grid& g = u.grid;
  require_quadrature_domain(g, s);
  if (!(cns > 0.0)) throw ConfigError("apply_flap_quadrature: cns must be positive");
  const Cuts cuts = resolve_cuts(g, inner_cut, outer_cut);
  const double pos = (x.at(0) + g.half_width()) / g.spacing();
  const long j = std::lround(pos);
  if (std::abs(pos - j) > 1e-9) throw ConfigError("apply_flap_quadrature: x must be a grid node");
  const long far_end = cuts.outer + (opts.far_field ? opts.far_periods * static_cast<long>(g.points_per_axis()) : 0);
  Kernel ker(s, g.spacing(), static_cast<std::size_t>(far_end));
  return cns * quadrature_at(u, ker, j, cuts.inner, cuts.outer, opts);
}

Calibration calibrate_cns(double s, const Grid& grid, double inner_cut_nodes, int sample_nodes) {
  require_quadrature_domain(grid, s);
  const int n = grid.points_per_axis();
  const double k1 = grid.frequency_step();
  Field u = sample(grid, [k1](const Point& x) { return std::cos(k1 * x[0]); });

  QuadratureOptions opts;
  const Cuts cuts = resolve_cuts(grid, inner_cut_nodes * grid.spacing(), grid.half_width());
  Kernel ker(s, grid.spacing(), static_cast<std::size_t>(cuts.outer + opts.far_periods * static_cast<long>(n)));

  const double eig = std::pow(k1, 2.0 * s);
  double qa = 0.0, qq = 0.0, aa = 0.0;
  std::vector<double> q, a;
  const int stride = std::max(1, n / std::max(1, sample_nodes));
  for (int j = 0; j < n; j += stride) {
    q.push_back(quadrature_at(u, ker, j, cuts.inner, cuts.outer, opts));
    a.push_back(eig * u[j]);
    qa += q.back() * a.back();
    qq += q.back() * q.back();
    aa += a.back() * a.back();
  }
  if (!(qq > 1e-300) || !std::isfinite(qq) || !std::isfinite(qa))
    throw NumericalError("calibrate_cns: degenerate fit");
  const double c = qa / qq;
  double misfit = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) misfit += (c * q[i] - a[i]) * (c * q[i] - a[i]);
  if (!(c > 0.0) || !std::isfinite(c)) throw NumericalError("calibrate_cns: non-positive constant");
  return {c, std::sqrt(misfit / aa)};
}

}  // namespace fracground
